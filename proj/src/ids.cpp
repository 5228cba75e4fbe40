#include "chatmeta/ids.hpp"

#include <cstdio>

#include "chatmeta/error.hpp"

namespace chatmeta {

namespace {

// FNV-1a, good enough to key deterministic per-donation id streams.
std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

} // namespace

IdAllocator::IdAllocator(std::string_view donation_id) : rng_(fnv1a(donation_id)) {}

std::string IdAllocator::next_uuid() {
  const std::uint64_t hi = rng_();
  const std::uint64_t lo = rng_();
  char buf[40];
  // RFC 4122 v4 layout, bits sourced from the deterministic stream.
  std::snprintf(buf, sizeof(buf), "%08x-%04x-4%03x-%04x-%012llx",
                static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xffff),
                static_cast<unsigned>(hi & 0x0fff),
                static_cast<unsigned>(0x8000 | ((lo >> 48) & 0x3fff)),
                static_cast<unsigned long long>(lo & 0xffffffffffffULL));
  return buf;
}

const std::string& IdAllocator::id_for(std::string_view raw_label) {
  if (raw_label.empty())
    throw Error(Errc::parse_error, "empty sender/chat label cannot be anonymized");
  auto it = map_.find(std::string(raw_label));
  if (it != map_.end()) return it->second;
  auto [ins, ok] = map_.emplace(std::string(raw_label), next_uuid());
  return ins->second;
}

} // namespace chatmeta
