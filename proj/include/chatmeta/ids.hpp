#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>

namespace chatmeta {

// Per-donation anonymizer. Raw labels (sender names, phone numbers, chat
// file names) are replaced by UUID-formatted identifiers the moment they
// are seen; the raw->id mapping lives only for the duration of one parse
// and is never persisted.
//
// The id stream is a pure function of the donation id, so re-running the
// pipeline on identical input yields identical ids, while the same label
// in two different donations maps to unrelated ids.
class IdAllocator {
public:
  explicit IdAllocator(std::string_view donation_id);

  // Stable within this allocator: same label, same id. Throws parse_error
  // on an empty label.
  const std::string& id_for(std::string_view raw_label);

  std::size_t size() const { return map_.size(); }

private:
  std::string next_uuid();

  std::mt19937_64 rng_;
  std::unordered_map<std::string, std::string> map_;
};

} // namespace chatmeta
