#include "chatmeta/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "chatmeta/error.hpp"

namespace chatmeta {

const std::array<std::string_view, kRtBinCount> kRtBinLabels = {
    "1min", "2min", "3-5min", "6-15min", "16-30min", "31-60min", ">60min"};

int rt_bin_index(std::int64_t rt_min) {
  for (int i = 0; i < kRtBinCount - 1; ++i)
    if (rt_min <= kRtBinUpper[i]) return i;
  return kRtBinCount - 1;
}

RtDistribution bin_rts(std::span<const std::int64_t> rts) {
  if (rts.empty()) throw Error(Errc::empty_sample, "bin_rts on empty sample");
  RtDistribution d;
  d.n = static_cast<std::int64_t>(rts.size());
  std::array<std::int64_t, kRtBinCount> counts{};
  for (const auto rt : rts) ++counts[rt_bin_index(rt)];
  for (int i = 0; i < kRtBinCount; ++i)
    d.bins[i] = static_cast<double>(counts[i]) / static_cast<double>(d.n);
  return d;
}

double similarity(const RtDistribution& p, const RtDistribution& q) {
  if (p.n <= 0 || q.n <= 0)
    throw Error(Errc::empty_sample, "similarity needs non-empty distributions");

  // Disjoint support gives a Jensen-Shannon distance of exactly 1; return the
  // exact value rather than accumulating log terms that round away from it.
  bool shared = false;
  for (int i = 0; i < kRtBinCount; ++i)
    if (p.bins[i] > 0 && q.bins[i] > 0) shared = true;
  if (!shared) return 0.0;

  double div_p = 0.0, div_q = 0.0; // KL(p||m), KL(q||m), base 2
  for (int i = 0; i < kRtBinCount; ++i) {
    const double m = 0.5 * (p.bins[i] + q.bins[i]);
    if (p.bins[i] > 0) div_p += p.bins[i] * std::log2(p.bins[i] / m);
    if (q.bins[i] > 0) div_q += q.bins[i] * std::log2(q.bins[i] / m);
  }
  const double jsd_sq = 0.5 * (div_p + div_q);
  const double sim = 1.0 - std::sqrt(std::max(jsd_sq, 0.0));
  return std::clamp(sim, 0.0, 1.0);
}

double rp_within(std::span<const std::int64_t> rts, std::int64_t threshold_min) {
  if (rts.empty()) throw Error(Errc::empty_sample, "rp_within on empty sample");
  std::int64_t hits = 0;
  for (const auto rt : rts)
    if (rt <= threshold_min) ++hits;
  return static_cast<double>(hits) / static_cast<double>(rts.size());
}

namespace {

struct ChatSides {
  std::vector<std::int64_t> ego;
  std::vector<std::int64_t> alter;
};

std::map<std::pair<std::string, std::string>, ChatSides> split_sides(
    const std::vector<ResponseRecord>& records) {
  std::map<std::pair<std::string, std::string>, ChatSides> by_chat;
  for (const auto& r : records) {
    auto& sides = by_chat[{r.donation_id, r.chat_id}];
    (r.is_ego ? sides.ego : sides.alter).push_back(r.rt_min);
  }
  return by_chat;
}

} // namespace

std::vector<ChatRpPair> chat_rp_pairs(const std::vector<ResponseRecord>& records,
                                      std::int64_t threshold_min, ChatRpReport& report) {
  std::vector<ChatRpPair> out;
  for (const auto& [key, sides] : split_sides(records)) {
    if (sides.ego.empty() || sides.alter.empty()) {
      ++report.chats_excluded_side_missing;
      continue;
    }
    ChatRpPair pair;
    pair.donor_id = key.first;
    pair.chat_id = key.second;
    pair.rp_ego = rp_within(sides.ego, threshold_min);
    pair.rp_alter = rp_within(sides.alter, threshold_min);
    pair.n_ego = static_cast<std::int64_t>(sides.ego.size());
    pair.n_alter = static_cast<std::int64_t>(sides.alter.size());
    out.push_back(std::move(pair));
  }
  return out;
}

std::vector<ChatSimilarity> chat_similarities(const std::vector<ResponseRecord>& records,
                                              ChatRpReport& report) {
  std::vector<ChatSimilarity> out;
  for (const auto& [key, sides] : split_sides(records)) {
    if (sides.ego.empty() || sides.alter.empty()) {
      ++report.chats_excluded_side_missing;
      continue;
    }
    ChatSimilarity cs;
    cs.donation_id = key.first;
    cs.chat_id = key.second;
    cs.sim = similarity(bin_rts(sides.ego), bin_rts(sides.alter));
    cs.n_ego = static_cast<std::int64_t>(sides.ego.size());
    cs.n_alter = static_cast<std::int64_t>(sides.alter.size());
    out.push_back(std::move(cs));
  }
  return out;
}

EcdfSummary pooled_ecdf(std::span<const std::int64_t> rts) {
  EcdfSummary summary;
  summary.n = static_cast<std::int64_t>(rts.size());

  static const std::vector<std::pair<std::string, std::int64_t>> kNamed = {
      {"1min", 1},          {"5min", 5},        {"1h", 60},
      {"24h", 1440},        {"1week", 10080},   {"1month", 43200},
      {"1year", 525600}};

  std::vector<std::int64_t> sorted(rts.begin(), rts.end());
  std::sort(sorted.begin(), sorted.end());

  for (const auto& [label, minutes] : kNamed) {
    double frac = 0.0;
    if (!sorted.empty()) {
      const auto it = std::upper_bound(sorted.begin(), sorted.end(), minutes);
      frac = static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
    }
    summary.thresholds.push_back({label, minutes, frac});
  }

  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    summary.curve.emplace_back(sorted[i],
                               static_cast<double>(j) / static_cast<double>(sorted.size()));
    i = j;
  }
  return summary;
}

} // namespace chatmeta
