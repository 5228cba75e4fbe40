#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chatmeta/timing.hpp"
#include "chatmeta/types.hpp"

namespace chatmeta {

// Response-time bins in minutes: 1, 2, 3-5, 6-15, 16-30, 31-60, >60.
inline constexpr int kRtBinCount = 7;
inline constexpr std::array<std::int64_t, kRtBinCount - 1> kRtBinUpper = {1, 2, 5, 15, 30, 60};
extern const std::array<std::string_view, kRtBinCount> kRtBinLabels;

int rt_bin_index(std::int64_t rt_min);

struct RtDistribution {
  std::array<double, kRtBinCount> bins{}; // fractions, sum to 1
  std::int64_t n = 0;
};

// Throws EmptySample on an empty input; all rts must be >= 1.
RtDistribution bin_rts(std::span<const std::int64_t> rts);

// Similarity between two binned distributions: 1 minus the Jensen-Shannon
// distance with base-2 logarithms. 1 for identical distributions, exactly 0
// for disjoint support, always within [0, 1].
double similarity(const RtDistribution& p, const RtDistribution& q);

// Fraction of response times at or below the threshold. Throws EmptySample.
double rp_within(std::span<const std::int64_t> rts, std::int64_t threshold_min = 5);

struct ChatRpPair {
  std::string chat_id;
  std::string donor_id; // donation id: the grouping unit of the mixed model
  double rp_ego = 0;
  double rp_alter = 0;
  std::int64_t n_ego = 0;
  std::int64_t n_alter = 0;
};

struct ChatRpReport {
  std::int64_t chats_excluded_side_missing = 0;
};

// One (ego RP, alter RP) pair per chat. Chats where one side never responds
// are excluded and counted.
std::vector<ChatRpPair> chat_rp_pairs(const std::vector<ResponseRecord>& records,
                                      std::int64_t threshold_min, ChatRpReport& report);

// Per-chat similarity between the ego and alter RT distributions.
struct ChatSimilarity {
  std::string donation_id;
  std::string chat_id;
  double sim = 0;
  std::int64_t n_ego = 0;
  std::int64_t n_alter = 0;
};

std::vector<ChatSimilarity> chat_similarities(const std::vector<ResponseRecord>& records,
                                              ChatRpReport& report);

// Named ECDF thresholds: 1min, 5min, 1h, 24h, 1 week, 1 month (30d), 1 year (365d).
struct EcdfSummary {
  struct Threshold {
    std::string label;
    std::int64_t minutes;
    double fraction; // P(rt <= minutes)
  };
  std::vector<Threshold> thresholds;
  // full ECDF: (distinct rt, cumulative fraction), ascending
  std::vector<std::pair<std::int64_t, double>> curve;
  std::int64_t n = 0;
};

EcdfSummary pooled_ecdf(std::span<const std::int64_t> rts);

} // namespace chatmeta
