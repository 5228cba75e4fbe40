#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "chatmeta/metrics.hpp"
#include "chatmeta/timing.hpp"

namespace chatmeta {

struct StabilityConfig {
  int min_per_side = 70;   // responses per side per month
  int min_months = 5;      // months needed for a qualifying series
  // Count merged response records per side (the unit entering the binned
  // distributions). The raw switch counts the underlying messages instead.
  bool count_raw_messages = false;
};

struct MonthlyEntry {
  MonthKey month;
  double sim = 0;
  std::int64_t n_ego = 0;
  std::int64_t n_alter = 0;
};

struct MonthlySimilaritySeries {
  std::string donation_id;
  std::string chat_id;
  std::vector<MonthlyEntry> entries; // sorted by month
  bool qualifying = false;           // >= min_months surviving months
};

// Similarity per UTC calendar month for one chat's response records. Months
// where either side falls below min_per_side are omitted.
MonthlySimilaritySeries monthly_similarity(const std::vector<ResponseRecord>& chat_records,
                                           const StabilityConfig& cfg = {});

// All chats of a corpus at once, keyed (donation, chat), sorted.
std::vector<MonthlySimilaritySeries> monthly_similarity_all(
    const std::vector<ResponseRecord>& records, const StabilityConfig& cfg = {});

// Median absolute deviation from the median; medians of even-length lists
// average the two central order statistics. Throws EmptySeries.
double mad(std::span<const double> values);

struct CalibrationConfig {
  int min_full = 200; // responses per side for a month-chat to calibrate on
  std::vector<int> sample_sizes = {20, 26, 35, 50, 70, 100, 150};
  int repetitions = 400;
  std::uint64_t seed = 0;
};

struct CalibrationTable {
  std::vector<int> sample_sizes;
  std::vector<double> sd_of_differences; // parallel to sample_sizes
  int n_month_chats = 0;
  int repetitions = 0;
};

// Appendix-style subsampling calibration: for every month-chat with at least
// min_full responses on each side, draw n per side without replacement,
// compare the subsampled similarity to the full-sample one, and report the
// SD of the differences per n. Each (chat, month, n, rep) task derives its
// own seed, so results do not depend on evaluation order.
CalibrationTable calibrate_threshold(const std::vector<ResponseRecord>& records,
                                     const CalibrationConfig& cfg);

// 95% band for sampling noise at a given subsample size: 1.96 * SD(n).
double noise_band_95(const CalibrationTable& table, int sample_size);

struct MadHistogram {
  double bin_width = 0.005;
  double range_max = 0.1;
  std::vector<std::int64_t> counts; // 20 bins over [0, 0.1)
  std::int64_t overflow = 0;        // MAD >= range_max
  std::vector<std::pair<std::string, double>> per_chat; // (donation/chat, mad)
};

// MAD of each qualifying chat's monthly similarity series, binned.
MadHistogram mad_histogram(std::span<const MonthlySimilaritySeries> series);

} // namespace chatmeta
