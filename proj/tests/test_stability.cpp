#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "chatmeta/error.hpp"
#include "chatmeta/reports.hpp"
#include "chatmeta/stability.hpp"

using namespace chatmeta;

namespace {

ResponseRecord response(const std::string& chat, bool ego, std::int64_t rt,
                        std::int64_t first_ts) {
  ResponseRecord r;
  r.donation_id = "d";
  r.chat_id = chat;
  r.is_ego = ego;
  r.rt_min = rt;
  r.block_first_ts = first_ts;
  r.block_last_ts = first_ts;
  r.month_key = month_key_of(first_ts);
  return r;
}

// one chat-month with n records per side; rts drawn offset by a shift so two
// months can be made more or less similar
std::vector<ResponseRecord> month_records(const std::string& chat, int year, int month,
                                          int n_ego, int n_alter, std::uint64_t seed,
                                          int alter_shift = 0) {
  std::mt19937_64 rng(seed);
  const std::int64_t base = minutes_from_civil(year, static_cast<unsigned>(month), 2, 8, 0);
  std::vector<ResponseRecord> out;
  for (int i = 0; i < n_ego; ++i)
    out.push_back(response(chat, true, 1 + static_cast<std::int64_t>(rng() % 8), base + i));
  for (int i = 0; i < n_alter; ++i)
    out.push_back(response(chat, false,
                           1 + alter_shift + static_cast<std::int64_t>(rng() % 8),
                           base + 1000 + i));
  return out;
}

void append(std::vector<ResponseRecord>& dst, const std::vector<ResponseRecord>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

} // namespace

TEST_CASE("mad worked examples") {
  CHECK(mad(std::vector<double>{0.8, 0.82, 0.78, 0.9, 0.8}) == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(mad(std::vector<double>{0.7, 0.7, 0.7}) == 0.0);
  CHECK(mad(std::vector<double>{0.5, 1.0}) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(mad(std::vector<double>{}), Error);
}

TEST_CASE("mad is translation and permutation invariant") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> xs;
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) xs.push_back(unif(rng));

    const double base = mad(xs);
    std::vector<double> shifted = xs;
    for (auto& x : shifted) x += 123.456;
    CHECK(mad(shifted) == doctest::Approx(base).epsilon(1e-12));

    std::vector<double> shuffled = xs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(mad(shuffled) == base);
  }
}

TEST_CASE("monthly similarity applies the strict per-side threshold") {
  std::vector<ResponseRecord> records;
  append(records, month_records("c", 2023, 1, 70, 70, 1));
  append(records, month_records("c", 2023, 2, 69, 200, 2)); // ego below threshold
  append(records, month_records("c", 2023, 3, 100, 70, 3));

  const auto series = monthly_similarity(records, StabilityConfig{.min_per_side = 70});
  REQUIRE(series.entries.size() == 2);
  CHECK(series.entries[0].month == MonthKey{2023, 1});
  CHECK(series.entries[1].month == MonthKey{2023, 3});
  CHECK_FALSE(series.qualifying); // needs 5 months
}

TEST_CASE("monthly similarity marks qualifying series and sorts by month") {
  std::vector<ResponseRecord> records;
  for (int m = 5; m >= 1; --m) append(records, month_records("c", 2023, m, 80, 80, 10 + m));
  const auto series = monthly_similarity(records, StabilityConfig{});
  REQUIRE(series.entries.size() == 5);
  CHECK(series.qualifying);
  for (std::size_t i = 1; i < series.entries.size(); ++i)
    CHECK(series.entries[i - 1].month < series.entries[i].month);
  for (const auto& e : series.entries) CHECK(e.sim > 0.8); // same generator both sides
}

TEST_CASE("a planted distribution shift dips the similarity series") {
  std::vector<ResponseRecord> records;
  for (int m = 1; m <= 4; ++m) append(records, month_records("c", 2023, m, 90, 90, m));
  append(records, month_records("c", 2023, 5, 90, 90, 5, /*alter_shift=*/40));
  const auto series = monthly_similarity(records, StabilityConfig{});
  REQUIRE(series.entries.size() == 5);
  CHECK(series.entries[4].sim < series.entries[3].sim - 0.3);
}

TEST_CASE("raw-message counting mode uses block message counts") {
  // 50 responses per side, each merging 2 raw messages: raw mode sees 100
  std::vector<ResponseRecord> records;
  auto base = month_records("c", 2023, 1, 50, 50, 42);
  for (auto& r : base) r.block_message_count = 2;
  append(records, base);

  StabilityConfig merged;
  merged.min_per_side = 70;
  CHECK(monthly_similarity(records, merged).entries.empty());

  StabilityConfig raw;
  raw.min_per_side = 70;
  raw.count_raw_messages = true;
  CHECK(monthly_similarity(records, raw).entries.size() == 1);
}

TEST_CASE("calibration: full-size samples give zero SD") {
  std::vector<ResponseRecord> records;
  append(records, month_records("c", 2023, 1, 220, 220, 77));
  CalibrationConfig cfg;
  cfg.sample_sizes = {220};
  cfg.repetitions = 10;
  const auto table = calibrate_threshold(records, cfg);
  REQUIRE(table.sample_sizes.size() == 1);
  CHECK(table.sd_of_differences[0] == 0.0);
  CHECK(table.n_month_chats == 1);
}

TEST_CASE("calibration SD shrinks with sample size; same seed reproduces bytes") {
  std::vector<ResponseRecord> records;
  for (int c = 0; c < 3; ++c)
    for (int m = 1; m <= 3; ++m)
      append(records, month_records("chat" + std::to_string(c), 2023, m, 260, 260,
                                    100 + 10 * c + m));

  CalibrationConfig cfg;
  cfg.sample_sizes = {20, 70, 150};
  cfg.repetitions = 120;
  cfg.seed = 1;
  const auto table = calibrate_threshold(records, cfg);
  REQUIRE(table.sample_sizes.size() == 3);
  CHECK(table.sd_of_differences[0] > table.sd_of_differences[2]);
  CHECK(table.sd_of_differences[1] < table.sd_of_differences[0] / 2.0 + 1e-9);

  const auto again = calibrate_threshold(records, cfg);
  std::ostringstream a, b;
  write_calibration(a, table);
  write_calibration(b, again);
  CHECK(a.str() == b.str());

  CalibrationConfig other = cfg;
  other.seed = 2;
  const auto different = calibrate_threshold(records, other);
  bool any_diff = false;
  for (std::size_t i = 0; i < 3; ++i)
    if (different.sd_of_differences[i] != table.sd_of_differences[i]) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("calibration with reps=1 is still defined") {
  std::vector<ResponseRecord> records;
  append(records, month_records("c", 2023, 1, 250, 250, 9));
  CalibrationConfig cfg;
  cfg.sample_sizes = {20};
  cfg.repetitions = 1;
  const auto table = calibrate_threshold(records, cfg);
  CHECK(table.repetitions == 1);
  CHECK(std::isfinite(table.sd_of_differences[0]));
}

TEST_CASE("calibration without qualifying months throws") {
  std::vector<ResponseRecord> records;
  append(records, month_records("c", 2023, 1, 50, 50, 3));
  CHECK_THROWS_AS(calibrate_threshold(records, CalibrationConfig{}), Error);
}

TEST_CASE("noise band reads the calibrated SD") {
  CalibrationTable table;
  table.sample_sizes = {20, 70};
  table.sd_of_differences = {0.08, 0.03};
  CHECK(noise_band_95(table, 70) == doctest::Approx(1.96 * 0.03));
  CHECK_THROWS_AS(noise_band_95(table, 35), Error);
}

TEST_CASE("mad histogram bins qualifying chats; empty input stays empty") {
  std::vector<MonthlySimilaritySeries> series;
  const auto hist_empty = mad_histogram(series);
  std::int64_t total = hist_empty.overflow;
  for (const auto c : hist_empty.counts) total += c;
  CHECK(total == 0);

  MonthlySimilaritySeries s;
  s.donation_id = "d";
  s.chat_id = "c";
  s.qualifying = true;
  for (int m = 1; m <= 5; ++m)
    s.entries.push_back({MonthKey{2023, m}, 0.8 + 0.004 * m, 80, 80});
  series.push_back(s);

  MonthlySimilaritySeries skipped; // not qualifying: must not be binned
  skipped.qualifying = false;
  skipped.entries = s.entries;
  series.push_back(skipped);

  const auto hist = mad_histogram(series);
  std::int64_t count = hist.overflow;
  for (const auto c : hist.counts) count += c;
  CHECK(count == 1);
  REQUIRE(hist.per_chat.size() == 1);
  CHECK(hist.per_chat[0].second == doctest::Approx(0.004).epsilon(1e-9));
}
