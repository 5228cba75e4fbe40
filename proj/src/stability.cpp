#include "chatmeta/stability.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "chatmeta/error.hpp"

namespace chatmeta {

namespace {

double median_sorted(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct MonthSides {
  std::vector<std::int64_t> ego, alter;
  std::int64_t raw_ego = 0, raw_alter = 0;
};

std::map<MonthKey, MonthSides> split_months(const std::vector<ResponseRecord>& records) {
  std::map<MonthKey, MonthSides> by_month;
  for (const auto& r : records) {
    auto& m = by_month[r.month_key];
    if (r.is_ego) {
      m.ego.push_back(r.rt_min);
      m.raw_ego += r.block_message_count;
    } else {
      m.alter.push_back(r.rt_min);
      m.raw_alter += r.block_message_count;
    }
  }
  return by_month;
}

} // namespace

MonthlySimilaritySeries monthly_similarity(const std::vector<ResponseRecord>& chat_records,
                                           const StabilityConfig& cfg) {
  MonthlySimilaritySeries series;
  if (!chat_records.empty()) {
    series.donation_id = chat_records.front().donation_id;
    series.chat_id = chat_records.front().chat_id;
  }

  for (const auto& [month, sides] : split_months(chat_records)) {
    const std::int64_t n_ego = cfg.count_raw_messages
                                   ? sides.raw_ego
                                   : static_cast<std::int64_t>(sides.ego.size());
    const std::int64_t n_alter = cfg.count_raw_messages
                                     ? sides.raw_alter
                                     : static_cast<std::int64_t>(sides.alter.size());
    if (n_ego < cfg.min_per_side || n_alter < cfg.min_per_side) continue;
    MonthlyEntry e;
    e.month = month;
    e.sim = similarity(bin_rts(sides.ego), bin_rts(sides.alter));
    e.n_ego = static_cast<std::int64_t>(sides.ego.size());
    e.n_alter = static_cast<std::int64_t>(sides.alter.size());
    series.entries.push_back(e);
  }
  series.qualifying = series.entries.size() >= static_cast<std::size_t>(cfg.min_months);
  return series;
}

std::vector<MonthlySimilaritySeries> monthly_similarity_all(
    const std::vector<ResponseRecord>& records, const StabilityConfig& cfg) {
  std::map<std::pair<std::string, std::string>, std::vector<ResponseRecord>> by_chat;
  for (const auto& r : records) by_chat[{r.donation_id, r.chat_id}].push_back(r);

  std::vector<MonthlySimilaritySeries> out;
  for (const auto& [key, chat_records] : by_chat) {
    auto series = monthly_similarity(chat_records, cfg);
    series.donation_id = key.first;
    series.chat_id = key.second;
    out.push_back(std::move(series));
  }
  return out;
}

double mad(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::empty_series, "mad on empty series");
  std::vector<double> v(values.begin(), values.end());
  const double med = median_sorted(v);
  for (auto& x : v) x = std::abs(x - med);
  return median_sorted(v);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for one (chat, month, size, rep) task: mixing instead of a shared
// stream keeps the table identical however tasks are scheduled.
std::uint64_t task_seed(std::uint64_t seed, const std::string& donation_id,
                        const std::string& chat_id, MonthKey month, int n, int rep) {
  std::uint64_t h = seed;
  for (const unsigned char c : donation_id) h = splitmix64(h ^ c);
  for (const unsigned char c : chat_id) h = splitmix64(h ^ c);
  h = splitmix64(h ^ static_cast<std::uint64_t>(month.year * 12 + month.month));
  h = splitmix64(h ^ static_cast<std::uint64_t>(n));
  h = splitmix64(h ^ static_cast<std::uint64_t>(rep));
  return h;
}

// First n elements of a seeded partial Fisher-Yates shuffle.
std::vector<std::int64_t> sample_without_replacement(const std::vector<std::int64_t>& pool,
                                                     int n, std::mt19937_64& rng) {
  std::vector<std::int64_t> v(pool);
  for (int i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, v.size() - 1);
    std::swap(v[i], v[pick(rng)]);
  }
  v.resize(n);
  return v;
}

} // namespace

CalibrationTable calibrate_threshold(const std::vector<ResponseRecord>& records,
                                     const CalibrationConfig& cfg) {
  struct MonthChat {
    std::string donation_id, chat_id;
    MonthKey month;
    std::vector<std::int64_t> ego, alter;
    double full_sim = 0;
  };

  std::map<std::pair<std::string, std::string>, std::vector<ResponseRecord>> by_chat;
  for (const auto& r : records) by_chat[{r.donation_id, r.chat_id}].push_back(r);

  std::vector<MonthChat> qualifying;
  for (const auto& [key, chat_records] : by_chat) {
    for (auto& [month, sides] : split_months(chat_records)) {
      if (static_cast<int>(sides.ego.size()) < cfg.min_full ||
          static_cast<int>(sides.alter.size()) < cfg.min_full)
        continue;
      MonthChat mc;
      mc.donation_id = key.first;
      mc.chat_id = key.second;
      mc.month = month;
      mc.ego = std::move(sides.ego);
      mc.alter = std::move(sides.alter);
      mc.full_sim = similarity(bin_rts(mc.ego), bin_rts(mc.alter));
      qualifying.push_back(std::move(mc));
    }
  }
  if (qualifying.empty())
    throw Error(Errc::no_qualifying_months,
                "no month-chat reaches " + std::to_string(cfg.min_full) +
                    " responses per side");

  CalibrationTable table;
  table.sample_sizes = cfg.sample_sizes;
  table.n_month_chats = static_cast<int>(qualifying.size());
  table.repetitions = cfg.repetitions;

  for (const int n : cfg.sample_sizes) {
    double sum = 0, sum_sq = 0;
    std::int64_t count = 0;
    for (const auto& mc : qualifying) {
      const int n_ego = std::min<int>(n, static_cast<int>(mc.ego.size()));
      const int n_alter = std::min<int>(n, static_cast<int>(mc.alter.size()));
      for (int rep = 0; rep < cfg.repetitions; ++rep) {
        std::mt19937_64 rng(
            task_seed(cfg.seed, mc.donation_id, mc.chat_id, mc.month, n, rep));
        const auto ego = sample_without_replacement(mc.ego, n_ego, rng);
        const auto alter = sample_without_replacement(mc.alter, n_alter, rng);
        const double diff = similarity(bin_rts(ego), bin_rts(alter)) - mc.full_sim;
        sum += diff;
        sum_sq += diff * diff;
        ++count;
      }
    }
    // population SD so a single difference still yields a defined (zero) value
    const double mean = sum / static_cast<double>(count);
    const double var = sum_sq / static_cast<double>(count) - mean * mean;
    table.sd_of_differences.push_back(std::sqrt(std::max(var, 0.0)));
  }
  return table;
}

double noise_band_95(const CalibrationTable& table, int sample_size) {
  for (std::size_t i = 0; i < table.sample_sizes.size(); ++i)
    if (table.sample_sizes[i] == sample_size) return 1.96 * table.sd_of_differences[i];
  throw Error(Errc::invalid_config,
              "sample size " + std::to_string(sample_size) + " not in calibration table");
}

MadHistogram mad_histogram(std::span<const MonthlySimilaritySeries> series) {
  MadHistogram hist;
  hist.counts.assign(static_cast<std::size_t>(hist.range_max / hist.bin_width + 0.5), 0);
  for (const auto& s : series) {
    if (!s.qualifying) continue;
    std::vector<double> sims;
    sims.reserve(s.entries.size());
    for (const auto& e : s.entries) sims.push_back(e.sim);
    const double m = mad(sims);
    hist.per_chat.emplace_back(s.donation_id + "/" + s.chat_id, m);
    const auto bin = static_cast<std::size_t>(m / hist.bin_width);
    if (bin < hist.counts.size())
      ++hist.counts[bin];
    else
      ++hist.overflow;
  }
  return hist;
}

} // namespace chatmeta
