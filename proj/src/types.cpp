#include "chatmeta/types.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "chatmeta/error.hpp"

namespace chatmeta {

std::string_view source_name(Source s) {
  return s == Source::whatsapp ? "whatsapp" : "instagram";
}

Source source_from_name(std::string_view name) {
  if (name == "whatsapp") return Source::whatsapp;
  if (name == "instagram") return Source::instagram;
  throw Error(Errc::invalid_config, "unknown source '" + std::string(name) + "'");
}

std::int64_t minutes_from_civil(int year, unsigned month, unsigned day,
                                unsigned hour, unsigned minute) {
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                           std::chrono::day{day}};
  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  return days * 1440 + static_cast<std::int64_t>(hour) * 60 + minute;
}

void civil_from_minutes(std::int64_t ts_min, int& year, unsigned& month, unsigned& day,
                        unsigned& hour, unsigned& minute) {
  using namespace std::chrono;
  std::int64_t days = ts_min / 1440;
  std::int64_t rem = ts_min % 1440;
  if (rem < 0) {
    rem += 1440;
    days -= 1;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  year = static_cast<int>(ymd.year());
  month = static_cast<unsigned>(ymd.month());
  day = static_cast<unsigned>(ymd.day());
  hour = static_cast<unsigned>(rem / 60);
  minute = static_cast<unsigned>(rem % 60);
}

MonthKey month_key_of(std::int64_t ts_min) {
  int y;
  unsigned mo, d, h, mi;
  civil_from_minutes(ts_min, y, mo, d, h, mi);
  return MonthKey{y, static_cast<int>(mo)};
}

std::string month_key_str(MonthKey k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", k.year, k.month);
  return buf;
}

Fingerprint Donation::fingerprint() const {
  Fingerprint fp;
  fp.message_count = static_cast<std::int64_t>(records.size());
  if (records.empty()) return fp;
  fp.earliest_min = records.front().timestamp_min;
  fp.latest_min = records.front().timestamp_min;
  for (const auto& r : records) {
    fp.earliest_min = std::min(fp.earliest_min, r.timestamp_min);
    fp.latest_min = std::max(fp.latest_min, r.timestamp_min);
  }
  return fp;
}

void Donation::normalize() {
  std::stable_sort(records.begin(), records.end(),
                   [](const MessageRecord& a, const MessageRecord& b) {
                     if (a.chat_id != b.chat_id) return a.chat_id < b.chat_id;
                     return a.timestamp_min < b.timestamp_min;
                   });
}

} // namespace chatmeta
