#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace chatmeta {

enum class Source { whatsapp, instagram };

std::string_view source_name(Source s);
Source source_from_name(std::string_view name);

// Calendar helpers. All timestamps in this project are integer minutes
// since the Unix epoch, interpreted as UTC.
std::int64_t minutes_from_civil(int year, unsigned month, unsigned day,
                                unsigned hour, unsigned minute);
void civil_from_minutes(std::int64_t ts_min, int& year, unsigned& month, unsigned& day,
                        unsigned& hour, unsigned& minute);

struct MonthKey {
  int year = 0;
  int month = 0; // 1..12

  auto operator<=>(const MonthKey&) const = default;
};

MonthKey month_key_of(std::int64_t ts_min);
std::string month_key_str(MonthKey k); // "YYYY-MM"

// One anonymized message. Carries metadata only: no body text, no names,
// no phone numbers ever enter this struct.
struct MessageRecord {
  std::string donation_id;
  std::string chat_id;
  std::string sender_id;
  std::int64_t timestamp_min = 0;
  std::int32_t word_count = 0;
  std::optional<std::int32_t> audio_seconds; // instagram only
  bool is_media = false;
  Source source = Source::whatsapp;
};

struct Fingerprint {
  std::int64_t earliest_min = 0;
  std::int64_t latest_min = 0;
  std::int64_t message_count = 0;

  auto operator<=>(const Fingerprint&) const = default;

  std::int64_t span_days() const {
    return message_count == 0 ? 0 : (latest_min - earliest_min) / 1440;
  }
};

struct Donation {
  std::string donation_id;
  Source source = Source::whatsapp;
  std::string donor_sender_id; // the ego for every chat of this donation
  std::optional<std::int64_t> donation_date_min;
  std::vector<MessageRecord> records; // sorted by (chat_id, timestamp_min, input order)

  Fingerprint fingerprint() const;

  // Stable-sorts records by (chat_id, timestamp_min); ties keep input order.
  void normalize();
};

struct Corpus {
  std::vector<Donation> donations;
};

// Calls fn(chat_id, span of records) once per chat, in record order.
// Requires donation.normalize() to have run.
template <typename Fn>
void for_each_chat(const Donation& d, Fn&& fn) {
  std::size_t i = 0;
  while (i < d.records.size()) {
    std::size_t j = i;
    while (j < d.records.size() && d.records[j].chat_id == d.records[i].chat_id) ++j;
    fn(d.records[i].chat_id,
       std::span<const MessageRecord>(d.records.data() + i, j - i));
    i = j;
  }
}

} // namespace chatmeta
