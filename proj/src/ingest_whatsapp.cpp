#include <cctype>
#include <chrono>
#include <istream>
#include <string>
#include <string_view>

#include "chatmeta/error.hpp"
#include "chatmeta/ingest.hpp"

namespace chatmeta {

namespace {

// Reserved raw label for platform notices ("encryption enabled", number
// changes, ...). Contains a control byte so it can never collide with a
// real sender name; downstream it is just one more minor sender that the
// least-contributor cleanup removes from group-looking chats.
constexpr std::string_view kSystemRawLabel = "\x1f(system)\x1f";

void strip_direction_marks(std::string& s) {
  // U+200E / U+200F as UTF-8: E2 80 8E / E2 80 8F.
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
        static_cast<unsigned char>(s[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(s[i + 2]) == 0x8E ||
         static_cast<unsigned char>(s[i + 2]) == 0x8F)) {
      i += 3;
      continue;
    }
    out.push_back(s[i]);
    ++i;
  }
  s = std::move(out);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct Cursor {
  std::string_view s;
  std::size_t pos = 0;

  bool eat(char c) {
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  bool eat(std::string_view lit) {
    if (s.substr(pos, lit.size()) == lit) {
      pos += lit.size();
      return true;
    }
    return false;
  }

  // Reads 1..max_digits decimal digits; returns -1 when none present.
  int number(int max_digits) {
    int v = 0, n = 0;
    while (n < max_digits && pos < s.size() &&
           std::isdigit(static_cast<unsigned char>(s[pos]))) {
      v = v * 10 + (s[pos] - '0');
      ++pos;
      ++n;
    }
    return n == 0 ? -1 : v;
  }
};

enum class PrefixShape { none, matched, malformed };

struct TsPrefix {
  std::int64_t ts_min = 0;
  std::size_t rest_pos = 0; // offset of "Sender: text" within the line
};

// Tries "DD.MM.YY[, ]HH:MM - " (Android) and "[DD.MM.YY, HH:MM:SS] " (iOS).
// `none` means the line does not even have the delimiter structure and is a
// continuation candidate; `malformed` means the structure is there but the
// field values are invalid.
PrefixShape parse_ts_prefix(std::string_view line, TsPrefix& out) {
  Cursor c{line};
  const bool ios = c.eat('[');
  const int day = c.number(2);
  if (day < 0 || !c.eat('.')) return PrefixShape::none;
  const int month = c.number(2);
  if (month < 0 || !c.eat('.')) return PrefixShape::none;
  int year = c.number(4);
  if (year < 0 || !c.eat(", ")) return PrefixShape::none;
  const int hour = c.number(2);
  if (hour < 0 || !c.eat(':')) return PrefixShape::none;
  const int minute = c.number(2);
  if (minute < 0) return PrefixShape::none;
  int second = 0;
  if (ios) {
    if (!c.eat(':')) return PrefixShape::none;
    second = c.number(2);
    if (second < 0 || !c.eat("] ")) return PrefixShape::none;
  } else {
    if (!c.eat(" - ")) return PrefixShape::none;
  }

  if (year < 100) year += 2000;
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 ||
      second > 59)
    return PrefixShape::malformed;
  // Reject impossible dates like 31.02.
  {
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{year},
                             std::chrono::month{static_cast<unsigned>(month)},
                             std::chrono::day{static_cast<unsigned>(day)}};
    if (!ymd.ok()) return PrefixShape::malformed;
  }

  out.ts_min = minutes_from_civil(year, static_cast<unsigned>(month),
                                  static_cast<unsigned>(day), static_cast<unsigned>(hour),
                                  static_cast<unsigned>(minute));
  out.rest_pos = c.pos;
  return PrefixShape::matched;
}

bool is_media_placeholder(std::string_view content, const IngestConfig& cfg) {
  const std::string_view t = trim(content);
  for (const auto& p : cfg.media_placeholders)
    if (t == p) return true;
  return false;
}

} // namespace

int count_words(std::string_view text) {
  int n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool ws = std::isspace(c) != 0;
    if (!ws && !in_word) ++n;
    in_word = !ws;
  }
  return n;
}

std::vector<MessageRecord> parse_whatsapp_export(std::istream& in,
                                                 const std::string& donation_id,
                                                 const std::string& chat_label,
                                                 IdAllocator& sender_ids,
                                                 IdAllocator& chat_ids,
                                                 const IngestConfig& cfg,
                                                 ParseReport& report) {
  std::vector<MessageRecord> records;
  const std::string chat_id = chat_ids.id_for(chat_label);

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    strip_direction_marks(line);

    TsPrefix prefix;
    const PrefixShape shape = parse_ts_prefix(line, prefix);
    if (shape == PrefixShape::malformed) {
      ++report.lines_skipped;
      continue;
    }
    if (shape == PrefixShape::none) {
      // Continuation of the previous message; only its word count survives.
      if (records.empty()) {
        ++report.lines_skipped;
      } else {
        records.back().word_count += count_words(line);
      }
      continue;
    }

    const std::string_view rest = std::string_view(line).substr(prefix.rest_pos);
    std::string_view sender_label;
    std::string_view content;
    if (const auto colon = rest.find(": "); colon != std::string_view::npos) {
      sender_label = rest.substr(0, colon);
      content = rest.substr(colon + 2);
    } else {
      sender_label = kSystemRawLabel;
      content = rest;
    }
    if (sender_label.empty()) {
      ++report.lines_skipped;
      continue;
    }

    MessageRecord rec;
    rec.donation_id = donation_id;
    rec.chat_id = chat_id;
    rec.sender_id = sender_ids.id_for(sender_label);
    rec.timestamp_min = prefix.ts_min;
    rec.source = Source::whatsapp;
    if (is_media_placeholder(content, cfg)) {
      rec.is_media = true;
      rec.word_count = 0;
    } else {
      rec.word_count = count_words(content);
    }
    records.push_back(std::move(rec));
    ++report.records_parsed;
  }

  if (records.empty())
    throw Error(Errc::empty_export, "no messages parsed from chat '" + chat_id + "'");
  return records;
}

} // namespace chatmeta
