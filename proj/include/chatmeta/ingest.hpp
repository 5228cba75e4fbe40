#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "chatmeta/ids.hpp"
#include "chatmeta/types.hpp"

namespace chatmeta {

struct IngestConfig {
  // Content strings that mark a redacted media message in WhatsApp exports.
  // Compared against the trimmed message body; configurable because the
  // placeholder text is locale-dependent.
  std::vector<std::string> media_placeholders = {
      "<Media omitted>",       "<Medien ausgeschlossen>", "image omitted",
      "video omitted",         "audio omitted",           "sticker omitted",
      "document omitted",      "GIF omitted",
  };
};

struct ParseReport {
  std::int64_t records_parsed = 0;
  std::int64_t lines_skipped = 0;   // whatsapp lines matching no grammar rule
  std::int64_t entries_skipped = 0; // instagram entries missing required fields
  std::int64_t files_read = 0;

  void merge(const ParseReport& o) {
    records_parsed += o.records_parsed;
    lines_skipped += o.lines_skipped;
    entries_skipped += o.entries_skipped;
    files_read += o.files_read;
  }
};

// Parses one WhatsApp chat export (one file = one chat). Accepted line shapes:
//
//   DD.MM.YY, HH:MM - Sender: text          (Android)
//   [DD.MM.YY, HH:MM:SS] Sender: text       (iOS; seconds truncated)
//
// A timestamped line without a "Sender: " prefix is a platform notice and is
// attributed to a reserved system pseudo-sender so that later cleaning can
// prune it by the least-contributor rule. Lines without a timestamp prefix
// continue the previous message and only add to its word count. Lines that
// match no rule are skipped and counted in the report. Throws EmptyExport
// when no record results.
std::vector<MessageRecord> parse_whatsapp_export(std::istream& in,
                                                 const std::string& donation_id,
                                                 const std::string& chat_label,
                                                 IdAllocator& sender_ids,
                                                 IdAllocator& chat_ids,
                                                 const IngestConfig& cfg,
                                                 ParseReport& report);

struct InstagramParseResult {
  std::vector<MessageRecord> records;
  std::string donor_sender_id; // from profile.json when present, else most-present sender
};

// Parses an Instagram export archive rooted at `root`. Expects
// messages/inbox/<chat>/message_*.json files; each entry carries
// sender_name, timestamp_ms and one of: content (text), audio_files
// (list with duration_seconds), or another media attachment list.
// Audio length survives as seconds, everything else is reduced to a
// word count or a media flag. Malformed entries are skipped and counted.
InstagramParseResult parse_instagram_export(const std::filesystem::path& root,
                                            const std::string& donation_id,
                                            IdAllocator& sender_ids,
                                            IdAllocator& chat_ids,
                                            const IngestConfig& cfg,
                                            ParseReport& report);

// Parses a whole corpus directory: every subdirectory of `input_dir` is one
// donation (the directory name becomes the donation id). WhatsApp donations
// hold one .txt per chat; Instagram donations are export archives.
// Donations come out normalized, with donor/ego resolved.
Corpus ingest_directory(const std::filesystem::path& input_dir, Source source,
                        const IngestConfig& cfg, ParseReport& report);

// Donor resolution used for WhatsApp (and as Instagram fallback): the sender
// present in the most chats; ties broken by message count, then by first
// appearance.
std::string detect_donor_sender(const std::vector<MessageRecord>& records);

int count_words(std::string_view text);

} // namespace chatmeta
