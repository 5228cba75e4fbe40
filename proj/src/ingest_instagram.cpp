#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "chatmeta/error.hpp"
#include "chatmeta/ingest.hpp"

namespace chatmeta {

namespace {

using nlohmann::json;

std::vector<std::filesystem::path> sorted_entries(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

bool has_attachments(const json& entry, const char* key) {
  const auto it = entry.find(key);
  return it != entry.end() && it->is_array() && !it->empty();
}

// One message entry -> one record, or nullopt when the entry lacks the
// required fields / has the wrong types.
std::optional<MessageRecord> convert_entry(const json& entry, const std::string& donation_id,
                                           const std::string& chat_id,
                                           IdAllocator& sender_ids) {
  const auto sender_it = entry.find("sender_name");
  const auto ts_it = entry.find("timestamp_ms");
  if (sender_it == entry.end() || !sender_it->is_string() || sender_it->get_ref<const std::string&>().empty())
    return std::nullopt;
  if (ts_it == entry.end() || !ts_it->is_number_integer() || ts_it->get<std::int64_t>() < 0)
    return std::nullopt;

  MessageRecord rec;
  rec.donation_id = donation_id;
  rec.chat_id = chat_id;
  rec.sender_id = sender_ids.id_for(sender_it->get_ref<const std::string&>());
  rec.timestamp_min = ts_it->get<std::int64_t>() / 60000; // ms -> whole minutes
  rec.source = Source::instagram;

  if (has_attachments(entry, "audio_files")) {
    std::int64_t seconds = 0;
    for (const auto& a : entry.at("audio_files")) {
      const auto d = a.find("duration_seconds");
      if (d == a.end() || !d->is_number_integer() || d->get<std::int64_t>() < 0)
        return std::nullopt;
      seconds += d->get<std::int64_t>();
    }
    rec.audio_seconds = static_cast<std::int32_t>(seconds);
    rec.word_count = 0;
  } else if (has_attachments(entry, "photos") || has_attachments(entry, "videos") ||
             has_attachments(entry, "share") || has_attachments(entry, "sticker")) {
    rec.is_media = true;
    rec.word_count = 0;
  } else if (const auto c = entry.find("content"); c != entry.end() && c->is_string()) {
    rec.word_count = count_words(c->get_ref<const std::string&>());
  } else {
    return std::nullopt;
  }
  return rec;
}

} // namespace

InstagramParseResult parse_instagram_export(const std::filesystem::path& root,
                                            const std::string& donation_id,
                                            IdAllocator& sender_ids,
                                            IdAllocator& chat_ids,
                                            const IngestConfig& cfg,
                                            ParseReport& report) {
  (void)cfg;
  InstagramParseResult result;

  std::filesystem::path inbox = root / "messages" / "inbox";
  if (!std::filesystem::is_directory(inbox)) inbox = root / "inbox";
  if (!std::filesystem::is_directory(inbox))
    throw Error(Errc::missing_message_file,
                "no messages/inbox directory under " + root.string());

  for (const auto& chat_dir : sorted_entries(inbox)) {
    if (!std::filesystem::is_directory(chat_dir)) continue;
    const std::string chat_id = chat_ids.id_for(chat_dir.filename().string());

    std::vector<std::filesystem::path> message_files;
    for (const auto& p : sorted_entries(chat_dir)) {
      const std::string name = p.filename().string();
      if (name.rfind("message_", 0) == 0 && p.extension() == ".json")
        message_files.push_back(p);
    }
    if (message_files.empty())
      throw Error(Errc::missing_message_file,
                  "chat folder without message files: " + chat_dir.string());

    for (const auto& file : message_files) {
      std::ifstream in(file);
      if (!in) throw Error(Errc::io_error, "cannot open " + file.string());
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw Error(Errc::malformed_entry, file.string() + ": " + e.what());
      }
      ++report.files_read;

      const auto msgs = doc.find("messages");
      if (msgs == doc.end() || !msgs->is_array())
        throw Error(Errc::malformed_entry, file.string() + ": no messages array");
      for (const auto& entry : *msgs) {
        auto rec = convert_entry(entry, donation_id, chat_id, sender_ids);
        if (!rec) {
          ++report.entries_skipped;
          continue;
        }
        result.records.push_back(std::move(*rec));
        ++report.records_parsed;
      }
    }
  }

  // The profile file names the account owner; people rename accounts, so this
  // is a hint that the donor-correction pass may later override.
  const std::filesystem::path profile = root / "profile.json";
  if (std::filesystem::is_regular_file(profile)) {
    std::ifstream in(profile);
    try {
      const json doc = json::parse(in);
      const auto name = doc.find("name");
      if (name != doc.end() && name->is_string() && !name->get_ref<const std::string&>().empty())
        result.donor_sender_id = sender_ids.id_for(name->get_ref<const std::string&>());
    } catch (const json::exception&) {
      // unusable profile: fall through to the most-present heuristic
    }
  }
  if (result.donor_sender_id.empty())
    result.donor_sender_id = detect_donor_sender(result.records);
  return result;
}

} // namespace chatmeta
