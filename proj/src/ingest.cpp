#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "chatmeta/error.hpp"
#include "chatmeta/ingest.hpp"

namespace chatmeta {

namespace {

std::vector<std::filesystem::path> sorted_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

std::string detect_donor_sender(const std::vector<MessageRecord>& records) {
  // chats per sender, then message count, then first appearance.
  std::map<std::string, std::set<std::string>> chats;
  std::map<std::string, std::int64_t> messages;
  std::map<std::string, std::size_t> first_seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    chats[r.sender_id].insert(r.chat_id);
    ++messages[r.sender_id];
    first_seen.emplace(r.sender_id, i);
  }
  std::string best;
  for (const auto& [sender, in_chats] : chats) {
    if (best.empty()) {
      best = sender;
      continue;
    }
    const auto a = in_chats.size(), b = chats[best].size();
    if (a > b ||
        (a == b && (messages[sender] > messages[best] ||
                    (messages[sender] == messages[best] &&
                     first_seen[sender] < first_seen[best]))))
      best = sender;
  }
  return best;
}

Corpus ingest_directory(const std::filesystem::path& input_dir, Source source,
                        const IngestConfig& cfg, ParseReport& report) {
  if (!std::filesystem::is_directory(input_dir))
    throw Error(Errc::empty_corpus, "input directory not found: " + input_dir.string());

  Corpus corpus;
  for (const auto& donation_dir : sorted_dir(input_dir)) {
    if (!std::filesystem::is_directory(donation_dir)) continue;
    const std::string donation_id = donation_dir.filename().string();

    Donation d;
    d.donation_id = donation_id;
    d.source = source;
    IdAllocator sender_ids(donation_id);
    IdAllocator chat_ids("chats|" + donation_id);

    if (source == Source::whatsapp) {
      for (const auto& file : sorted_dir(donation_dir)) {
        if (file.extension() != ".txt") continue;
        std::ifstream in(file);
        if (!in) throw Error(Errc::io_error, "cannot open " + file.string());
        auto recs = parse_whatsapp_export(in, donation_id, file.stem().string(),
                                          sender_ids, chat_ids, cfg, report);
        d.records.insert(d.records.end(), std::make_move_iterator(recs.begin()),
                         std::make_move_iterator(recs.end()));
        ++report.files_read;
      }
      if (d.records.empty())
        throw Error(Errc::empty_export, "donation without chat files: " + donation_id);
      d.donor_sender_id = detect_donor_sender(d.records);
    } else {
      auto result =
          parse_instagram_export(donation_dir, donation_id, sender_ids, chat_ids, cfg, report);
      d.records = std::move(result.records);
      d.donor_sender_id = std::move(result.donor_sender_id);
      if (d.records.empty())
        throw Error(Errc::empty_export, "donation without messages: " + donation_id);
    }

    d.normalize();
    corpus.donations.push_back(std::move(d));
  }

  if (corpus.donations.empty())
    throw Error(Errc::empty_corpus, "no donations under " + input_dir.string());
  return corpus;
}

} // namespace chatmeta
