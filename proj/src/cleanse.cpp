#include "chatmeta/cleanse.hpp"

#include <algorithm>
#include <set>

namespace chatmeta {

void remove_test_donations(Corpus& corpus, const std::vector<TestFingerprint>& fingerprints,
                           CleanReport& report) {
  if (fingerprints.empty()) return;
  std::erase_if(corpus.donations, [&](const Donation& d) {
    const Fingerprint fp = d.fingerprint();
    const TestFingerprint key{fp.span_days(), fp.message_count};
    const bool hit = std::find(fingerprints.begin(), fingerprints.end(), key) !=
                     fingerprints.end();
    if (hit) ++report.donations_removed_test;
    return hit;
  });
}

void remove_duplicate_donations(Corpus& corpus, CleanReport& report) {
  std::set<Fingerprint> seen;
  std::erase_if(corpus.donations, [&](const Donation& d) {
    const bool dup = !seen.insert(d.fingerprint()).second;
    if (dup) ++report.donations_removed_duplicate;
    return dup;
  });
}

void drop_future_messages(Donation& donation, std::int64_t donation_date_min,
                          CleanReport& report) {
  const auto before = donation.records.size();
  std::erase_if(donation.records,
                [&](const MessageRecord& r) { return r.timestamp_min > donation_date_min; });
  report.messages_removed_future +=
      static_cast<std::int64_t>(before - donation.records.size());
}

namespace {

struct SenderCount {
  std::string sender_id;
  std::int64_t count = 0;
};

} // namespace

void prune_system_senders(Donation& donation, int cutoff, CleanReport& report) {
  // Collect chat ids first; records mutate while we prune.
  std::vector<std::string> chat_ids;
  for_each_chat(donation, [&](const std::string& chat_id, std::span<const MessageRecord>) {
    chat_ids.push_back(chat_id);
  });

  for (const auto& chat_id : chat_ids) {
    for (;;) {
      std::vector<MessageRecord*> chat;
      for (auto& r : donation.records)
        if (r.chat_id == chat_id) chat.push_back(&r);

      std::map<std::string, std::int64_t> counts;
      for (const auto* r : chat) ++counts[r->sender_id];
      if (counts.size() <= 2) break;

      std::vector<SenderCount> senders;
      for (const auto& [id, n] : counts) senders.push_back({id, n});
      std::sort(senders.begin(), senders.end(), [](const SenderCount& a, const SenderCount& b) {
        if (a.count != b.count) return a.count < b.count;
        return a.sender_id < b.sender_id;
      });
      if (senders.front().count >= cutoff) break;

      const std::string victim = senders.front().sender_id;
      std::erase_if(donation.records, [&](const MessageRecord& r) {
        return r.chat_id == chat_id && r.sender_id == victim;
      });
      ++report.senders_pruned_as_system[{donation.donation_id, chat_id}];
    }
  }
}

void fix_instagram_donor(Donation& donation, CleanReport& report) {
  if (donation.source != Source::instagram) return;

  std::map<std::string, std::set<std::string>> chats_of;
  for (const auto& r : donation.records) chats_of[r.sender_id].insert(r.chat_id);

  const std::size_t current = chats_of.count(donation.donor_sender_id)
                                  ? chats_of[donation.donor_sender_id].size()
                                  : 0;
  std::string best = donation.donor_sender_id;
  std::size_t best_n = current;
  for (const auto& [sender, chats] : chats_of) {
    if (chats.size() > best_n) { // strictly more chats than the candidate
      best = sender;
      best_n = chats.size();
    }
  }
  if (best != donation.donor_sender_id) {
    donation.donor_sender_id = best;
    ++report.donors_reassigned;
  }
}

CleanReport cleanse_corpus(Corpus& corpus, const CleanseConfig& cfg) {
  CleanReport report;
  remove_test_donations(corpus, cfg.test_fingerprints, report);
  remove_duplicate_donations(corpus, report);
  for (auto& d : corpus.donations) {
    std::int64_t date;
    if (const auto it = cfg.donation_dates.find(d.donation_id); it != cfg.donation_dates.end())
      date = it->second;
    else if (d.donation_date_min)
      date = *d.donation_date_min;
    else
      date = d.fingerprint().latest_min + 1440; // latest + 1 day fallback
    drop_future_messages(d, date, report);
    prune_system_senders(d, cfg.system_sender_cutoff, report);
    fix_instagram_donor(d, report);
  }
  return report;
}

} // namespace chatmeta
