#include "chatmeta/filterpipe.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "chatmeta/error.hpp"

namespace chatmeta {

void FilterConfig::validate() const {
  if (!(min_share > 0.0 && min_share < 0.5))
    throw Error(Errc::invalid_config, "min_share must be in (0, 0.5)");
  if (min_messages < 1) throw Error(Errc::invalid_config, "min_messages must be >= 1");
  if (min_chats_per_donation < 1)
    throw Error(Errc::invalid_config, "min_chats_per_donation must be >= 1");
}

std::string_view drop_reason_name(DropReason r) {
  switch (r) {
    case DropReason::group_chat: return "group_chat";
    case DropReason::unbalanced: return "unbalanced";
    case DropReason::too_small: return "too_small";
    case DropReason::donation_too_small: return "donation_too_small";
  }
  return "unknown";
}

namespace {

void drop_chat(Donation& d, const std::string& chat_id) {
  std::erase_if(d.records, [&](const MessageRecord& r) { return r.chat_id == chat_id; });
}

} // namespace

FilterAudit filter_corpus(Corpus& corpus, const FilterConfig& cfg) {
  cfg.validate();
  FilterAudit audit;
  audit.donations_in = static_cast<std::int64_t>(corpus.donations.size());

  for (auto& d : corpus.donations) {
    struct ChatStat {
      std::map<std::string, std::int64_t> per_sender;
      std::int64_t total = 0;
    };
    std::map<std::string, ChatStat> stats;
    for (const auto& r : d.records) {
      auto& s = stats[r.chat_id];
      ++s.per_sender[r.sender_id];
      ++s.total;
    }
    audit.chats_in += static_cast<std::int64_t>(stats.size());

    // 1) dyads only
    for (const auto& [chat_id, s] : stats) {
      if (s.per_sender.size() != 2) {
        audit.dropped.push_back({d.donation_id, chat_id, DropReason::group_chat});
        drop_chat(d, chat_id);
      }
    }
    // Counts are integers, so an exact-boundary chat (e.g. 10 of 100 at 10%)
    // must survive; the tolerance absorbs the float rounding of share*total.
    const auto meets_share = [&](const ChatStat& s) {
      const double threshold = cfg.min_share * static_cast<double>(s.total);
      const double tol = 1e-7 * std::max(1.0, threshold);
      for (const auto& [sender, n] : s.per_sender)
        if (static_cast<double>(n) < threshold - tol) return false;
      return true;
    };

    // 2) balance: each side >= min_share of the chat's messages
    for (const auto& [chat_id, s] : stats) {
      if (s.per_sender.size() != 2) continue;
      if (!meets_share(s)) {
        audit.dropped.push_back({d.donation_id, chat_id, DropReason::unbalanced});
        drop_chat(d, chat_id);
      }
    }
    // 3) size: raw message count, boundary inclusive
    for (const auto& [chat_id, s] : stats) {
      if (s.per_sender.size() != 2) continue;
      if (meets_share(s) && s.total < cfg.min_messages) {
        audit.dropped.push_back({d.donation_id, chat_id, DropReason::too_small});
        drop_chat(d, chat_id);
      }
    }
  }

  // 4) donation size, strictly last
  std::erase_if(corpus.donations, [&](const Donation& d) {
    std::set<std::string> chats;
    for (const auto& r : d.records) chats.insert(r.chat_id);
    if (static_cast<std::int64_t>(chats.size()) < cfg.min_chats_per_donation) {
      audit.dropped.push_back({d.donation_id, "", DropReason::donation_too_small});
      return true;
    }
    return false;
  });

  audit.donations_out = static_cast<std::int64_t>(corpus.donations.size());
  for (const auto& d : corpus.donations) {
    std::set<std::string> chats;
    for (const auto& r : d.records) chats.insert(r.chat_id);
    audit.chats_out += static_cast<std::int64_t>(chats.size());
  }
  return audit;
}

} // namespace chatmeta
