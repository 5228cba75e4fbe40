#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chatmeta/types.hpp"

namespace chatmeta {

struct FilterConfig {
  double min_share = 0.10;          // each side must write at least this fraction
  std::int64_t min_messages = 100;  // raw messages per chat, pre-merge
  std::int64_t min_chats_per_donation = 5;

  void validate() const;
};

// Why a chat or donation left the corpus. One line per drop in the audit.
enum class DropReason { group_chat, unbalanced, too_small, donation_too_small };

std::string_view drop_reason_name(DropReason r);

struct FilterAudit {
  struct Entry {
    std::string donation_id;
    std::string chat_id; // empty for donation-level drops
    DropReason reason;
  };
  std::vector<Entry> dropped;
  std::int64_t chats_in = 0;
  std::int64_t chats_out = 0;
  std::int64_t donations_in = 0;
  std::int64_t donations_out = 0;
};

// The quality filter pipeline, in this exact order: keep dyadic chats only,
// then drop chats where one side wrote less than min_share of the messages,
// then chats with fewer than min_messages raw messages, and finally
// donations left with fewer than min_chats_per_donation chats. "Less than"
// is strict: a chat at exactly the boundary survives.
FilterAudit filter_corpus(Corpus& corpus, const FilterConfig& cfg);

} // namespace chatmeta
