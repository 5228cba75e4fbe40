#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chatmeta/types.hpp"

namespace chatmeta {

struct TestFingerprint {
  std::int64_t span_days = 0;
  std::int64_t message_count = 0;

  auto operator<=>(const TestFingerprint&) const = default;
};

struct CleanseConfig {
  std::vector<TestFingerprint> test_fingerprints;
  int system_sender_cutoff = 10;
  // donation dates (minutes) by donation id, e.g. from the intake metadata;
  // donations not listed fall back to latest timestamp + 1 day.
  std::map<std::string, std::int64_t> donation_dates;
};

struct CleanReport {
  std::int64_t donations_removed_test = 0;
  std::int64_t donations_removed_duplicate = 0;
  std::int64_t messages_removed_future = 0;
  // (donation_id, chat_id) -> number of senders pruned as system artifacts
  std::map<std::pair<std::string, std::string>, int> senders_pruned_as_system;
  std::int64_t donors_reassigned = 0;
};

// Drops donations whose (span_days, message_count) pair matches a known test
// fingerprint.
void remove_test_donations(Corpus& corpus, const std::vector<TestFingerprint>& fingerprints,
                           CleanReport& report);

// Among donations with an identical (earliest, latest, message_count)
// fingerprint, keeps the first in input order. Exact match only.
void remove_duplicate_donations(Corpus& corpus, CleanReport& report);

// Removes records dated after the donation date. Without a configured date
// the latest record + 1 day is used, which makes the stage a no-op.
void drop_future_messages(Donation& donation, std::int64_t donation_date_min,
                          CleanReport& report);

// In chats with more than two senders, repeatedly removes the sender with the
// fewest messages while that count is below the cutoff; stops as soon as the
// chat is dyadic. Chats with exactly two senders are never touched.
void prune_system_senders(Donation& donation, int cutoff, CleanReport& report);

// Instagram only: if some sender is present in strictly more chats than the
// current donor candidate, that sender becomes the donor. Ties keep the
// candidate.
void fix_instagram_donor(Donation& donation, CleanReport& report);

// All stages in order: test removal, duplicates, future dates, system
// senders, donor correction. Idempotent.
CleanReport cleanse_corpus(Corpus& corpus, const CleanseConfig& cfg);

} // namespace chatmeta
