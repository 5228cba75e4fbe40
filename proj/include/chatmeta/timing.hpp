#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chatmeta/types.hpp"

namespace chatmeta {

enum class Aggregation { first, last };

Aggregation aggregation_from_name(std::string_view name);
std::string_view aggregation_name(Aggregation a);

// A maximal run of consecutive messages by the same sender within one chat.
struct Block {
  std::string sender_id;
  bool is_ego = false;
  std::int64_t first_ts = 0;
  std::int64_t last_ts = 0;
  std::int32_t word_count = 0;  // sum over the run
  std::int32_t n_messages = 0;
};

// One merged turn together with its response time. Unit of all RT analysis.
struct ResponseRecord {
  std::string donation_id;
  std::string chat_id;
  std::string responder_id;
  bool is_ego = false;
  std::int64_t rt_min = 1; // >= 1
  std::int64_t block_first_ts = 0;
  std::int64_t block_last_ts = 0;
  std::int32_t block_word_count = 0;
  std::int32_t block_message_count = 1;
  MonthKey month_key; // from block_first_ts
};

// Collapses consecutive same-sender messages into blocks. Messages must be
// sorted by timestamp (ties keep input order) and belong to one chat.
std::vector<Block> merge_blocks(std::span<const MessageRecord> chat,
                                const std::string& ego_sender_id);

struct RtReport {
  std::int64_t responses = 0;
  std::int64_t dropped_negative_gap = 0;
};

// Turns a block sequence into ResponseRecords. The first block yields no
// record. With Aggregation::first the gap runs from the previous block's
// last timestamp to this block's first timestamp (the closest pair); with
// Aggregation::last it runs to this block's last timestamp. Gaps of zero
// minutes floor at 1 (the first bin means "within one minute"); negative
// gaps indicate corrupt input and drop the record into the report.
std::vector<ResponseRecord> response_times(std::span<const Block> blocks,
                                           const std::string& donation_id,
                                           const std::string& chat_id, Aggregation mode,
                                           RtReport& report);

// Convenience: merge + response times for every chat of every donation.
std::vector<ResponseRecord> compute_responses(const Corpus& corpus, Aggregation mode,
                                              RtReport& report);

} // namespace chatmeta
