#include "chatmeta/timing.hpp"

#include <algorithm>

#include "chatmeta/error.hpp"

namespace chatmeta {

Aggregation aggregation_from_name(std::string_view name) {
  if (name == "first") return Aggregation::first;
  if (name == "last") return Aggregation::last;
  throw Error(Errc::invalid_config, "unknown aggregation '" + std::string(name) + "'");
}

std::string_view aggregation_name(Aggregation a) {
  return a == Aggregation::first ? "first" : "last";
}

std::vector<Block> merge_blocks(std::span<const MessageRecord> chat,
                                const std::string& ego_sender_id) {
  std::vector<Block> blocks;
  for (const auto& msg : chat) {
    if (blocks.empty() || blocks.back().sender_id != msg.sender_id) {
      Block b;
      b.sender_id = msg.sender_id;
      b.is_ego = msg.sender_id == ego_sender_id;
      b.first_ts = msg.timestamp_min;
      b.last_ts = msg.timestamp_min;
      b.word_count = msg.word_count;
      b.n_messages = 1;
      blocks.push_back(std::move(b));
    } else {
      Block& b = blocks.back();
      b.last_ts = std::max(b.last_ts, msg.timestamp_min);
      b.word_count += msg.word_count;
      b.n_messages += 1;
    }
  }
  return blocks;
}

std::vector<ResponseRecord> response_times(std::span<const Block> blocks,
                                           const std::string& donation_id,
                                           const std::string& chat_id, Aggregation mode,
                                           RtReport& report) {
  std::vector<ResponseRecord> out;
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    const Block& prev = blocks[i - 1];
    const Block& cur = blocks[i];
    const std::int64_t anchor = mode == Aggregation::first ? cur.first_ts : cur.last_ts;
    const std::int64_t gap = anchor - prev.last_ts;
    if (gap < 0) {
      ++report.dropped_negative_gap;
      continue;
    }

    ResponseRecord r;
    r.donation_id = donation_id;
    r.chat_id = chat_id;
    r.responder_id = cur.sender_id;
    r.is_ego = cur.is_ego;
    r.rt_min = std::max<std::int64_t>(gap, 1);
    r.block_first_ts = cur.first_ts;
    r.block_last_ts = cur.last_ts;
    r.block_word_count = cur.word_count;
    r.block_message_count = cur.n_messages;
    r.month_key = month_key_of(cur.first_ts);
    out.push_back(std::move(r));
    ++report.responses;
  }
  return out;
}

std::vector<ResponseRecord> compute_responses(const Corpus& corpus, Aggregation mode,
                                              RtReport& report) {
  std::vector<ResponseRecord> out;
  for (const auto& d : corpus.donations) {
    for_each_chat(d, [&](const std::string& chat_id, std::span<const MessageRecord> chat) {
      const auto blocks = merge_blocks(chat, d.donor_sender_id);
      auto records = response_times(blocks, d.donation_id, chat_id, mode, report);
      out.insert(out.end(), std::make_move_iterator(records.begin()),
                 std::make_move_iterator(records.end()));
    });
  }
  return out;
}

} // namespace chatmeta
