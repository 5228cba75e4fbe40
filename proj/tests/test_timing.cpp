#include <doctest.h>

#include <random>

#include "chatmeta/timing.hpp"

using namespace chatmeta;

namespace {

MessageRecord msg(const std::string& sender, std::int64_t ts) {
  MessageRecord r;
  r.donation_id = "d";
  r.chat_id = "c";
  r.sender_id = sender;
  r.timestamp_min = ts;
  r.word_count = 2;
  return r;
}

Block block(const std::string& sender, std::int64_t first, std::int64_t last) {
  Block b;
  b.sender_id = sender;
  b.first_ts = first;
  b.last_ts = last;
  b.n_messages = static_cast<std::int32_t>(last - first + 1);
  return b;
}

} // namespace

TEST_CASE("merge_blocks collapses same-sender runs") {
  const std::vector<MessageRecord> chat = {msg("A", 0), msg("A", 1), msg("B", 5)};
  const auto blocks = merge_blocks(chat, "A");
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].sender_id == "A");
  CHECK(blocks[0].first_ts == 0);
  CHECK(blocks[0].last_ts == 1);
  CHECK(blocks[0].word_count == 4);
  CHECK(blocks[0].n_messages == 2);
  CHECK(blocks[0].is_ego);
  CHECK(blocks[1].first_ts == 5);
  CHECK(blocks[1].last_ts == 5);
  CHECK_FALSE(blocks[1].is_ego);
}

TEST_CASE("merge_blocks on alternating senders is the identity") {
  const std::vector<MessageRecord> chat = {msg("A", 0), msg("B", 3), msg("A", 7), msg("B", 9)};
  const auto blocks = merge_blocks(chat, "A");
  CHECK(blocks.size() == chat.size());
}

TEST_CASE("response_times: first-timestamp anchoring, closest-gap semantics") {
  // ego at t=0; alter replies at t=5 and t=6; ego replies at t=10
  const std::vector<MessageRecord> chat = {msg("E", 0), msg("A", 5), msg("A", 6), msg("E", 10)};
  const auto blocks = merge_blocks(chat, "E");
  REQUIRE(blocks.size() == 3);

  RtReport report;
  const auto records = response_times(blocks, "d", "c", Aggregation::first, report);
  REQUIRE(records.size() == 2); // first block yields no data point
  CHECK(records[0].rt_min == 5); // alter block anchored at its earliest ts
  CHECK_FALSE(records[0].is_ego);
  CHECK(records[1].rt_min == 4); // 10 - 6: previous block's last ts
  CHECK(records[1].is_ego);
  CHECK(records[1].block_first_ts == 10);
}

TEST_CASE("response_times example: ego ends t=6, alter replies t=10 -> rt 4") {
  RtReport report;
  const std::vector<Block> blocks = {block("E", 3, 6), block("A", 10, 10)};
  const auto records = response_times(blocks, "d", "c", Aggregation::first, report);
  REQUIRE(records.size() == 1);
  CHECK(records[0].rt_min == 4);
}

TEST_CASE("same-minute replies floor at one minute") {
  RtReport report;
  const std::vector<Block> blocks = {block("E", 0, 0), block("A", 0, 0)};
  const auto records = response_times(blocks, "d", "c", Aggregation::first, report);
  REQUIRE(records.size() == 1);
  CHECK(records[0].rt_min == 1);
}

TEST_CASE("mode=last widens the gap by the block length") {
  const std::vector<Block> blocks = {block("E", 0, 0), block("A", 4, 9), block("E", 12, 12)};
  RtReport r1, r2;
  const auto first = response_times(blocks, "d", "c", Aggregation::first, r1);
  const auto last = response_times(blocks, "d", "c", Aggregation::last, r2);
  REQUIRE(first.size() == 2);
  REQUIRE(last.size() == 2);
  CHECK(first[0].rt_min == 4);  // 4 - 0
  CHECK(last[0].rt_min == 9);   // 9 - 0
  CHECK(first[1].rt_min == 3);  // 12 - 9
  CHECK(last[1].rt_min == 3);
}

TEST_CASE("negative gaps are dropped and counted") {
  RtReport report;
  const std::vector<Block> blocks = {block("E", 100, 100), block("A", 50, 50),
                                     block("E", 120, 120)};
  const auto records = response_times(blocks, "d", "c", Aggregation::first, report);
  CHECK(report.dropped_negative_gap == 1);
  REQUIRE(records.size() == 1);
  CHECK(records[0].rt_min == 70); // 120 - 50
}

TEST_CASE("record count equals blocks minus one per chat") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<MessageRecord> chat;
    std::int64_t ts = 1000;
    const int n = 2 + static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) {
      ts += static_cast<std::int64_t>(rng() % 30);
      chat.push_back(msg(rng() % 2 ? "A" : "B", ts));
    }
    const auto blocks = merge_blocks(chat, "A");
    RtReport report;
    const auto records = response_times(blocks, "d", "c", Aggregation::first, report);
    CHECK(records.size() + report.dropped_negative_gap == blocks.size() - 1);
  }
}

TEST_CASE("mode equivalence for strictly alternating single-message turns") {
  std::mt19937_64 rng(23);
  std::vector<MessageRecord> chat;
  std::int64_t ts = 0;
  for (int i = 0; i < 80; ++i) {
    ts += 1 + static_cast<std::int64_t>(rng() % 200);
    chat.push_back(msg(i % 2 ? "A" : "B", ts));
  }
  const auto blocks = merge_blocks(chat, "A");
  RtReport r1, r2;
  const auto first = response_times(blocks, "d", "c", Aggregation::first, r1);
  const auto last = response_times(blocks, "d", "c", Aggregation::last, r2);
  REQUIRE(first.size() == last.size());
  for (std::size_t i = 0; i < first.size(); ++i) CHECK(first[i].rt_min == last[i].rt_min);
}

TEST_CASE("rt under mode=last is never below mode=first") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<MessageRecord> chat;
    std::int64_t ts = 0;
    const int n = 3 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      ts += static_cast<std::int64_t>(rng() % 45);
      chat.push_back(msg(rng() % 3 ? "A" : "B", ts));
    }
    const auto blocks = merge_blocks(chat, "A");
    RtReport r1, r2;
    const auto first = response_times(blocks, "d", "c", Aggregation::first, r1);
    const auto last = response_times(blocks, "d", "c", Aggregation::last, r2);
    REQUIRE(first.size() == last.size());
    for (std::size_t i = 0; i < first.size(); ++i) CHECK(last[i].rt_min >= first[i].rt_min);
  }
}

TEST_CASE("month key comes from the block's first timestamp") {
  // 2023-03-31T23:50 .. 2023-04-01T00:10 spans a month boundary
  const std::int64_t t0 = minutes_from_civil(2023, 3, 31, 23, 50);
  const std::vector<MessageRecord> chat = {msg("A", t0), msg("B", t0 + 5), msg("B", t0 + 25)};
  const auto blocks = merge_blocks(chat, "A");
  RtReport report;
  const auto records = response_times(blocks, "d", "c", Aggregation::first, report);
  REQUIRE(records.size() == 1);
  CHECK(records[0].month_key == MonthKey{2023, 3});
  CHECK(records[0].block_last_ts == t0 + 25); // last ts already in April
}

TEST_CASE("fixture chat hand-trace: blocks and response times") {
  // senders/timestamps mirror fixtures/e2e/donor_trace/trace_main.txt's prefix
  const std::int64_t base = minutes_from_civil(2023, 3, 1, 8, 0);
  const auto at = [&](int h, int m) { return minutes_from_civil(2023, 3, 1, h, m); };
  const std::vector<MessageRecord> chat = {
      msg("E", base),        msg("E", at(8, 1)),  msg("A", at(8, 4)),  msg("E", at(8, 4)),
      msg("E", at(8, 10)),   msg("A", at(8, 20)), msg("A", at(8, 21)), msg("E", at(9, 30)),
      msg("A", at(9, 31)),   msg("E", at(9, 36)), msg("A", at(9, 43)), msg("E", at(9, 44)),
      msg("A", at(9, 50)),   msg("E", at(9, 51)),
  };
  const auto blocks = merge_blocks(chat, "E");
  REQUIRE(blocks.size() == 11);
  CHECK(blocks[0].first_ts == base);
  CHECK(blocks[0].last_ts == at(8, 1));
  CHECK(blocks[2].first_ts == at(8, 4));
  CHECK(blocks[2].last_ts == at(8, 10));

  RtReport report;
  const auto records = response_times(blocks, "d", "c", Aggregation::first, report);
  REQUIRE(records.size() == 10);
  const std::vector<std::int64_t> expected_rts = {3, 1, 10, 69, 1, 5, 7, 1, 6, 1};
  for (std::size_t i = 0; i < expected_rts.size(); ++i) {
    CAPTURE(i);
    CHECK(records[i].rt_min == expected_rts[i]);
  }
  // ego side: blocks 2,4,6,8,10 -> rts 1, 69, 5, 1, 1
  std::vector<std::int64_t> ego_rts, alter_rts;
  for (const auto& r : records) (r.is_ego ? ego_rts : alter_rts).push_back(r.rt_min);
  CHECK(ego_rts == std::vector<std::int64_t>{1, 69, 5, 1, 1});
  CHECK(alter_rts == std::vector<std::int64_t>{3, 10, 1, 7, 6});
}
