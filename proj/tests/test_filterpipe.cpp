#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "chatmeta/error.hpp"
#include "chatmeta/filterpipe.hpp"

using namespace chatmeta;

namespace {

MessageRecord msg(const std::string& donation, const std::string& chat,
                  const std::string& sender, std::int64_t ts) {
  MessageRecord r;
  r.donation_id = donation;
  r.chat_id = chat;
  r.sender_id = sender;
  r.timestamp_min = ts;
  return r;
}

// chat with the given per-sender counts, interleaved timestamps
void add_chat(Donation& d, const std::string& chat,
              const std::vector<std::pair<std::string, int>>& counts) {
  std::int64_t ts = 0;
  for (const auto& [sender, n] : counts)
    for (int i = 0; i < n; ++i) d.records.push_back(msg(d.donation_id, chat, sender, ts++));
}

Donation donation_with(const std::string& id,
                       const std::vector<std::vector<std::pair<std::string, int>>>& chats) {
  Donation d;
  d.donation_id = id;
  int c = 0;
  for (const auto& chat : chats) add_chat(d, "c" + std::to_string(c++), chat);
  d.normalize();
  return d;
}

std::set<std::string> chat_ids(const Donation& d) {
  std::set<std::string> out;
  for (const auto& r : d.records) out.insert(r.chat_id);
  return out;
}

} // namespace

TEST_CASE("group chats and single-sender chats are dropped") {
  Corpus corpus;
  corpus.donations.push_back(donation_with(
      "d", {
               {{"A", 60}, {"B", 60}},             // dyad: kept
               {{"A", 60}, {"B", 60}, {"C", 60}},  // triad: dropped
               {{"A", 120}},                       // monologue: dropped
               {{"A", 60}, {"B", 60}},
               {{"A", 60}, {"B", 60}},
               {{"A", 60}, {"B", 60}},
               {{"A", 60}, {"B", 60}},
           }));
  FilterConfig cfg;
  cfg.min_messages = 100;
  const auto audit = filter_corpus(corpus, cfg);
  REQUIRE(corpus.donations.size() == 1);
  CHECK(chat_ids(corpus.donations[0]).size() == 5);
  int group_drops = 0;
  for (const auto& e : audit.dropped)
    if (e.reason == DropReason::group_chat) ++group_drops;
  CHECK(group_drops == 2);
}

TEST_CASE("balance boundary: exactly 10 percent survives") {
  Corpus corpus;
  corpus.donations.push_back(donation_with("d", {
                                                    {{"A", 90}, {"B", 10}},  // exactly 10%
                                                    {{"A", 95}, {"B", 5}},   // 5%: dropped
                                                    {{"A", 50}, {"B", 50}},
                                                    {{"A", 100}, {"B", 12}},
                                                    {{"A", 55}, {"B", 45}},
                                                    {{"A", 70}, {"B", 40}},
                                                }));
  FilterConfig cfg;
  const auto audit = filter_corpus(corpus, cfg);
  REQUIRE(corpus.donations.size() == 1);
  const auto kept = chat_ids(corpus.donations[0]);
  CHECK(kept.count("c0") == 1); // (90,10) kept, boundary inclusive
  CHECK(kept.count("c1") == 0);
  int unbalanced = 0;
  for (const auto& e : audit.dropped)
    if (e.reason == DropReason::unbalanced) ++unbalanced;
  CHECK(unbalanced == 1);
}

TEST_CASE("size boundary: 99 dropped, 100 kept") {
  Corpus corpus;
  corpus.donations.push_back(donation_with("d", {
                                                    {{"A", 50}, {"B", 50}},  // 100: kept
                                                    {{"A", 50}, {"B", 49}},  // 99: dropped
                                                    {{"A", 60}, {"B", 60}},
                                                    {{"A", 70}, {"B", 60}},
                                                    {{"A", 80}, {"B", 60}},
                                                    {{"A", 90}, {"B", 60}},
                                                }));
  const auto audit = filter_corpus(corpus, FilterConfig{});
  REQUIRE(corpus.donations.size() == 1);
  const auto kept = chat_ids(corpus.donations[0]);
  CHECK(kept.count("c0") == 1);
  CHECK(kept.count("c1") == 0);
}

TEST_CASE("donation boundary: 4 chats dropped, 5 kept; empty dropped") {
  Corpus corpus;
  std::vector<std::vector<std::pair<std::string, int>>> five(
      5, {{std::string("A"), 60}, {std::string("B"), 60}});
  std::vector<std::vector<std::pair<std::string, int>>> four(
      4, {{std::string("A"), 60}, {std::string("B"), 60}});
  corpus.donations.push_back(donation_with("keep5", five));
  corpus.donations.push_back(donation_with("drop4", four));
  corpus.donations.push_back(Donation{.donation_id = "empty"});

  const auto audit = filter_corpus(corpus, FilterConfig{});
  REQUIRE(corpus.donations.size() == 1);
  CHECK(corpus.donations[0].donation_id == "keep5");
  CHECK(audit.donations_out == 1);
}

TEST_CASE("pipeline order: a balance drop can cascade into a donation drop") {
  // 5 chats, one of which fails the balance rule; running the donation-size
  // filter last must erase the whole donation
  Corpus corpus;
  corpus.donations.push_back(donation_with("d", {
                                                    {{"A", 60}, {"B", 60}},
                                                    {{"A", 60}, {"B", 60}},
                                                    {{"A", 60}, {"B", 60}},
                                                    {{"A", 60}, {"B", 60}},
                                                    {{"A", 114}, {"B", 6}},  // 5%
                                                }));
  const auto audit = filter_corpus(corpus, FilterConfig{});
  CHECK(corpus.donations.empty());
  bool donation_drop = false;
  for (const auto& e : audit.dropped)
    if (e.reason == DropReason::donation_too_small) donation_drop = true;
  CHECK(donation_drop);
}

TEST_CASE("post-pipeline property holds on randomized corpora") {
  std::mt19937_64 rng(424242);
  for (int trial = 0; trial < 25; ++trial) {
    Corpus corpus;
    const int donors = 1 + static_cast<int>(rng() % 6);
    for (int j = 0; j < donors; ++j) {
      Donation d;
      d.donation_id = "d" + std::to_string(j);
      const int chats = 1 + static_cast<int>(rng() % 9);
      for (int c = 0; c < chats; ++c) {
        const int senders = 1 + static_cast<int>(rng() % 3);
        std::vector<std::pair<std::string, int>> counts;
        for (int s = 0; s < senders; ++s)
          counts.push_back({"s" + std::to_string(s), 5 + static_cast<int>(rng() % 120)});
        add_chat(d, "c" + std::to_string(c), counts);
      }
      d.normalize();
      corpus.donations.push_back(std::move(d));
    }

    FilterConfig cfg;
    filter_corpus(corpus, cfg);

    for (const auto& d : corpus.donations) {
      std::map<std::string, std::map<std::string, int>> per_chat;
      for (const auto& r : d.records) ++per_chat[r.chat_id][r.sender_id];
      CHECK(per_chat.size() >= static_cast<std::size_t>(cfg.min_chats_per_donation));
      for (const auto& [chat, senders] : per_chat) {
        CHECK(senders.size() == 2);
        std::int64_t total = 0;
        for (const auto& [s, n] : senders) total += n;
        CHECK(total >= cfg.min_messages);
        for (const auto& [s, n] : senders)
          CHECK(static_cast<double>(n) >= cfg.min_share * static_cast<double>(total) - 1e-9);
      }
    }
  }
}

TEST_CASE("invalid configs are rejected") {
  Corpus corpus;
  FilterConfig bad;
  bad.min_share = 0.6;
  CHECK_THROWS_AS(filter_corpus(corpus, bad), Error);
  bad.min_share = 0.1;
  bad.min_messages = 0;
  CHECK_THROWS_AS(filter_corpus(corpus, bad), Error);
}
