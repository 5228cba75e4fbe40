#include <doctest.h>

#include <set>

#include "chatmeta/cleanse.hpp"
#include "chatmeta/types.hpp"

using namespace chatmeta;

namespace {

MessageRecord msg(const std::string& donation, const std::string& chat,
                  const std::string& sender, std::int64_t ts, Source source = Source::whatsapp) {
  MessageRecord r;
  r.donation_id = donation;
  r.chat_id = chat;
  r.sender_id = sender;
  r.timestamp_min = ts;
  r.word_count = 3;
  r.source = source;
  return r;
}

Donation make_donation(const std::string& id, Source source,
                       const std::vector<MessageRecord>& records,
                       const std::string& donor = "") {
  Donation d;
  d.donation_id = id;
  d.source = source;
  d.records = records;
  d.donor_sender_id = donor;
  d.normalize();
  return d;
}

// n messages for one sender in one chat, one minute apart
std::vector<MessageRecord> burst(const std::string& donation, const std::string& chat,
                                 const std::string& sender, std::int64_t t0, int n) {
  std::vector<MessageRecord> out;
  for (int i = 0; i < n; ++i) out.push_back(msg(donation, chat, sender, t0 + i));
  return out;
}

std::vector<MessageRecord> concat(std::initializer_list<std::vector<MessageRecord>> parts) {
  std::vector<MessageRecord> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::set<std::string> senders_of(const Donation& d, const std::string& chat) {
  std::set<std::string> s;
  for (const auto& r : d.records)
    if (r.chat_id == chat) s.insert(r.sender_id);
  return s;
}

} // namespace

TEST_CASE("remove_test_donations: empty fingerprint set is identity") {
  Corpus corpus;
  corpus.donations.push_back(make_donation("d1", Source::whatsapp, burst("d1", "c", "a", 0, 5)));
  CleanReport report;
  remove_test_donations(corpus, {}, report);
  CHECK(corpus.donations.size() == 1);
  CHECK(report.donations_removed_test == 0);
}

TEST_CASE("remove_test_donations drops matching span/count fingerprints") {
  // span 3 days (0 .. 3*1440), 42 messages
  std::vector<MessageRecord> records;
  for (int i = 0; i < 42; ++i) records.push_back(msg("t", "c", "a", i * (3 * 1440) / 41));
  Corpus corpus;
  corpus.donations.push_back(make_donation("t", Source::whatsapp, records));
  corpus.donations.push_back(make_donation("keep", Source::whatsapp, burst("keep", "c", "a", 0, 42)));

  CleanReport report;
  remove_test_donations(corpus, {{3, 42}}, report);
  REQUIRE(corpus.donations.size() == 1);
  CHECK(corpus.donations[0].donation_id == "keep");
  CHECK(report.donations_removed_test == 1);
}

TEST_CASE("fixture corpus with one planted test donation removes exactly one") {
  Corpus corpus;
  for (int i = 0; i < 4; ++i)
    corpus.donations.push_back(make_donation("d" + std::to_string(i), Source::whatsapp,
                                             burst("d" + std::to_string(i), "c", "a", i * 99, 30 + i)));
  // planted: exactly 2 days span, 10 messages
  std::vector<MessageRecord> planted;
  for (int i = 0; i < 10; ++i) planted.push_back(msg("test", "c", "a", i * 320));
  corpus.donations.push_back(make_donation("test", Source::whatsapp, planted));

  CleanReport report;
  remove_test_donations(corpus, {{2, 10}}, report);
  CHECK(corpus.donations.size() == 4);
  CHECK(report.donations_removed_test == 1);
}

TEST_CASE("remove_duplicate_donations keeps the first of identical fingerprints") {
  Corpus corpus;
  corpus.donations.push_back(make_donation("orig", Source::whatsapp, burst("orig", "c", "a", 100, 20)));
  corpus.donations.push_back(make_donation("copy", Source::whatsapp, burst("copy", "c", "a", 100, 20)));
  // same span but different count: both survive
  corpus.donations.push_back(make_donation("other", Source::whatsapp,
                                           concat({burst("other", "c", "a", 100, 20),
                                                   {msg("other", "c", "a", 119)}})));

  CleanReport report;
  remove_duplicate_donations(corpus, report);
  REQUIRE(corpus.donations.size() == 2);
  CHECK(corpus.donations[0].donation_id == "orig");
  CHECK(corpus.donations[1].donation_id == "other");
  CHECK(report.donations_removed_duplicate == 1);
}

TEST_CASE("duplicate removal: surviving fingerprint set is order-free") {
  const auto fingerprints = [](Corpus& corpus) {
    std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t>> out;
    for (const auto& d : corpus.donations) {
      const auto fp = d.fingerprint();
      out.insert({fp.earliest_min, fp.latest_min, fp.message_count});
    }
    return out;
  };

  Corpus a, b;
  for (const auto* id : {"x", "y", "z"}) {
    a.donations.push_back(make_donation(id, Source::whatsapp, burst(id, "c", "s", 0, 15)));
    b.donations.insert(b.donations.begin(),
                       make_donation(id, Source::whatsapp, burst(id, "c", "s", 0, 15)));
  }
  a.donations.push_back(make_donation("w", Source::whatsapp, burst("w", "c", "s", 7, 9)));
  b.donations.push_back(make_donation("w", Source::whatsapp, burst("w", "c", "s", 7, 9)));

  CleanReport ra, rb;
  remove_duplicate_donations(a, ra);
  remove_duplicate_donations(b, rb);
  CHECK(fingerprints(a) == fingerprints(b));
}

TEST_CASE("drop_future_messages removes planted future records") {
  auto d = make_donation("d", Source::whatsapp,
                         concat({burst("d", "c", "a", 0, 10),
                                 {msg("d", "c", "a", 99999), msg("d", "c", "a", 88888),
                                  msg("d", "c", "a", 77777)}}));
  CleanReport report;
  drop_future_messages(d, 50000, report);
  CHECK(d.records.size() == 10);
  CHECK(report.messages_removed_future == 3);

  // identity when none future
  drop_future_messages(d, 50000, report);
  CHECK(d.records.size() == 10);
  CHECK(report.messages_removed_future == 3);
}

TEST_CASE("prune_system_senders: examples from the cutoff rule") {
  SUBCASE("triad with a 3-message system sender becomes a dyad") {
    auto d = make_donation("d", Source::whatsapp,
                           concat({burst("d", "c", "A", 0, 500), burst("d", "c", "B", 1000, 400),
                                   burst("d", "c", "sys", 2000, 3)}));
    CleanReport report;
    prune_system_senders(d, 10, report);
    CHECK(senders_of(d, "c") == std::set<std::string>{"A", "B"});
    CHECK(report.senders_pruned_as_system.at({"d", "c"}) == 1);
  }
  SUBCASE("triad where everyone meets the cutoff is untouched") {
    auto d = make_donation("d", Source::whatsapp,
                           concat({burst("d", "c", "A", 0, 500), burst("d", "c", "B", 1000, 400),
                                   burst("d", "c", "C", 2000, 50)}));
    CleanReport report;
    prune_system_senders(d, 10, report);
    CHECK(senders_of(d, "c").size() == 3);
    CHECK(report.senders_pruned_as_system.empty());
  }
  SUBCASE("dyads are never touched even below cutoff") {
    auto d = make_donation("d", Source::whatsapp,
                           concat({burst("d", "c", "A", 0, 5), burst("d", "c", "B", 100, 200)}));
    CleanReport report;
    prune_system_senders(d, 10, report);
    CHECK(senders_of(d, "c").size() == 2);
  }
  SUBCASE("iterative pruning stops at a dyad") {
    // removing the 3-message sender reveals a 5-message sender, but the chat
    // is then still a triad, so that one goes too; pruning stops at 2 senders
    auto d = make_donation("d", Source::whatsapp,
                           concat({burst("d", "c", "A", 0, 500), burst("d", "c", "B", 1000, 400),
                                   burst("d", "c", "s1", 2000, 5), burst("d", "c", "s2", 3000, 3)}));
    CleanReport report;
    prune_system_senders(d, 10, report);
    CHECK(senders_of(d, "c") == std::set<std::string>{"A", "B"});
    CHECK(report.senders_pruned_as_system.at({"d", "c"}) == 2);
  }
}

TEST_CASE("fix_instagram_donor: strict majority reassigns, ties keep candidate") {
  SUBCASE("candidate present in fewer chats is replaced") {
    std::vector<MessageRecord> records;
    for (int c = 0; c < 7; ++c) {
      const std::string chat = "c" + std::to_string(c);
      auto part = concat({burst("d", chat, "real_donor", c * 1000, 10),
                          burst("d", chat, "partner" + std::to_string(c), c * 1000 + 500, 10)});
      records.insert(records.end(), part.begin(), part.end());
    }
    auto d = make_donation("d", Source::instagram, records, "partner0"); // in 1 chat
    CleanReport report;
    fix_instagram_donor(d, report);
    CHECK(d.donor_sender_id == "real_donor");
    CHECK(report.donors_reassigned == 1);
  }
  SUBCASE("candidate already maximal stays") {
    auto records = concat({burst("d", "c0", "donor", 0, 10), burst("d", "c0", "p0", 50, 10),
                           burst("d", "c1", "donor", 100, 10), burst("d", "c1", "p1", 150, 10)});
    auto d = make_donation("d", Source::instagram, records, "donor");
    CleanReport report;
    fix_instagram_donor(d, report);
    CHECK(d.donor_sender_id == "donor");
    CHECK(report.donors_reassigned == 0);
  }
  SUBCASE("whatsapp donations are left alone") {
    auto records = concat({burst("d", "c0", "a", 0, 10), burst("d", "c1", "b", 100, 10)});
    auto d = make_donation("d", Source::whatsapp, records, "a");
    CleanReport report;
    fix_instagram_donor(d, report);
    CHECK(d.donor_sender_id == "a");
  }
}

TEST_CASE("cleanse is idempotent") {
  const auto build = [] {
    Corpus corpus;
    corpus.donations.push_back(make_donation(
        "d0", Source::whatsapp,
        concat({burst("d0", "c0", "A", 0, 200), burst("d0", "c0", "B", 300, 150),
                burst("d0", "c0", "sys", 600, 2), burst("d0", "c1", "A", 10000, 50),
                burst("d0", "c1", "B", 10100, 60)})));
    corpus.donations.push_back(
        make_donation("dup", Source::whatsapp, burst("dup", "c", "A", 5, 25)));
    corpus.donations.push_back(
        make_donation("dup2", Source::whatsapp, burst("dup2", "c", "A", 5, 25)));
    return corpus;
  };

  CleanseConfig cfg;
  Corpus once = build();
  cleanse_corpus(once, cfg);
  Corpus twice = build();
  cleanse_corpus(twice, cfg);
  const CleanReport second_pass = cleanse_corpus(twice, cfg);

  REQUIRE(once.donations.size() == twice.donations.size());
  for (std::size_t i = 0; i < once.donations.size(); ++i)
    CHECK(once.donations[i].records.size() == twice.donations[i].records.size());
  CHECK(second_pass.donations_removed_duplicate == 0);
  CHECK(second_pass.messages_removed_future == 0);
  CHECK(second_pass.senders_pruned_as_system.empty());
}

TEST_CASE("clean report counts mirror actual removals") {
  Corpus corpus;
  corpus.donations.push_back(make_donation("a", Source::whatsapp, burst("a", "c", "s", 0, 30)));
  corpus.donations.push_back(make_donation("b", Source::whatsapp, burst("b", "c", "s", 0, 30)));
  const std::size_t before = corpus.donations.size();
  CleanReport report;
  remove_duplicate_donations(corpus, report);
  CHECK(static_cast<std::int64_t>(before - corpus.donations.size()) ==
        report.donations_removed_duplicate);
}
