#include "chatmeta/records_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "chatmeta/error.hpp"

namespace chatmeta {

namespace {

using nlohmann::json;

json to_json(const MessageRecord& r) {
  json j{{"donation_id", r.donation_id},
         {"chat_id", r.chat_id},
         {"sender_id", r.sender_id},
         {"timestamp_min", r.timestamp_min},
         {"word_count", r.word_count},
         {"is_media", r.is_media},
         {"source", source_name(r.source)}};
  if (r.audio_seconds) j["audio_seconds"] = *r.audio_seconds;
  return j;
}

MessageRecord message_from_json(const json& j) {
  MessageRecord r;
  r.donation_id = j.at("donation_id").get<std::string>();
  r.chat_id = j.at("chat_id").get<std::string>();
  r.sender_id = j.at("sender_id").get<std::string>();
  r.timestamp_min = j.at("timestamp_min").get<std::int64_t>();
  r.word_count = j.at("word_count").get<std::int32_t>();
  r.is_media = j.at("is_media").get<bool>();
  r.source = source_from_name(j.at("source").get<std::string>());
  if (j.contains("audio_seconds")) r.audio_seconds = j.at("audio_seconds").get<std::int32_t>();
  return r;
}

} // namespace

void write_messages_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& d : corpus.donations)
    for (const auto& r : d.records) out << to_json(r).dump() << '\n';
}

void write_donations_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& d : corpus.donations) {
    const Fingerprint fp = d.fingerprint();
    json j{{"donation_id", d.donation_id},
           {"source", source_name(d.source)},
           {"donor_sender_id", d.donor_sender_id},
           {"earliest_min", fp.earliest_min},
           {"latest_min", fp.latest_min},
           {"message_count", fp.message_count}};
    if (d.donation_date_min) j["donation_date_min"] = *d.donation_date_min;
    out << j.dump() << '\n';
  }
}

Corpus read_corpus_jsonl(std::istream& messages, std::istream& donations) {
  Corpus corpus;
  std::unordered_map<std::string, std::size_t> index;

  std::string line;
  while (std::getline(donations, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::io_error, std::string("bad donation line: ") + e.what());
    }
    Donation d;
    d.donation_id = j.at("donation_id").get<std::string>();
    d.source = source_from_name(j.at("source").get<std::string>());
    d.donor_sender_id = j.at("donor_sender_id").get<std::string>();
    if (j.contains("donation_date_min"))
      d.donation_date_min = j.at("donation_date_min").get<std::int64_t>();
    index.emplace(d.donation_id, corpus.donations.size());
    corpus.donations.push_back(std::move(d));
  }

  while (std::getline(messages, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::io_error, std::string("bad message line: ") + e.what());
    }
    MessageRecord r = message_from_json(j);
    const auto it = index.find(r.donation_id);
    if (it == index.end())
      throw Error(Errc::io_error, "message for unknown donation " + r.donation_id);
    corpus.donations[it->second].records.push_back(std::move(r));
  }

  for (auto& d : corpus.donations) d.normalize();
  return corpus;
}

void write_responses_jsonl(std::ostream& out, const std::vector<ResponseRecord>& records) {
  for (const auto& r : records) {
    const json j{{"donation_id", r.donation_id},
                 {"chat_id", r.chat_id},
                 {"responder_id", r.responder_id},
                 {"is_ego", r.is_ego},
                 {"rt_min", r.rt_min},
                 {"block_first_ts", r.block_first_ts},
                 {"block_last_ts", r.block_last_ts},
                 {"block_word_count", r.block_word_count},
                 {"block_message_count", r.block_message_count},
                 {"month_key", month_key_str(r.month_key)}};
    out << j.dump() << '\n';
  }
}

std::vector<ResponseRecord> read_responses_jsonl(std::istream& in) {
  std::vector<ResponseRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::io_error, std::string("bad response line: ") + e.what());
    }
    ResponseRecord r;
    r.donation_id = j.at("donation_id").get<std::string>();
    r.chat_id = j.at("chat_id").get<std::string>();
    r.responder_id = j.at("responder_id").get<std::string>();
    r.is_ego = j.at("is_ego").get<bool>();
    r.rt_min = j.at("rt_min").get<std::int64_t>();
    r.block_first_ts = j.at("block_first_ts").get<std::int64_t>();
    r.block_last_ts = j.at("block_last_ts").get<std::int64_t>();
    r.block_word_count = j.at("block_word_count").get<std::int32_t>();
    r.block_message_count = j.at("block_message_count").get<std::int32_t>();
    r.month_key = month_key_of(r.block_first_ts);
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + p.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::missing_stage_input, "cannot read " + p.string());
  return in;
}

} // namespace

void save_corpus(const Corpus& corpus, const std::filesystem::path& messages_path,
                 const std::filesystem::path& donations_path) {
  auto m = open_out(messages_path);
  write_messages_jsonl(m, corpus);
  auto d = open_out(donations_path);
  write_donations_jsonl(d, corpus);
}

Corpus load_corpus(const std::filesystem::path& messages_path,
                   const std::filesystem::path& donations_path) {
  auto m = open_in(messages_path);
  auto d = open_in(donations_path);
  return read_corpus_jsonl(m, d);
}

void save_responses(const std::vector<ResponseRecord>& records,
                    const std::filesystem::path& path) {
  auto out = open_out(path);
  write_responses_jsonl(out, records);
}

std::vector<ResponseRecord> load_responses(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_responses_jsonl(in);
}

} // namespace chatmeta
