#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "chatmeta/timing.hpp"
#include "chatmeta/types.hpp"

namespace chatmeta {

// Line-delimited JSON, one object per record. This file is the interchange
// format between pipeline stages; field names follow the record structs.

void write_messages_jsonl(std::ostream& out, const Corpus& corpus);
void write_donations_jsonl(std::ostream& out, const Corpus& corpus);
Corpus read_corpus_jsonl(std::istream& messages, std::istream& donations);

void write_responses_jsonl(std::ostream& out, const std::vector<ResponseRecord>& records);
std::vector<ResponseRecord> read_responses_jsonl(std::istream& in);

// Convenience file wrappers; throw IoError when opening fails.
void save_corpus(const Corpus& corpus, const std::filesystem::path& messages_path,
                 const std::filesystem::path& donations_path);
Corpus load_corpus(const std::filesystem::path& messages_path,
                   const std::filesystem::path& donations_path);
void save_responses(const std::vector<ResponseRecord>& records,
                    const std::filesystem::path& path);
std::vector<ResponseRecord> load_responses(const std::filesystem::path& path);

} // namespace chatmeta
