#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chatmeta/cleanse.hpp"
#include "chatmeta/filterpipe.hpp"
#include "chatmeta/inference.hpp"
#include "chatmeta/ingest.hpp"
#include "chatmeta/metrics.hpp"
#include "chatmeta/stability.hpp"
#include "chatmeta/timing.hpp"

namespace chatmeta {

struct PipelineConfig {
  std::filesystem::path input_dir;
  Source source = Source::whatsapp;
  std::filesystem::path out_dir;

  IngestConfig ingest;
  CleanseConfig cleanse;
  FilterConfig filter;
  Aggregation aggregation = Aggregation::first;
  std::int64_t rp_threshold_min = 5;
  FitMethod lmm_method = FitMethod::reml;
  StabilityConfig stability;
  CalibrationConfig calibration;
  std::uint64_t seed = 0;

  // Loads the JSON config file and applies it over the defaults.
  static PipelineConfig from_json_file(const std::filesystem::path& path);
};

// Per-donor summary statistics (chats, time span in days, messages), the
// "after filtering, before merging" view.
struct StatRow {
  std::string quantity; // chats_per_donor / timespan_days_per_donor / messages_per_donor
  double mean = 0, median = 0, sd = 0, min = 0, max = 0;
};

struct StatTable {
  std::int64_t n_donations = 0;
  std::int64_t n_chats = 0;
  std::int64_t n_messages = 0;
  std::vector<StatRow> rows;
};

StatTable stat_table(const Corpus& corpus);

struct PipelineResult {
  ParseReport parse;
  CleanReport clean;
  FilterAudit filter;
  RtReport rt;
  std::int64_t responses = 0;
  std::int64_t chats_with_pairs = 0;
  bool lmm_fitted = false;
  std::vector<std::filesystem::path> outputs;
};

// Runs ingest -> cleanse -> filter -> rt -> metrics -> lmm -> stability and
// writes every report surface under cfg.out_dir. On failure all partially
// written outputs are removed and the error is rethrown with its stage name.
PipelineResult run_pipeline(const PipelineConfig& cfg);

} // namespace chatmeta
