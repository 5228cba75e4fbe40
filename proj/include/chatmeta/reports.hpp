#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "chatmeta/cleanse.hpp"
#include "chatmeta/filterpipe.hpp"
#include "chatmeta/inference.hpp"
#include "chatmeta/ingest.hpp"
#include "chatmeta/metrics.hpp"
#include "chatmeta/stability.hpp"

namespace chatmeta {

struct StatTable;

// Deterministic number formatting for report files.
std::string fmt_double(double v, int precision = 6);

// Tracks files written by one pipeline run so a failed run can clean up
// after itself.
class OutputSet {
public:
  explicit OutputSet(std::filesystem::path dir);

  std::filesystem::path dir() const { return dir_; }
  // Opens a fresh file under the output dir and remembers it.
  std::ofstream create(const std::string& name);
  void remove_all() noexcept;
  const std::vector<std::filesystem::path>& paths() const { return paths_; }

private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> paths_;
};

void write_parse_report(std::ostream& out, const ParseReport& report);
void write_clean_report(std::ostream& out, const CleanReport& report);
void write_filter_audit(std::ostream& out, const FilterAudit& audit);
void write_stat_table(std::ostream& out, const StatTable& table, Source source);
void write_ecdf(std::ostream& thresholds_out, std::ostream& curve_out,
                const EcdfSummary& summary, Source source);
void write_wordcount_hist(std::ostream& out, const Corpus& corpus);
void write_chat_metrics(std::ostream& out, const std::vector<ChatSimilarity>& sims,
                        const std::vector<ChatRpPair>& pairs);
void write_similarity_hist(std::ostream& out, const std::vector<ChatSimilarity>& sims,
                           Source source);
void write_lmm_summary(std::ostream& out, const LmmFit& fit);
void write_lmm_qq(std::ostream& out, const std::vector<QqPoint>& points);
void write_lmm_ladder(std::ostream& out, const LadderReport& report);
void write_monthly_similarity(std::ostream& out,
                              const std::vector<MonthlySimilaritySeries>& series);
void write_mad_table(std::ostream& out, const MadHistogram& hist, Source source);
void write_calibration(std::ostream& out, const CalibrationTable& table);

} // namespace chatmeta
