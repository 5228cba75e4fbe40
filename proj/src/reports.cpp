#include "chatmeta/reports.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "chatmeta/error.hpp"
#include "chatmeta/pipeline.hpp"

namespace chatmeta {

std::string fmt_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::ofstream OutputSet::create(const std::string& name) {
  const auto path = dir_ / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  paths_.push_back(path);
  return out;
}

void OutputSet::remove_all() noexcept {
  for (const auto& p : paths_) {
    std::error_code ec;
    std::filesystem::remove(p, ec);
  }
}

void write_parse_report(std::ostream& out, const ParseReport& report) {
  out << "records_parsed\t" << report.records_parsed << '\n';
  out << "lines_skipped\t" << report.lines_skipped << '\n';
  out << "entries_skipped\t" << report.entries_skipped << '\n';
  out << "files_read\t" << report.files_read << '\n';
}

void write_clean_report(std::ostream& out, const CleanReport& report) {
  out << "donations_removed_test\t" << report.donations_removed_test << '\n';
  out << "donations_removed_duplicate\t" << report.donations_removed_duplicate << '\n';
  out << "messages_removed_future\t" << report.messages_removed_future << '\n';
  out << "donors_reassigned\t" << report.donors_reassigned << '\n';
  std::int64_t pruned = 0;
  for (const auto& [chat, n] : report.senders_pruned_as_system) pruned += n;
  out << "senders_pruned_total\t" << pruned << '\n';
  for (const auto& [chat, n] : report.senders_pruned_as_system)
    out << "pruned\t" << chat.first << '\t' << chat.second << '\t' << n << '\n';
}

void write_filter_audit(std::ostream& out, const FilterAudit& audit) {
  out << "donations_in\t" << audit.donations_in << '\n';
  out << "donations_out\t" << audit.donations_out << '\n';
  out << "chats_in\t" << audit.chats_in << '\n';
  out << "chats_out\t" << audit.chats_out << '\n';
  for (const auto& e : audit.dropped)
    out << "dropped\t" << e.donation_id << '\t' << e.chat_id << '\t'
        << drop_reason_name(e.reason) << '\n';
}

void write_stat_table(std::ostream& out, const StatTable& table, Source source) {
  out << "source\t" << source_name(source) << '\n';
  out << "donations\t" << table.n_donations << '\n';
  out << "chats\t" << table.n_chats << '\n';
  out << "messages\t" << table.n_messages << '\n';
  out << "quantity\tmean\tmedian\tsd\tmin\tmax\n";
  for (const auto& r : table.rows)
    out << r.quantity << '\t' << fmt_double(r.mean, 4) << '\t' << fmt_double(r.median, 4)
        << '\t' << fmt_double(r.sd, 4) << '\t' << fmt_double(r.min, 4) << '\t'
        << fmt_double(r.max, 4) << '\n';
}

void write_ecdf(std::ostream& thresholds_out, std::ostream& curve_out,
                const EcdfSummary& summary, Source source) {
  thresholds_out << "source\tthreshold\tminutes\tfraction\n";
  for (const auto& t : summary.thresholds)
    thresholds_out << source_name(source) << '\t' << t.label << '\t' << t.minutes << '\t'
                   << fmt_double(t.fraction, 6) << '\n';
  curve_out << "rt_min\tcumulative_fraction\n";
  for (const auto& [rt, frac] : summary.curve)
    curve_out << rt << '\t' << fmt_double(frac, 9) << '\n';
}

void write_wordcount_hist(std::ostream& out, const Corpus& corpus) {
  // per-message word counts, text messages only, capped view at 300 words
  std::map<std::int32_t, std::int64_t> counts;
  std::int64_t over_300 = 0, over_20 = 0, total = 0;
  for (const auto& d : corpus.donations)
    for (const auto& r : d.records) {
      if (r.is_media || r.audio_seconds) continue;
      ++total;
      if (r.word_count > 20) ++over_20;
      if (r.word_count > 300) {
        ++over_300;
        continue;
      }
      ++counts[r.word_count];
    }
  out << "word_count\tmessages\n";
  for (const auto& [wc, n] : counts) out << wc << '\t' << n << '\n';
  out << "# messages_total\t" << total << '\n';
  out << "# messages_over_300_words_omitted\t" << over_300 << '\n';
  out << "# fraction_over_20_words\t"
      << fmt_double(total ? static_cast<double>(over_20) / total : 0.0, 6) << '\n';
}

void write_chat_metrics(std::ostream& out, const std::vector<ChatSimilarity>& sims,
                        const std::vector<ChatRpPair>& pairs) {
  std::map<std::pair<std::string, std::string>, const ChatRpPair*> pair_of;
  for (const auto& p : pairs) pair_of[{p.donor_id, p.chat_id}] = &p;

  out << "donation_id\tchat_id\tn_ego\tn_alter\trp_ego\trp_alter\tsimilarity\n";
  for (const auto& s : sims) {
    out << s.donation_id << '\t' << s.chat_id << '\t' << s.n_ego << '\t' << s.n_alter
        << '\t';
    const auto it = pair_of.find({s.donation_id, s.chat_id});
    if (it != pair_of.end())
      out << fmt_double(it->second->rp_ego, 6) << '\t' << fmt_double(it->second->rp_alter, 6);
    else
      out << "NA\tNA";
    out << '\t' << fmt_double(s.sim, 6) << '\n';
  }
}

void write_similarity_hist(std::ostream& out, const std::vector<ChatSimilarity>& sims,
                           Source source) {
  constexpr int kBins = 20;
  std::array<std::int64_t, kBins> counts{};
  for (const auto& s : sims) {
    int bin = static_cast<int>(s.sim * kBins);
    if (bin >= kBins) bin = kBins - 1;
    ++counts[bin];
  }
  out << "source\tbin_lo\tbin_hi\tchats\n";
  for (int i = 0; i < kBins; ++i)
    out << source_name(source) << '\t' << fmt_double(i * 0.05, 2) << '\t'
        << fmt_double((i + 1) * 0.05, 2) << '\t' << counts[i] << '\n';
}

void write_lmm_summary(std::ostream& out, const LmmFit& fit) {
  out << "predictor\tcoef\tse\tci95_lo\tci95_hi\tdf\tt\tp\n";
  const auto row = [&](const char* name, double coef, double se, double lo, double hi,
                       double df, double t, double p) {
    out << name << '\t' << fmt_double(coef, 6) << '\t' << fmt_double(se, 6) << '\t'
        << fmt_double(lo, 6) << '\t' << fmt_double(hi, 6) << '\t' << fmt_double(df, 1)
        << '\t' << fmt_double(t, 4) << '\t';
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", p);
    out << buf << '\n';
  };
  row("(Intercept)", fit.beta0, fit.se0, fit.ci95_lo0, fit.ci95_hi0, fit.df0, fit.t0,
      fit.p0);
  row("rp_alter", fit.beta1, fit.se1, fit.ci95_lo1, fit.ci95_hi1, fit.df1, fit.t1, fit.p1);
  out << "# method\t" << (fit.method == FitMethod::reml ? "reml" : "ml") << '\n';
  out << "# sigma_u\t" << fmt_double(fit.sigma_u, 6) << '\n';
  out << "# sigma_e\t" << fmt_double(fit.sigma_e, 6) << '\n';
  out << "# log_likelihood\t" << fmt_double(fit.log_likelihood, 6) << '\n';
  out << "# n_obs\t" << fit.n_obs << '\n';
  out << "# n_groups\t" << fit.n_groups << '\n';
  out << "# degenerate\t" << (fit.degenerate ? 1 : 0) << '\n';
}

void write_lmm_qq(std::ostream& out, const std::vector<QqPoint>& points) {
  out << "theoretical\tsample\n";
  for (const auto& p : points)
    out << fmt_double(p.theoretical, 6) << '\t' << fmt_double(p.sample, 6) << '\n';
}

void write_lmm_ladder(std::ostream& out, const LadderReport& report) {
  out << "model\tlog_likelihood\tconverged\n";
  out << "random_intercept\t" << fmt_double(report.base.log_likelihood, 6) << "\t1\n";
  out << "random_intercept_plus_slope\t" << fmt_double(report.slope_loglik, 6) << '\t'
      << (report.slope_converged ? 1 : 0) << '\n';
  out << "# lrt_stat\t" << fmt_double(report.lrt_stat, 6) << '\n';
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", report.lrt_p);
  out << "# lrt_p\t" << buf << '\n';
  out << "# extension_selected\t" << (report.extension_selected ? 1 : 0) << '\n';
  out << "# sigma_v\t" << fmt_double(report.sigma_v, 6) << '\n';
}

void write_monthly_similarity(std::ostream& out,
                              const std::vector<MonthlySimilaritySeries>& series) {
  out << "donation_id\tchat_id\tmonth\tsimilarity\tn_ego\tn_alter\tqualifying\n";
  for (const auto& s : series)
    for (const auto& e : s.entries)
      out << s.donation_id << '\t' << s.chat_id << '\t' << month_key_str(e.month) << '\t'
          << fmt_double(e.sim, 6) << '\t' << e.n_ego << '\t' << e.n_alter << '\t'
          << (s.qualifying ? 1 : 0) << '\n';
}

void write_mad_table(std::ostream& out, const MadHistogram& hist, Source source) {
  out << "source\tbin_lo\tbin_hi\tchats\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
    out << source_name(source) << '\t' << fmt_double(i * hist.bin_width, 3) << '\t'
        << fmt_double((i + 1) * hist.bin_width, 3) << '\t' << hist.counts[i] << '\n';
  out << "# overflow\t" << hist.overflow << '\n';
  out << "# per_chat\n";
  for (const auto& [chat, m] : hist.per_chat)
    out << chat << '\t' << fmt_double(m, 6) << '\n';
}

void write_calibration(std::ostream& out, const CalibrationTable& table) {
  out << "sample_size\tsd_of_differences\n";
  for (std::size_t i = 0; i < table.sample_sizes.size(); ++i)
    out << table.sample_sizes[i] << '\t' << fmt_double(table.sd_of_differences[i], 8)
        << '\n';
  out << "# n_month_chats\t" << table.n_month_chats << '\n';
  out << "# repetitions\t" << table.repetitions << '\n';
}

} // namespace chatmeta
