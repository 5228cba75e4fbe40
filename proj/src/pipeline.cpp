#include "chatmeta/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "chatmeta/error.hpp"
#include "chatmeta/records_io.hpp"
#include "chatmeta/reports.hpp"

namespace chatmeta {

namespace {

using nlohmann::json;

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

StatRow summarize(const std::string& quantity, const std::vector<double>& values) {
  StatRow row;
  row.quantity = quantity;
  if (values.empty()) return row;
  double sum = 0;
  row.min = row.max = values.front();
  for (const double v : values) {
    sum += v;
    row.min = std::min(row.min, v);
    row.max = std::max(row.max, v);
  }
  row.mean = sum / static_cast<double>(values.size());
  row.median = median_of(values);
  if (values.size() > 1) {
    double acc = 0;
    for (const double v : values) acc += (v - row.mean) * (v - row.mean);
    row.sd = std::sqrt(acc / static_cast<double>(values.size() - 1));
  }
  return row;
}

} // namespace

StatTable stat_table(const Corpus& corpus) {
  StatTable table;
  std::vector<double> chats, spans, messages;
  for (const auto& d : corpus.donations) {
    std::set<std::string> chat_ids;
    for (const auto& r : d.records) chat_ids.insert(r.chat_id);
    const Fingerprint fp = d.fingerprint();
    chats.push_back(static_cast<double>(chat_ids.size()));
    spans.push_back(static_cast<double>(fp.latest_min - fp.earliest_min) / 1440.0);
    messages.push_back(static_cast<double>(d.records.size()));

    table.n_chats += static_cast<std::int64_t>(chat_ids.size());
    table.n_messages += static_cast<std::int64_t>(d.records.size());
  }
  table.n_donations = static_cast<std::int64_t>(corpus.donations.size());
  table.rows.push_back(summarize("chats_per_donor", chats));
  table.rows.push_back(summarize("timespan_days_per_donor", spans));
  table.rows.push_back(summarize("messages_per_donor", messages));
  return table;
}

PipelineConfig PipelineConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_config, "cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_config, path.string() + ": " + e.what());
  }

  PipelineConfig cfg;
  if (j.contains("input")) cfg.input_dir = j.at("input").get<std::string>();
  if (j.contains("source")) cfg.source = source_from_name(j.at("source").get<std::string>());
  if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
  if (j.contains("aggregation"))
    cfg.aggregation = aggregation_from_name(j.at("aggregation").get<std::string>());
  if (j.contains("rp_threshold_min"))
    cfg.rp_threshold_min = j.at("rp_threshold_min").get<std::int64_t>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();

  if (j.contains("media_placeholders"))
    cfg.ingest.media_placeholders =
        j.at("media_placeholders").get<std::vector<std::string>>();

  if (j.contains("cleanse")) {
    const auto& jc = j.at("cleanse");
    if (jc.contains("system_cutoff"))
      cfg.cleanse.system_sender_cutoff = jc.at("system_cutoff").get<int>();
    if (jc.contains("test_fingerprints"))
      for (const auto& fp : jc.at("test_fingerprints"))
        cfg.cleanse.test_fingerprints.push_back(
            {fp.at(0).get<std::int64_t>(), fp.at(1).get<std::int64_t>()});
    if (jc.contains("donation_dates"))
      for (const auto& [donation, date] : jc.at("donation_dates").items())
        cfg.cleanse.donation_dates[donation] = date.get<std::int64_t>();
  }

  if (j.contains("filter")) {
    const auto& jf = j.at("filter");
    if (jf.contains("min_share")) cfg.filter.min_share = jf.at("min_share").get<double>();
    if (jf.contains("min_messages"))
      cfg.filter.min_messages = jf.at("min_messages").get<std::int64_t>();
    if (jf.contains("min_chats_per_donation"))
      cfg.filter.min_chats_per_donation =
          jf.at("min_chats_per_donation").get<std::int64_t>();
  }

  if (j.contains("lmm"))
    cfg.lmm_method = fit_method_from_name(j.at("lmm").value("method", "reml"));

  if (j.contains("stability")) {
    const auto& js = j.at("stability");
    if (js.contains("min_per_side"))
      cfg.stability.min_per_side = js.at("min_per_side").get<int>();
    if (js.contains("min_months")) cfg.stability.min_months = js.at("min_months").get<int>();
    if (js.contains("count_raw_messages"))
      cfg.stability.count_raw_messages = js.at("count_raw_messages").get<bool>();
  }

  if (j.contains("calibration")) {
    const auto& jc = j.at("calibration");
    if (jc.contains("min_full")) cfg.calibration.min_full = jc.at("min_full").get<int>();
    if (jc.contains("sizes"))
      cfg.calibration.sample_sizes = jc.at("sizes").get<std::vector<int>>();
    if (jc.contains("reps")) cfg.calibration.repetitions = jc.at("reps").get<int>();
  }
  cfg.calibration.seed = cfg.seed;
  return cfg;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  OutputSet outputs(cfg.out_dir);
  const char* stage = "setup";
  try {
    PipelineResult result;

    stage = "ingest";
    Corpus corpus = ingest_directory(cfg.input_dir, cfg.source, cfg.ingest, result.parse);
    {
      auto out = outputs.create("parse_report.txt");
      write_parse_report(out, result.parse);
      auto m = outputs.create("messages.jsonl");
      write_messages_jsonl(m, corpus);
      auto d = outputs.create("donations.jsonl");
      write_donations_jsonl(d, corpus);
    }

    stage = "clean";
    result.clean = cleanse_corpus(corpus, cfg.cleanse);
    {
      auto out = outputs.create("clean_report.txt");
      write_clean_report(out, result.clean);
      auto m = outputs.create("messages_clean.jsonl");
      write_messages_jsonl(m, corpus);
      auto d = outputs.create("donations_clean.jsonl");
      write_donations_jsonl(d, corpus);
    }

    stage = "filter";
    result.filter = filter_corpus(corpus, cfg.filter);
    {
      auto out = outputs.create("filter_audit.txt");
      write_filter_audit(out, result.filter);
      auto m = outputs.create("messages_filtered.jsonl");
      write_messages_jsonl(m, corpus);
      auto d = outputs.create("donations_filtered.jsonl");
      write_donations_jsonl(d, corpus);
    }
    if (corpus.donations.empty())
      throw Error(Errc::empty_corpus, "no donation survived filtering");

    stage = "report";
    {
      auto out = outputs.create("general_stats.tsv");
      write_stat_table(out, stat_table(corpus), cfg.source);
      auto wc = outputs.create("wordcount_hist.tsv");
      write_wordcount_hist(wc, corpus);
    }

    stage = "rt";
    const std::vector<ResponseRecord> responses =
        compute_responses(corpus, cfg.aggregation, result.rt);
    result.responses = static_cast<std::int64_t>(responses.size());
    {
      auto r = outputs.create("responses.jsonl");
      write_responses_jsonl(r, responses);
      auto out = outputs.create("rt_report.txt");
      out << "responses\t" << result.rt.responses << '\n';
      out << "dropped_negative_gap\t" << result.rt.dropped_negative_gap << '\n';
      out << "aggregation\t" << aggregation_name(cfg.aggregation) << '\n';
    }

    stage = "metrics";
    std::vector<std::int64_t> pooled;
    pooled.reserve(responses.size());
    for (const auto& r : responses) pooled.push_back(r.rt_min);
    ChatRpReport rp_report;
    const auto sims = chat_similarities(responses, rp_report);
    ChatRpReport rp_report2;
    const auto pairs = chat_rp_pairs(responses, cfg.rp_threshold_min, rp_report2);
    result.chats_with_pairs = static_cast<std::int64_t>(pairs.size());
    {
      auto et = outputs.create("ecdf_thresholds.tsv");
      auto ec = outputs.create("ecdf_full.tsv");
      write_ecdf(et, ec, pooled_ecdf(pooled), cfg.source);
      auto cm = outputs.create("chat_metrics.tsv");
      write_chat_metrics(cm, sims, pairs);
      auto sh = outputs.create("similarity_hist.tsv");
      write_similarity_hist(sh, sims, cfg.source);
    }

    stage = "lmm";
    {
      const LmmFit fit = fit_random_intercept(pairs, LmmOptions{.method = cfg.lmm_method});
      const LadderReport ladder = model_ladder(pairs, cfg.lmm_method);
      auto out = outputs.create("lmm_summary.tsv");
      write_lmm_summary(out, fit);
      auto qq = outputs.create("lmm_qq.tsv");
      write_lmm_qq(qq, residual_diagnostics(fit));
      auto lad = outputs.create("lmm_ladder.tsv");
      write_lmm_ladder(lad, ladder);
      result.lmm_fitted = true;
    }

    stage = "stability";
    {
      const auto series = monthly_similarity_all(responses, cfg.stability);
      auto ms = outputs.create("monthly_similarity.tsv");
      write_monthly_similarity(ms, series);
      auto mt = outputs.create("mad_per_chat.tsv");
      write_mad_table(mt, mad_histogram(series), cfg.source);
    }

    stage = "manifest";
    {
      json manifest;
      manifest["version"] = "0.1.0";
      manifest["source"] = std::string(source_name(cfg.source));
      manifest["aggregation"] = std::string(aggregation_name(cfg.aggregation));
      manifest["rp_threshold_min"] = cfg.rp_threshold_min;
      manifest["seed"] = cfg.seed;
      manifest["filter"] = {{"min_share", cfg.filter.min_share},
                            {"min_messages", cfg.filter.min_messages},
                            {"min_chats_per_donation", cfg.filter.min_chats_per_donation}};
      manifest["counts"] = {
          {"records_parsed", result.parse.records_parsed},
          {"lines_skipped", result.parse.lines_skipped},
          {"entries_skipped", result.parse.entries_skipped},
          {"donations_removed_test", result.clean.donations_removed_test},
          {"donations_removed_duplicate", result.clean.donations_removed_duplicate},
          {"messages_removed_future", result.clean.messages_removed_future},
          {"donors_reassigned", result.clean.donors_reassigned},
          {"donations_out", result.filter.donations_out},
          {"chats_out", result.filter.chats_out},
          {"responses", result.responses},
          {"dropped_negative_gap", result.rt.dropped_negative_gap},
          {"chats_with_pairs", result.chats_with_pairs},
      };
      auto out = outputs.create("manifest.json");
      out << manifest.dump(2) << '\n';
    }

    result.outputs = outputs.paths();
    return result;
  } catch (const Error& e) {
    outputs.remove_all();
    throw Error(e.code(), std::string("stage ") + stage + ": " + e.what());
  } catch (const std::exception& e) {
    outputs.remove_all();
    throw Error(Errc::io_error, std::string("stage ") + stage + ": " + e.what());
  }
}

} // namespace chatmeta
