#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "chatmeta/error.hpp"
#include "chatmeta/pipeline.hpp"
#include "chatmeta/records_io.hpp"
#include "chatmeta/reports.hpp"
#include "chatmeta/synth.hpp"

namespace {

using namespace chatmeta;

namespace fs = std::filesystem;

void require_input(const fs::path& path, const std::string& producing_command) {
  if (!fs::exists(path))
    throw Error(Errc::missing_stage_input,
                path.string() + " not found; run `chatmeta " + producing_command +
                    "` first");
}

Source corpus_source(const Corpus& corpus) {
  if (corpus.donations.empty()) throw Error(Errc::empty_corpus, "no donations loaded");
  return corpus.donations.front().source;
}

struct CommonOpts {
  std::string in_dir;
  std::string out_dir = "out";
  std::string source = "whatsapp";
  std::string aggregation = "first";
  std::string config_file;
  std::int64_t rp_threshold = 5;
  int min_per_side = 70;
  int reps = 400;
  std::uint64_t seed = 0;
};

PipelineConfig build_config(const CommonOpts& opts, const CLI::App& cmd) {
  const bool have_config = !opts.config_file.empty();
  PipelineConfig cfg;
  if (have_config) cfg = PipelineConfig::from_json_file(opts.config_file);
  // explicit flags override the config file
  if (!opts.in_dir.empty()) cfg.input_dir = opts.in_dir;
  if (!have_config || cmd.count("--source")) cfg.source = source_from_name(opts.source);
  if (cfg.out_dir.empty() || cmd.count("--out")) cfg.out_dir = opts.out_dir;
  if (!have_config || cmd.count("--aggregation"))
    cfg.aggregation = aggregation_from_name(opts.aggregation);
  if (cmd.count("--rp-threshold")) cfg.rp_threshold_min = opts.rp_threshold;
  if (cmd.count("--min-per-side")) cfg.stability.min_per_side = opts.min_per_side;
  if (cmd.count("--reps")) cfg.calibration.repetitions = opts.reps;
  if (cmd.count("--seed")) {
    cfg.seed = opts.seed;
    cfg.calibration.seed = opts.seed;
  }
  return cfg;
}

int run_ingest(const PipelineConfig& cfg) {
  ParseReport report;
  const Corpus corpus = ingest_directory(cfg.input_dir, cfg.source, cfg.ingest, report);
  OutputSet outputs(cfg.out_dir);
  auto pr = outputs.create("parse_report.txt");
  write_parse_report(pr, report);
  auto m = outputs.create("messages.jsonl");
  write_messages_jsonl(m, corpus);
  auto d = outputs.create("donations.jsonl");
  write_donations_jsonl(d, corpus);
  std::cout << "ingested " << report.records_parsed << " records from "
            << corpus.donations.size() << " donations\n";
  return 0;
}

int run_clean(const PipelineConfig& cfg) {
  const fs::path out = cfg.out_dir;
  require_input(out / "messages.jsonl", "ingest");
  Corpus corpus = load_corpus(out / "messages.jsonl", out / "donations.jsonl");
  const CleanReport report = cleanse_corpus(corpus, cfg.cleanse);
  OutputSet outputs(cfg.out_dir);
  auto cr = outputs.create("clean_report.txt");
  write_clean_report(cr, report);
  auto m = outputs.create("messages_clean.jsonl");
  write_messages_jsonl(m, corpus);
  auto d = outputs.create("donations_clean.jsonl");
  write_donations_jsonl(d, corpus);
  std::cout << "cleaned corpus: " << corpus.donations.size() << " donations remain\n";
  return 0;
}

int run_filter(const PipelineConfig& cfg) {
  const fs::path out = cfg.out_dir;
  require_input(out / "messages_clean.jsonl", "clean");
  Corpus corpus = load_corpus(out / "messages_clean.jsonl", out / "donations_clean.jsonl");
  const FilterAudit audit = filter_corpus(corpus, cfg.filter);
  OutputSet outputs(cfg.out_dir);
  auto fa = outputs.create("filter_audit.txt");
  write_filter_audit(fa, audit);
  auto m = outputs.create("messages_filtered.jsonl");
  write_messages_jsonl(m, corpus);
  auto d = outputs.create("donations_filtered.jsonl");
  write_donations_jsonl(d, corpus);
  std::cout << "filtered: " << audit.chats_out << " chats in " << audit.donations_out
            << " donations remain\n";
  return 0;
}

int run_rt(const PipelineConfig& cfg) {
  const fs::path out = cfg.out_dir;
  require_input(out / "messages_filtered.jsonl", "filter");
  const Corpus corpus =
      load_corpus(out / "messages_filtered.jsonl", out / "donations_filtered.jsonl");
  RtReport report;
  const auto responses = compute_responses(corpus, cfg.aggregation, report);
  OutputSet outputs(cfg.out_dir);
  auto r = outputs.create("responses.jsonl");
  write_responses_jsonl(r, responses);
  auto rr = outputs.create("rt_report.txt");
  rr << "responses\t" << report.responses << '\n';
  rr << "dropped_negative_gap\t" << report.dropped_negative_gap << '\n';
  rr << "aggregation\t" << aggregation_name(cfg.aggregation) << '\n';
  std::cout << "computed " << responses.size() << " response records\n";
  return 0;
}

int run_report(const PipelineConfig& cfg) {
  const fs::path out = cfg.out_dir;
  require_input(out / "messages_filtered.jsonl", "filter");
  require_input(out / "responses.jsonl", "rt");
  const Corpus corpus =
      load_corpus(out / "messages_filtered.jsonl", out / "donations_filtered.jsonl");
  const auto responses = load_responses(out / "responses.jsonl");
  const Source source = corpus_source(corpus);

  OutputSet outputs(cfg.out_dir);
  auto gs = outputs.create("general_stats.tsv");
  write_stat_table(gs, stat_table(corpus), source);
  auto wc = outputs.create("wordcount_hist.tsv");
  write_wordcount_hist(wc, corpus);
  std::vector<std::int64_t> pooled;
  pooled.reserve(responses.size());
  for (const auto& r : responses) pooled.push_back(r.rt_min);
  auto et = outputs.create("ecdf_thresholds.tsv");
  auto ec = outputs.create("ecdf_full.tsv");
  write_ecdf(et, ec, pooled_ecdf(pooled), source);
  std::cout << "report tables written to " << out.string() << '\n';
  return 0;
}

int run_similarity(const PipelineConfig& cfg) {
  const fs::path out = cfg.out_dir;
  require_input(out / "responses.jsonl", "rt");
  require_input(out / "donations_filtered.jsonl", "filter");
  const Corpus corpus =
      load_corpus(out / "messages_filtered.jsonl", out / "donations_filtered.jsonl");
  const auto responses = load_responses(out / "responses.jsonl");

  ChatRpReport sim_report, pair_report;
  const auto sims = chat_similarities(responses, sim_report);
  const auto pairs = chat_rp_pairs(responses, cfg.rp_threshold_min, pair_report);
  OutputSet outputs(cfg.out_dir);
  auto cm = outputs.create("chat_metrics.tsv");
  write_chat_metrics(cm, sims, pairs);
  auto sh = outputs.create("similarity_hist.tsv");
  write_similarity_hist(sh, sims, corpus_source(corpus));
  std::cout << "similarity computed for " << sims.size() << " chats ("
            << sim_report.chats_excluded_side_missing << " excluded, side missing)\n";
  return 0;
}

int run_lmm(const PipelineConfig& cfg) {
  const fs::path out = cfg.out_dir;
  require_input(out / "responses.jsonl", "rt");
  const auto responses = load_responses(out / "responses.jsonl");
  ChatRpReport report;
  const auto pairs = chat_rp_pairs(responses, cfg.rp_threshold_min, report);
  const LmmFit fit = fit_random_intercept(pairs, LmmOptions{.method = cfg.lmm_method});
  const LadderReport ladder = model_ladder(pairs, cfg.lmm_method);
  OutputSet outputs(cfg.out_dir);
  auto ls = outputs.create("lmm_summary.tsv");
  write_lmm_summary(ls, fit);
  auto qq = outputs.create("lmm_qq.tsv");
  write_lmm_qq(qq, residual_diagnostics(fit));
  auto lad = outputs.create("lmm_ladder.tsv");
  write_lmm_ladder(lad, ladder);
  std::cout << "lmm fitted on " << fit.n_obs << " chats, " << fit.n_groups
            << " donors; slope " << fmt_double(fit.beta1, 4) << '\n';
  return 0;
}

int run_stability(const PipelineConfig& cfg) {
  const fs::path out = cfg.out_dir;
  require_input(out / "responses.jsonl", "rt");
  require_input(out / "donations_filtered.jsonl", "filter");
  const Corpus corpus =
      load_corpus(out / "messages_filtered.jsonl", out / "donations_filtered.jsonl");
  const auto responses = load_responses(out / "responses.jsonl");
  const auto series = monthly_similarity_all(responses, cfg.stability);
  OutputSet outputs(cfg.out_dir);
  auto ms = outputs.create("monthly_similarity.tsv");
  write_monthly_similarity(ms, series);
  auto mt = outputs.create("mad_per_chat.tsv");
  write_mad_table(mt, mad_histogram(series), corpus_source(corpus));
  std::cout << "monthly similarity written for " << series.size() << " chats\n";
  return 0;
}

int run_calibrate(const PipelineConfig& cfg) {
  const fs::path out = cfg.out_dir;
  require_input(out / "responses.jsonl", "rt");
  const auto responses = load_responses(out / "responses.jsonl");
  const CalibrationTable table = calibrate_threshold(responses, cfg.calibration);
  OutputSet outputs(cfg.out_dir);
  auto ct = outputs.create("calibration.tsv");
  write_calibration(ct, table);
  std::cout << "calibration over " << table.n_month_chats << " month-chats written\n";
  return 0;
}

int run_all(const PipelineConfig& cfg) {
  const PipelineResult result = run_pipeline(cfg);
  std::cout << "pipeline complete: " << result.responses << " responses from "
            << result.filter.chats_out << " chats in " << result.filter.donations_out
            << " donations; " << result.outputs.size() << " artifacts under "
            << cfg.out_dir.string() << '\n';
  return 0;
}

int run_synth(const std::string& spec_file, const std::string& out_dir,
              std::uint64_t seed, bool seed_set) {
  synth::CorpusSpec spec;
  if (!spec_file.empty()) spec = synth::corpus_spec_from_json_file(spec_file);
  if (seed_set) spec.seed = seed;
  const synth::GenResult result = synth::gen_corpus(spec, out_dir);

  // planted regression truth rides along for verification work
  std::ofstream truth(result.root / "planted_truth.tsv", std::ios::binary);
  truth << "donation_id\tchat_index\trp_alter_target\trp_ego_target\tclipped\n";
  for (const auto& p : result.planted)
    truth << p.donation_id << '\t' << p.chat_index << '\t'
          << fmt_double(p.rp_alter_target, 6) << '\t' << fmt_double(p.rp_ego_target, 6)
          << '\t' << (p.clipped ? 1 : 0) << '\n';

  std::cout << "synthesized " << result.messages_written << " messages in "
            << result.files_written << " files under " << result.root.string();
  if (result.clipped_targets) std::cout << " (" << result.clipped_targets << " targets clipped)";
  std::cout << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"chat export metadata pipeline: response times and dyadic reciprocity"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string synth_spec;

  const auto add_common = [&](CLI::App* cmd, bool with_input) {
    if (with_input) cmd->add_option("--in", opts.in_dir, "input corpus directory");
    cmd->add_option("--out", opts.out_dir, "output directory for artifacts");
    cmd->add_option("--source", opts.source, "whatsapp|instagram")
        ->check(CLI::IsMember({"whatsapp", "instagram"}));
    cmd->add_option("--aggregation", opts.aggregation, "first|last block timestamp")
        ->check(CLI::IsMember({"first", "last"}));
    cmd->add_option("--rp-threshold", opts.rp_threshold, "RP threshold in minutes");
    cmd->add_option("--min-per-side", opts.min_per_side,
                    "responses per side per month for monthly similarity");
    cmd->add_option("--reps", opts.reps, "calibration repetitions");
    cmd->add_option("--seed", opts.seed, "seed for randomized stages");
    cmd->add_option("--config", opts.config_file, "pipeline config JSON");
    return cmd;
  };

  auto* ingest = add_common(app.add_subcommand("ingest", "parse raw exports"), true);
  auto* clean = add_common(app.add_subcommand("clean", "data cleaning"), false);
  auto* filter = add_common(app.add_subcommand("filter", "quality filters"), false);
  auto* rt = add_common(app.add_subcommand("rt", "block merge + response times"), false);
  auto* report = add_common(app.add_subcommand("report", "general stats, ECDF, word counts"), false);
  auto* similarity =
      add_common(app.add_subcommand("similarity", "per-chat similarity"), false);
  auto* lmm = add_common(app.add_subcommand("lmm", "random-intercept model"), false);
  auto* stability =
      add_common(app.add_subcommand("stability", "monthly similarity + MAD"), false);
  auto* calibrate =
      add_common(app.add_subcommand("calibrate", "subsampling noise calibration"), false);
  auto* all = add_common(app.add_subcommand("all", "full pipeline"), true);

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
  synth_cmd->add_option("--spec", synth_spec, "corpus spec JSON");
  synth_cmd->add_option("--out", opts.out_dir, "corpus output directory");
  synth_cmd->add_option("--seed", opts.seed, "override spec seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1; // usage errors exit 1
  }

  try {
    if (synth_cmd->parsed())
      return run_synth(synth_spec, opts.out_dir, opts.seed,
                       synth_cmd->count("--seed") > 0);

    CLI::App* active = nullptr;
    for (auto* cmd : {ingest, clean, filter, rt, report, similarity, lmm, stability,
                      calibrate, all})
      if (cmd->parsed()) active = cmd;
    const PipelineConfig cfg = build_config(opts, *active);

    if (ingest->parsed()) return run_ingest(cfg);
    if (clean->parsed()) return run_clean(cfg);
    if (filter->parsed()) return run_filter(cfg);
    if (rt->parsed()) return run_rt(cfg);
    if (report->parsed()) return run_report(cfg);
    if (similarity->parsed()) return run_similarity(cfg);
    if (lmm->parsed()) return run_lmm(cfg);
    if (stability->parsed()) return run_stability(cfg);
    if (calibrate->parsed()) return run_calibrate(cfg);
    if (all->parsed()) return run_all(cfg);
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
