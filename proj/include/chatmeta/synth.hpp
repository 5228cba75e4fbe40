#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chatmeta/metrics.hpp"
#include "chatmeta/types.hpp"

namespace chatmeta {
namespace synth {

// Response-time gap model: a fast lognormal component mixed with a Pareto
// tail. The mixture weight is solved so that P(rt <= 5 min) hits the
// requested response probability; the tail exponent controls how heavy the
// slow side is.
struct RtMixture {
  double w_fast = 0.5;
  double lognorm_mu = 0.4054651081; // ln 1.5
  double lognorm_sigma = 1.0;
  double pareto_xm = 5.0;
  double tail_exponent = 1.5;
  bool clipped = false; // target outside the feasible band, weight clamped
};

RtMixture solve_mixture(double rp5_target, double tail_exponent);

// P(continuous gap < 6) == P(integer rt <= 5) for this mixture.
double mixture_rp5(const RtMixture& m);

struct DyadProfile {
  double rp5_ego_target = 0.6888;
  double rp5_alter_target = 0.6888;
  double tail_exponent = 1.5;
  double burst_mixture_weight = 0.25; // chance a turn has follow-up messages

  struct Drift {
    int month_index = 0; // profile below applies from this month on
    double rp5_ego_target = 0.6888;
    double rp5_alter_target = 0.6888;
    double tail_exponent = 1.5;
    double burst_mixture_weight = 0.25;
  };
  std::optional<Drift> drift;
};

struct CorpusSpec {
  int n_donors = 50;
  int chats_per_donor = 8;
  int messages_per_chat = 160;
  int months_per_chat = 1; // >1 anchors conversation windows to calendar months

  double slope_beta1 = 0.8;
  // Defaults to band_center * (1 - beta1) so ego and alter targets share
  // the profile mean; override for custom regressions.
  std::optional<double> intercept_beta0;
  double sigma_u = 0.05;
  double sigma_e = 0.03;

  Source source = Source::whatsapp; // selects export format AND rp band
  // alter RP targets drawn uniformly from this band; defaults follow source
  std::optional<double> alter_band_lo, alter_band_hi;

  double tail_exponent = 1.5;
  double burst_mixture_weight = 0.25;
  double media_prob = 0.02;
  double audio_prob = 0.02; // instagram only

  std::uint64_t seed = 0;
  int start_year = 2022;
  int start_month = 1;

  // Optional planted behavior change applied to every chat (stability tests).
  struct Drift {
    int month_index = 5;
    std::optional<double> new_ego_target;
    std::optional<double> new_alter_target;
  };
  std::optional<Drift> drift;

  double band_center() const {
    return source == Source::whatsapp ? 0.6888 : 0.4362;
  }
  double band_lo() const { return alter_band_lo.value_or(band_center() - 0.14); }
  double band_hi() const { return alter_band_hi.value_or(band_center() + 0.14); }
  double beta0() const {
    return intercept_beta0.value_or(band_center() * (1.0 - slope_beta1));
  }
};

CorpusSpec corpus_spec_from_json_file(const std::filesystem::path& path);

// Ground truth for one generated chat: the regression inputs before any
// message-level sampling noise.
struct PlantedChat {
  std::string donation_id;
  int donor_index = 0;
  int chat_index = 0;
  double rp_alter_target = 0; // x
  double rp_ego_target = 0;   // y = beta0 + beta1*x + u_donor + e, clipped
  bool clipped = false;
};

struct GenResult {
  std::filesystem::path root;
  std::vector<PlantedChat> planted;
  int files_written = 0;
  int clipped_targets = 0; // regression targets or mixture weights clamped
  std::int64_t messages_written = 0;
};

// Writes a full synthetic corpus as raw export trees (one subdirectory per
// donation) so the entire ingest pipeline can run on it. Fully deterministic
// for a given spec.
GenResult gen_corpus(const CorpusSpec& spec, const std::filesystem::path& out_dir);

// The planted pairs as fit-ready rows (donor id + targets).
std::vector<ChatRpPair> planted_pairs(const GenResult& result);

} // namespace synth
} // namespace chatmeta
