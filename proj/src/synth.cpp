#include "chatmeta/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "chatmeta/error.hpp"

namespace chatmeta {
namespace synth {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

const char* kWordBank[] = {
    "ok",   "sure",  "later", "maybe", "tomorrow", "done",  "nice", "really",
    "yes",  "no",    "see",   "you",   "soon",     "good",  "idea", "thanks",
    "call", "home",  "today", "right", "sounds",   "great", "wait", "going",
};
constexpr int kWordBankSize = 24;

struct Rng {
  std::mt19937_64 gen;

  explicit Rng(std::uint64_t seed) : gen(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(gen); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  }
  double normal(double mean, double sd) {
    return std::normal_distribution<double>(mean, sd)(gen);
  }
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(gen);
  }
};

constexpr double kGapCapMinutes = 5256000.0; // ten years; keeps dates sane

double sample_gap(const RtMixture& m, Rng& rng) {
  if (rng.uniform() < m.w_fast)
    return std::min(std::exp(m.lognorm_mu + m.lognorm_sigma * rng.normal(0.0, 1.0)),
                    kGapCapMinutes);
  const double u = std::max(rng.uniform(), 1e-12);
  return std::min(m.pareto_xm / std::pow(u, 1.0 / m.tail_exponent), kGapCapMinutes);
}

int sample_word_count(Rng& rng) {
  const double wc = std::exp(rng.normal(1.0, 0.8));
  return std::clamp(static_cast<int>(std::lround(wc)), 1, 400);
}

std::string make_body(int words, int& bank_pos) {
  std::string s;
  for (int i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += kWordBank[bank_pos % kWordBankSize];
    ++bank_pos;
  }
  return s;
}

struct SynthMessage {
  std::int64_t ts_min = 0;
  bool from_ego = false;
  int word_count = 1;
  bool media = false;
  int audio_seconds = 0; // > 0 marks an audio message (instagram)
};

struct ChatPlan {
  std::vector<SynthMessage> messages;
  std::string alter_name;
};

// Generates one chat's message stream. Turns alternate between ego and
// alter; each turn may burst into several quick messages; the gap between a
// turn and the previous turn's last message is the planted response time.
ChatPlan gen_chat(const CorpusSpec& spec, const DyadProfile& profile, Rng& rng) {
  ChatPlan plan;

  RtMixture ego_mix = solve_mixture(profile.rp5_ego_target, profile.tail_exponent);
  RtMixture alter_mix = solve_mixture(profile.rp5_alter_target, profile.tail_exponent);
  double burst_w = profile.burst_mixture_weight;

  const int months = std::max(1, spec.months_per_chat);
  const int base_quota = spec.messages_per_chat / months;
  int remainder = spec.messages_per_chat % months;

  bool ego_turn = rng.uniform() < 0.5;

  for (int m = 0; m < months; ++m) {
    if (profile.drift && m >= profile.drift->month_index) {
      const auto& d = *profile.drift;
      ego_mix = solve_mixture(d.rp5_ego_target, d.tail_exponent);
      alter_mix = solve_mixture(d.rp5_alter_target, d.tail_exponent);
      burst_w = d.burst_mixture_weight;
    }

    int quota = base_quota + (remainder > 0 ? 1 : 0);
    if (remainder > 0) --remainder;
    if (quota == 0) continue;

    const int month0 = (spec.start_month - 1) + m;
    const std::int64_t month_start = minutes_from_civil(
        spec.start_year + month0 / 12, static_cast<unsigned>(month0 % 12 + 1), 1, 0, 0);
    const int next0 = month0 + 1;
    const std::int64_t month_end = minutes_from_civil(
        spec.start_year + next0 / 12, static_cast<unsigned>(next0 % 12 + 1), 1, 0, 0);

    // each month opens fresh; the gap back to the previous month's tail is
    // whatever the calendar makes of it
    std::int64_t cur = month_start + rng.uniform_int(0, months > 1 ? 600 : 1439);

    int produced = 0;
    bool month_first_turn = true;
    while (produced < quota) {
      if (!month_first_turn) {
        // response gap drawn from the responder's own mixture
        const double gap = sample_gap(ego_turn ? ego_mix : alter_mix, rng);
        std::int64_t next_ts =
            plan.messages.back().ts_min + static_cast<std::int64_t>(std::floor(gap));
        if (months > 1) {
          // keep the month's conversation inside the month
          const std::int64_t margin = 3LL * (quota - produced) + 60;
          next_ts = std::min(next_ts, month_end - margin);
          next_ts = std::max(next_ts, plan.messages.back().ts_min);
        }
        cur = next_ts;
      }
      month_first_turn = false;

      int burst = 1;
      if (rng.uniform() < burst_w) burst += rng.uniform_int(1, 3);
      burst = std::min(burst, quota - produced);

      for (int b = 0; b < burst; ++b) {
        SynthMessage msg;
        msg.ts_min = cur;
        msg.from_ego = ego_turn;
        msg.word_count = sample_word_count(rng);
        if (spec.source == Source::instagram && rng.uniform() < spec.audio_prob) {
          msg.audio_seconds = rng.uniform_int(1, 120);
          msg.word_count = 0;
        } else if (rng.uniform() < spec.media_prob) {
          msg.media = true;
          msg.word_count = 0;
        }
        plan.messages.push_back(msg);
        ++produced;
        if (b + 1 < burst) cur += rng.uniform_int(0, 2);
      }
      ego_turn = !ego_turn;
    }
  }
  return plan;
}

void write_whatsapp_chat(const std::filesystem::path& file, const ChatPlan& plan,
                         const std::string& ego_name, const std::string& alter_name) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + file.string());
  int bank_pos = 0;
  for (const auto& msg : plan.messages) {
    int year;
    unsigned month, day, hour, minute;
    civil_from_minutes(msg.ts_min, year, month, day, hour, minute);
    char head[64];
    std::snprintf(head, sizeof(head), "%02u.%02u.%02d, %02u:%02u - ", day, month,
                  year % 100, hour, minute);
    out << head << (msg.from_ego ? ego_name : alter_name) << ": ";
    if (msg.media)
      out << "<Media omitted>";
    else
      out << make_body(msg.word_count, bank_pos);
    out << '\n';
  }
}

void write_instagram_chat(const std::filesystem::path& dir, const ChatPlan& plan,
                          const std::string& ego_name, const std::string& alter_name) {
  std::filesystem::create_directories(dir);
  json doc;
  doc["participants"] = json::array({{{"name", ego_name}}, {{"name", alter_name}}});
  json messages = json::array();
  int bank_pos = 0;
  // newest first, as the platform exports them
  for (auto it = plan.messages.rbegin(); it != plan.messages.rend(); ++it) {
    json entry;
    entry["sender_name"] = it->from_ego ? ego_name : alter_name;
    entry["timestamp_ms"] = it->ts_min * 60000;
    if (it->audio_seconds > 0)
      entry["audio_files"] = json::array({{{"duration_seconds", it->audio_seconds},
                                           {"uri", "audio/clip.aac"}}});
    else if (it->media)
      entry["photos"] = json::array({{{"uri", "media/photo.jpg"}}});
    else
      entry["content"] = make_body(it->word_count, bank_pos);
    messages.push_back(std::move(entry));
  }
  doc["messages"] = std::move(messages);

  std::ofstream out(dir / "message_1.json", std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write under " + dir.string());
  out << doc.dump(2) << '\n';
}

} // namespace

double mixture_rp5(const RtMixture& m) {
  // integer rt = max(1, floor(gap)) <= 5  <=>  continuous gap < 6
  const double f_fast = normal_cdf((std::log(6.0) - m.lognorm_mu) / m.lognorm_sigma);
  const double f_tail =
      m.pareto_xm < 6.0 ? 1.0 - std::pow(m.pareto_xm / 6.0, m.tail_exponent) : 0.0;
  return m.w_fast * f_fast + (1.0 - m.w_fast) * f_tail;
}

RtMixture solve_mixture(double rp5_target, double tail_exponent) {
  if (!(rp5_target > 0.0 && rp5_target < 1.0))
    throw Error(Errc::infeasible_target, "rp5 target must be in (0,1)");
  if (!(tail_exponent > 1.0))
    throw Error(Errc::infeasible_target, "tail exponent must exceed 1");

  RtMixture m;
  m.tail_exponent = tail_exponent;

  m.w_fast = 0.0;
  const double lo_val = mixture_rp5(m);
  m.w_fast = 1.0;
  const double hi_val = mixture_rp5(m);
  if (rp5_target <= lo_val) {
    m.w_fast = 0.0;
    m.clipped = true;
    return m;
  }
  if (rp5_target >= hi_val) {
    m.w_fast = 1.0;
    m.clipped = true;
    return m;
  }

  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    m.w_fast = 0.5 * (lo + hi);
    const double v = mixture_rp5(m);
    if (std::abs(v - rp5_target) < 1e-4 / 4.0) break;
    (v < rp5_target ? lo : hi) = m.w_fast;
  }
  return m;
}

CorpusSpec corpus_spec_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_config, "cannot read spec file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_config, path.string() + ": " + e.what());
  }

  CorpusSpec spec;
  const auto get_int = [&](const char* key, int& out) {
    if (j.contains(key)) out = j.at(key).get<int>();
  };
  const auto get_double = [&](const char* key, double& out) {
    if (j.contains(key)) out = j.at(key).get<double>();
  };
  get_int("n_donors", spec.n_donors);
  get_int("chats_per_donor", spec.chats_per_donor);
  get_int("messages_per_chat", spec.messages_per_chat);
  get_int("months_per_chat", spec.months_per_chat);
  get_double("slope_beta1", spec.slope_beta1);
  if (j.contains("intercept_beta0")) spec.intercept_beta0 = j.at("intercept_beta0").get<double>();
  get_double("sigma_u", spec.sigma_u);
  get_double("sigma_e", spec.sigma_e);
  if (j.contains("source")) spec.source = source_from_name(j.at("source").get<std::string>());
  if (j.contains("alter_band_lo")) spec.alter_band_lo = j.at("alter_band_lo").get<double>();
  if (j.contains("alter_band_hi")) spec.alter_band_hi = j.at("alter_band_hi").get<double>();
  get_double("tail_exponent", spec.tail_exponent);
  get_double("burst_mixture_weight", spec.burst_mixture_weight);
  get_double("media_prob", spec.media_prob);
  get_double("audio_prob", spec.audio_prob);
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  get_int("start_year", spec.start_year);
  get_int("start_month", spec.start_month);
  if (j.contains("drift")) {
    CorpusSpec::Drift d;
    const auto& jd = j.at("drift");
    if (jd.contains("month_index")) d.month_index = jd.at("month_index").get<int>();
    if (jd.contains("new_ego_target")) d.new_ego_target = jd.at("new_ego_target").get<double>();
    if (jd.contains("new_alter_target"))
      d.new_alter_target = jd.at("new_alter_target").get<double>();
    spec.drift = d;
  }
  if (spec.n_donors < 1 || spec.chats_per_donor < 1 || spec.messages_per_chat < 1)
    throw Error(Errc::invalid_config, "corpus spec counts must be >= 1");
  if (spec.sigma_u < 0 || spec.sigma_e < 0)
    throw Error(Errc::invalid_config, "variance components must be >= 0");
  return spec;
}

GenResult gen_corpus(const CorpusSpec& spec, const std::filesystem::path& out_dir) {
  GenResult result;
  result.root = out_dir;
  std::filesystem::create_directories(out_dir);

  for (int donor = 0; donor < spec.n_donors; ++donor) {
    Rng donor_rng(splitmix64(splitmix64(spec.seed) ^ (0xD0D0ULL + donor)));
    const double u_j = donor_rng.normal(0.0, spec.sigma_u);

    char donor_name[32], donation_id[32];
    std::snprintf(donor_name, sizeof(donor_name), "Donor D%03d", donor);
    std::snprintf(donation_id, sizeof(donation_id), "donor_%03d", donor);
    const std::filesystem::path donation_dir = out_dir / donation_id;
    std::filesystem::create_directories(donation_dir);

    if (spec.source == Source::instagram) {
      std::ofstream profile(donation_dir / "profile.json", std::ios::binary);
      profile << json{{"name", donor_name}}.dump(2) << '\n';
      ++result.files_written;
    }

    for (int chat = 0; chat < spec.chats_per_donor; ++chat) {
      Rng rng(splitmix64(splitmix64(spec.seed ^ 0xC4A7ULL) ^
                         (static_cast<std::uint64_t>(donor) << 20) ^
                         static_cast<std::uint64_t>(chat)));

      const double x = rng.uniform(spec.band_lo(), spec.band_hi());
      const double y_raw =
          spec.beta0() + spec.slope_beta1 * x + u_j + rng.normal(0.0, spec.sigma_e);
      const double y = std::clamp(y_raw, 0.01, 0.99);

      PlantedChat planted;
      planted.donation_id = donation_id;
      planted.donor_index = donor;
      planted.chat_index = chat;
      planted.rp_alter_target = x;
      planted.rp_ego_target = y;
      planted.clipped = y != y_raw;
      if (planted.clipped) ++result.clipped_targets;

      DyadProfile profile;
      profile.rp5_ego_target = y;
      profile.rp5_alter_target = x;
      profile.tail_exponent = spec.tail_exponent;
      profile.burst_mixture_weight = spec.burst_mixture_weight;
      if (spec.drift) {
        DyadProfile::Drift drift;
        drift.month_index = spec.drift->month_index;
        drift.rp5_ego_target = spec.drift->new_ego_target.value_or(y);
        drift.rp5_alter_target = spec.drift->new_alter_target.value_or(x);
        drift.tail_exponent = spec.tail_exponent;
        drift.burst_mixture_weight = spec.burst_mixture_weight;
        profile.drift = drift;
      }

      const ChatPlan plan = gen_chat(spec, profile, rng);
      result.messages_written += static_cast<std::int64_t>(plan.messages.size());

      char alter_name[48], chat_name[32];
      std::snprintf(alter_name, sizeof(alter_name), "Contact D%03d-C%02d", donor, chat);
      std::snprintf(chat_name, sizeof(chat_name), "chat_%02d", chat);

      if (spec.source == Source::whatsapp) {
        write_whatsapp_chat(donation_dir / (std::string(chat_name) + ".txt"), plan,
                            donor_name, alter_name);
      } else {
        write_instagram_chat(donation_dir / "messages" / "inbox" / chat_name, plan,
                             donor_name, alter_name);
      }
      ++result.files_written;
      result.planted.push_back(std::move(planted));
    }
  }
  return result;
}

std::vector<ChatRpPair> planted_pairs(const GenResult& result) {
  std::vector<ChatRpPair> pairs;
  pairs.reserve(result.planted.size());
  for (const auto& p : result.planted) {
    ChatRpPair pair;
    pair.donor_id = p.donation_id;
    pair.chat_id = "chat_" + std::to_string(p.chat_index);
    pair.rp_ego = p.rp_ego_target;
    pair.rp_alter = p.rp_alter_target;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

} // namespace synth
} // namespace chatmeta
