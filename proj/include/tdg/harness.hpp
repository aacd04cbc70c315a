#pragma once

// Experiment driver: run configurations and presets, the epoch loop
// (exploratory training episodes followed by deterministic test episodes),
// aggregation across seeds, CSV export and melody playback.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdg/agent.hpp"
#include "tdg/config.hpp"
#include "tdg/dsp.hpp"
#include "tdg/env.hpp"
#include "tdg/kinematics.hpp"
#include "tdg/wav.hpp"

namespace tdg::harness {

struct RunConfig {
  std::string preset = "baseline";
  std::string label = "baseline";
  env::EnvConfig env;
  agent::AgentConfig agent;
  int epochs = 30;
  int train_episodes_per_epoch = 25;
  int test_episodes_per_epoch = 10;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7};

  int total_train_episodes() const { return epochs * train_episodes_per_epoch; }

  void validate() const {
    if (epochs <= 0 || train_episodes_per_epoch <= 0 || test_episodes_per_epoch <= 0)
      throw std::invalid_argument("run config: epoch and episode counts must be positive");
    if (seeds.empty()) throw std::invalid_argument("run config: need at least one seed");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
      throw std::invalid_argument("run config: seeds must be distinct");
    env.validate();
    agent.validate();
  }
};

// ---------------------------------------------------------------------------
// Settings as dotted key/value pairs.

inline std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) out += (i ? "," : "") + std::to_string(seeds[i]);
  return out;
}

inline std::vector<std::uint64_t> parse_seeds(const std::string& v) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = config::trim(item);
    if (item.empty()) continue;
    const long long s = config::parse_int(item);
    if (s < 0) throw std::invalid_argument("seeds must be non-negative");
    out.push_back(static_cast<std::uint64_t>(s));
  }
  return out;
}

// Every tunable field, in a fixed order.
inline std::vector<std::pair<std::string, std::string>> settings(const RunConfig& c) {
  using config::format_double;
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {
      {"run.epochs", std::to_string(c.epochs)},
      {"run.train_episodes_per_epoch", std::to_string(c.train_episodes_per_epoch)},
      {"run.test_episodes_per_epoch", std::to_string(c.test_episodes_per_epoch)},
      {"run.seeds", join_seeds(c.seeds)},
      {"env.robot", std::string(kin::to_string(c.env.robot))},
      {"env.actuation", std::string(kin::to_string(c.env.actuation))},
      {"env.transform", std::string(dsp::to_string(c.env.transform.kind))},
      {"env.snr_db", format_double(c.env.snr_db)},
      {"env.epsilon", format_double(c.env.epsilon)},
      {"env.reward", std::string(env::to_string(c.env.reward))},
      {"env.reset_between_episodes", b(c.env.reset_between_episodes)},
      {"env.antenna_y_jitter", format_double(c.env.antenna_y_jitter)},
      {"env.pitch_map", std::string(env::to_string(c.env.pitch_map))},
      {"env.goals", std::string(env::to_string(c.env.goals))},
      {"agent.gamma", format_double(c.agent.gamma)},
      {"agent.lr", format_double(c.agent.lr)},
      {"agent.random_action_prob", format_double(c.agent.random_action_prob)},
      {"agent.action_noise_scale", format_double(c.agent.action_noise_scale)},
      {"agent.her_ratio", format_double(c.agent.her_ratio)},
      {"agent.batch_size", std::to_string(c.agent.batch_size)},
      {"agent.updates_per_episode", std::to_string(c.agent.updates_per_episode)},
      {"agent.buffer_capacity", std::to_string(c.agent.buffer_capacity)},
      {"agent.tau", format_double(c.agent.tau)},
      {"agent.her_segment_coherent", b(c.agent.her_segment_coherent)},
      {"agent.normalize_inputs", b(c.agent.normalize_inputs)},
      {"agent.clip_target", b(c.agent.clip_target)},
      {"agent.action_l2", format_double(c.agent.action_l2)},
  };
}

inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  using config::parse_bool;
  using config::parse_double;
  auto count = [&](const std::string& v) {
    const long long n = config::parse_int(v);
    if (n < 0) throw std::invalid_argument(key + " must be non-negative");
    return n;
  };
  try {
    if (key == "run.epochs") c.epochs = static_cast<int>(count(value));
    else if (key == "run.train_episodes_per_epoch") c.train_episodes_per_epoch = static_cast<int>(count(value));
    else if (key == "run.test_episodes_per_epoch") c.test_episodes_per_epoch = static_cast<int>(count(value));
    else if (key == "run.seeds") c.seeds = parse_seeds(value);
    else if (key == "run.preset") c.preset = value;
    else if (key == "run.label") c.label = value;
    else if (key == "env.robot") c.env.robot = kin::parse_robot_kind(value);
    else if (key == "env.actuation") c.env.actuation = kin::parse_action_space(value);
    else if (key == "env.transform") c.env.transform = dsp::TransformConfig::of(dsp::parse_transform_kind(value));
    else if (key == "env.snr_db") c.env.snr_db = parse_double(value);
    else if (key == "env.epsilon") c.env.epsilon = parse_double(value);
    else if (key == "env.reward") c.env.reward = env::parse_reward_kind(value);
    else if (key == "env.reset_between_episodes") c.env.reset_between_episodes = parse_bool(value);
    else if (key == "env.antenna_y_jitter") c.env.antenna_y_jitter = parse_double(value);
    else if (key == "env.pitch_map") c.env.pitch_map = env::parse_pitch_map(value);
    else if (key == "env.goals") c.env.goals = env::parse_goal_set(value);
    else if (key == "agent.gamma") c.agent.gamma = parse_double(value);
    else if (key == "agent.lr") c.agent.lr = parse_double(value);
    else if (key == "agent.random_action_prob") c.agent.random_action_prob = parse_double(value);
    else if (key == "agent.action_noise_scale") c.agent.action_noise_scale = parse_double(value);
    else if (key == "agent.her_ratio") c.agent.her_ratio = parse_double(value);
    else if (key == "agent.batch_size") c.agent.batch_size = static_cast<std::size_t>(count(value));
    else if (key == "agent.updates_per_episode") c.agent.updates_per_episode = static_cast<std::size_t>(count(value));
    else if (key == "agent.buffer_capacity") c.agent.buffer_capacity = static_cast<std::size_t>(count(value));
    else if (key == "agent.tau") c.agent.tau = parse_double(value);
    else if (key == "agent.her_segment_coherent") c.agent.her_segment_coherent = parse_bool(value);
    else if (key == "agent.normalize_inputs") c.agent.normalize_inputs = parse_bool(value);
    else if (key == "agent.clip_target") c.agent.clip_target = parse_bool(value);
    else if (key == "agent.action_l2") c.agent.action_l2 = parse_double(value);
    else throw std::invalid_argument("unknown setting '" + key + "'");
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    if (what.rfind("unknown setting", 0) == 0) throw;
    throw std::invalid_argument(key + " = " + value + ": " + what);
  }
}

// Keys whose values differ between two configs.
inline std::vector<std::string> differing_settings(const RunConfig& a, const RunConfig& b) {
  const auto sa = settings(a);
  const auto sb = settings(b);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < sa.size(); ++i)
    if (sa[i].second != sb[i].second) out.push_back(sa[i].first);
  return out;
}

// ---------------------------------------------------------------------------
// Presets.

inline RunConfig baseline_config() {
  RunConfig c;
  c.preset = "baseline";
  c.label = "baseline";
  return c;
}

// 1-DOF cart: argmax-CQT reward, position kept across episodes, fixed antenna.
inline RunConfig cart1d_config() {
  RunConfig c = baseline_config();
  c.preset = "cart1d";
  c.label = "cart1d";
  c.env.robot = kin::RobotKind::Cart1D;
  c.env.actuation = kin::ActionSpace::Cartesian;
  c.env.reward = env::RewardKind::ArgmaxCQT;
  c.env.reset_between_episodes = false;
  c.env.antenna_y_jitter = 0.0;
  return c;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"baseline",   "transforms",     "action-spaces", "her-ablation",
                                              "snr-sweep",  "generalization", "tdg-ablation",  "cart1d"};
  return names;
}

inline std::string preset_summary(const std::string& name) {
  if (name == "baseline") return "6-DOF arm, CQT, inverse kinematics, 38 dB SNR, HER 4:1";
  if (name == "transforms") return "baseline with CQT / STFT / mel-STFT front-ends";
  if (name == "action-spaces") return "baseline with Cartesian (IK) vs joint actuation";
  if (name == "her-ablation") return "baseline with HER ratio 4 vs 0";
  if (name == "snr-sweep") return "baseline at 38 / 16 / 8 / 0 dB SNR";
  if (name == "generalization") return "off-scale goal tones; linear distance-to-pitch map";
  if (name == "tdg-ablation") return "one constant goal note per episode (no time-dependent goal)";
  if (name == "cart1d") return "1-DOF cart, argmax-CQT reward, no reset between episodes";
  return "";
}

namespace detail {

template <typename Fn>
RunConfig variant(const RunConfig& base, const std::string& preset, const std::string& label, Fn&& edit) {
  RunConfig c = base;
  c.preset = preset;
  c.label = label;
  edit(c);
  return c;
}

}  // namespace detail

// Configs of a preset; each differs from `base` in one field. The base
// defaults to the arm baseline; pass cart1d_config() to run an ablation on
// the cart.
inline std::vector<RunConfig> preset(const std::string& name, std::optional<RunConfig> base_override = std::nullopt) {
  const RunConfig base = base_override ? *base_override : baseline_config();
  using detail::variant;
  std::vector<RunConfig> out;
  if (name == "baseline") {
    out.push_back(variant(base, name, "baseline", [](RunConfig&) {}));
  } else if (name == "cart1d") {
    out.push_back(cart1d_config());
  } else if (name == "transforms") {
    for (auto kind : {dsp::TransformKind::CQT, dsp::TransformKind::STFT, dsp::TransformKind::MEL})
      out.push_back(variant(base, name, std::string(dsp::to_string(kind)),
                            [&](RunConfig& c) { c.env.transform = dsp::TransformConfig::of(kind); }));
  } else if (name == "action-spaces") {
    for (auto space : {kin::ActionSpace::Cartesian, kin::ActionSpace::Joint})
      out.push_back(variant(base, name, std::string(kin::to_string(space)), [&](RunConfig& c) { c.env.actuation = space; }));
  } else if (name == "her-ablation") {
    out.push_back(variant(base, name, "her4", [](RunConfig& c) { c.agent.her_ratio = 4.0; }));
    out.push_back(variant(base, name, "her0", [](RunConfig& c) { c.agent.her_ratio = 0.0; }));
  } else if (name == "snr-sweep") {
    for (int snr : {38, 16, 8, 0})
      out.push_back(variant(base, name, "snr" + std::to_string(snr), [&](RunConfig& c) { c.env.snr_db = snr; }));
  } else if (name == "generalization") {
    out.push_back(variant(base, name, "offscale", [](RunConfig& c) { c.env.goals = env::GoalSet::OffScale; }));
    out.push_back(variant(base, name, "linear", [](RunConfig& c) { c.env.pitch_map = env::PitchMap::Linear; }));
  } else if (name == "tdg-ablation") {
    out.push_back(variant(base, name, "single-note", [](RunConfig& c) { c.env.goals = env::GoalSet::SingleNote; }));
  } else {
    std::string names;
    for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown preset '" + name + "'; available: " + names);
  }
  for (const auto& c : out) c.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Config files: [run]/[env]/[agent] hold the shared settings, each
// "[variant <label>]" section lists the dotted keys it overrides.

inline std::string to_config_text(const std::vector<RunConfig>& variants) {
  if (variants.empty()) throw std::invalid_argument("no configs to write");
  const RunConfig& base = variants.front();
  std::ostringstream os;
  os << "# preset " << base.preset;
  const auto summary = preset_summary(base.preset);
  if (!summary.empty()) os << ": " << summary;
  os << "\n\n[run]\npreset = " << base.preset << "\n";
  std::string section = "run";
  for (const auto& [key, value] : settings(base)) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      os << "\n[" << sec << "]\n";
      section = sec;
    }
    os << key.substr(dot + 1) << " = " << value << "\n";
  }
  if (variants.size() > 1 || variants.front().label != base.preset) {
    for (const auto& v : variants) {
      os << "\n[variant " << v.label << "]\n";
      for (const auto& key : differing_settings(base, v)) {
        for (const auto& [k, val] : settings(v))
          if (k == key) os << key << " = " << val << "\n";
      }
    }
  }
  return os.str();
}

inline std::vector<RunConfig> from_config_sections(const std::vector<config::Section>& sections) {
  RunConfig base;
  base.preset = "custom";
  base.label = "custom";
  bool any_variant = false;
  for (const auto& s : sections) {
    if (s.name == "variant") {
      any_variant = true;
      continue;
    }
    if (s.name != "run" && s.name != "env" && s.name != "agent")
      throw std::invalid_argument("unknown config section [" + s.name + "]");
    for (const auto& [k, v] : s.entries) apply_setting(base, s.name + "." + k, v);
  }
  if (base.label == "custom") base.label = base.preset;

  std::vector<RunConfig> out;
  if (!any_variant) {
    out.push_back(base);
  } else {
    for (const auto& s : sections) {
      if (s.name != "variant") continue;
      if (s.qualifier.empty()) throw std::invalid_argument("[variant] section needs a label");
      RunConfig v = base;
      v.label = s.qualifier;
      for (const auto& [k, val] : s.entries) apply_setting(v, k, val);
      out.push_back(v);
    }
  }
  for (const auto& c : out) c.validate();
  return out;
}

inline std::vector<RunConfig> load_config_file(const std::string& path) {
  return from_config_sections(config::parse_file(path));
}

// ---------------------------------------------------------------------------
// Note names.

// Scientific pitch notation (A4 = 440 Hz, equal temperament) or a plain
// frequency in Hz.
inline double parse_note(const std::string& text) {
  const std::string s = config::trim(text);
  if (s.empty()) throw std::invalid_argument("empty note name");
  if (std::isdigit(static_cast<unsigned char>(s[0]))) {
    const double f = config::parse_double(s);
    if (!(f > 0.0)) throw std::invalid_argument("note frequency must be positive");
    return f;
  }
  static const std::map<char, int> offsets{{'C', -9}, {'D', -7}, {'E', -5}, {'F', -4},
                                           {'G', -2}, {'A', 0},  {'B', 2}};
  const auto it = offsets.find(static_cast<char>(std::toupper(static_cast<unsigned char>(s[0]))));
  if (it == offsets.end()) throw std::invalid_argument("unknown note name '" + s + "'");
  int semis = it->second;
  std::size_t pos = 1;
  while (pos < s.size() && (s[pos] == '#' || s[pos] == 'b')) semis += s[pos++] == '#' ? 1 : -1;
  if (pos >= s.size()) throw std::invalid_argument("note '" + s + "' lacks an octave number");
  long long octave = 0;
  try {
    octave = config::parse_int(s.substr(pos));
  } catch (const std::exception&) {
    throw std::invalid_argument("unknown note name '" + s + "'");
  }
  semis += static_cast<int>(12 * (octave - 4));
  return env::kA4 * std::pow(2.0, semis / 12.0);
}

inline std::vector<double> parse_notes(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (config::trim(item).empty()) continue;
    out.push_back(parse_note(item));
  }
  return out;
}

// Fits a melody onto the eight goal segments: extra notes are dropped, a
// short melody holds its last note.
inline std::array<double, env::kSegments> fit_melody(const std::vector<double>& notes) {
  if (notes.empty()) throw std::invalid_argument("melody has no notes");
  std::array<double, env::kSegments> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = notes[std::min(i, notes.size() - 1)];
  return out;
}

// ---------------------------------------------------------------------------
// Episodes and runs.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::vector<double> features_of(const env::Observation& obs) {
  std::vector<double> f = obs.audio.bins;
  f.insert(f.end(), obs.proprio.begin(), obs.proprio.end());
  return f;
}

struct StepTrace {
  int step = 0;
  double goal_freq = 0.0;
  double achieved_freq = 0.0;
  double reward = 0.0;
  bool success = false;
};

struct EpisodeOutcome {
  int successful_steps = 0;
  double reward_sum = 0.0;
  std::vector<StepTrace> trace;
  agent::EpisodeRecord record;
};

using PolicyFn = std::function<std::vector<double>(std::span<const double>, std::span<const double>)>;

// Plays one episode from the env's current state with the given policy.
inline EpisodeOutcome play_episode(env::ThereminEnv& environment, const PolicyFn& policy,
                                   std::optional<env::GoalTimeline> timeline = std::nullopt, bool keep_record = true) {
  EpisodeOutcome out;
  env::Observation obs = timeline ? environment.reset(*timeline) : environment.reset();
  auto goal_ptr = [&]() {
    const int step = std::min(environment.steps_taken(), env::kEpisodeSteps - 1);
    return environment.timeline().segment_spectra[static_cast<std::size_t>(env::GoalTimeline::segment_of(step))];
  };
  auto& rec = out.record;
  rec.audio_dim = environment.audio_dim();
  rec.features.push_back(features_of(obs));
  rec.goals.push_back(goal_ptr());
  out.trace.reserve(env::kEpisodeSteps);
  while (!environment.done()) {
    const auto action = policy(rec.features.back(), rec.goals.back()->bins);
    const auto res = environment.step(kin::Action{action, environment.config().actuation});
    out.reward_sum += res.reward;
    out.successful_steps += res.success ? 1 : 0;
    out.trace.push_back({environment.steps_taken() - 1, res.goal_freq, res.obs.achieved_freq, res.reward, res.success});
    if (!keep_record) {
      rec.features.back() = features_of(res.obs);
      rec.goals.back() = goal_ptr();
      continue;
    }
    rec.actions.push_back(action);
    rec.rewards.push_back(res.reward);
    rec.achieved_freqs.push_back(res.obs.achieved_freq);
    rec.features.push_back(features_of(res.obs));
    rec.goals.push_back(goal_ptr());
  }
  if (!keep_record) out.record = {};
  return out;
}

struct TestEpisodeMetrics {
  int epoch = 0;  // 1-based
  int episode_index = 0;
  std::uint64_t seed = 0;
  int successful_steps = 0;
  double mean_reward = 0.0;
};

struct RunResult {
  std::string label;
  std::uint64_t seed = 0;
  int epochs = 0;
  std::vector<TestEpisodeMetrics> tests;
  agent::PolicySnapshot policy;

  // Mean successful steps of each epoch's test episodes.
  std::vector<double> epoch_means() const {
    std::vector<double> sums(static_cast<std::size_t>(epochs), 0.0);
    std::vector<int> counts(static_cast<std::size_t>(epochs), 0);
    for (const auto& t : tests) {
      sums[static_cast<std::size_t>(t.epoch - 1)] += t.successful_steps;
      counts[static_cast<std::size_t>(t.epoch - 1)] += 1;
    }
    for (std::size_t i = 0; i < sums.size(); ++i) sums[i] = counts[i] ? sums[i] / counts[i] : 0.0;
    return sums;
  }
};

struct EpochProgress {
  int epoch = 0;
  double mean_successful_steps = 0.0;
  agent::TrainStats last_train;
};

using ProgressFn = std::function<void(const EpochProgress&)>;

// Agent + environment for one seed.
class Trainer {
 public:
  Trainer(const RunConfig& cfg, std::uint64_t seed)
      : cfg_(cfg),
        seed_(seed),
        env_(std::make_unique<env::ThereminEnv>(cfg.env, splitmix64(2 * seed + 1))),
        agent_(env_->audio_dim() + env_->proprio_dim(), env_->audio_dim(), env_->action_dim(), cfg.agent,
               splitmix64(2 * seed + 2)) {
    cfg_.validate();
  }

  const RunConfig& config() const { return cfg_; }
  env::ThereminEnv& environment() { return *env_; }
  agent::DdpgAgent& agent() { return agent_; }
  const agent::DdpgAgent& agent() const { return agent_; }
  int train_episodes() const { return train_episodes_; }

  // Swaps the environment (e.g. a different pitch map) while keeping the
  // agent and, for the cart, the robot position.
  void replace_environment(const env::EnvConfig& cfg) {
    auto next = std::make_unique<env::ThereminEnv>(cfg, splitmix64(2 * seed_ + 1) ^ 0x5bd1e995ULL);
    if (next->audio_dim() != env_->audio_dim() || next->proprio_dim() != env_->proprio_dim() ||
        next->action_dim() != env_->action_dim())
      throw std::invalid_argument("replacement environment changes the observation or action shape");
    if (cfg.robot == env_->config().robot) next->set_robot(env_->robot());
    cfg_.env = cfg;
    env_ = std::move(next);
  }

  agent::RewardFn reward_fn() const {
    const env::ThereminEnv* e = env_.get();
    return [e](std::span<const double> achieved, std::span<const double> goal) { return e->reward(achieved, goal); };
  }

  agent::TrainStats train_episode() {
    auto outcome = play_episode(*env_, [this](auto s, auto g) { return agent_.select_action(s, g, true); });
    agent_.store(std::move(outcome.record));
    ++train_episodes_;
    return agent_.train(reward_fn());
  }

  EpisodeOutcome test_episode(std::optional<env::GoalTimeline> timeline = std::nullopt) {
    return play_episode(
        *env_, [this](auto s, auto g) { return agent_.select_action(s, g, false); }, std::move(timeline), false);
  }

  // Training episodes then test episodes; returns the test metrics.
  std::vector<TestEpisodeMetrics> run_epoch(int epoch, agent::TrainStats* last = nullptr) {
    for (int i = 0; i < cfg_.train_episodes_per_epoch; ++i) {
      const auto stats = train_episode();
      if (last) *last = stats;
    }
    std::vector<TestEpisodeMetrics> out;
    for (int i = 0; i < cfg_.test_episodes_per_epoch; ++i) {
      const auto res = test_episode();
      out.push_back({epoch, i, seed_, res.successful_steps, res.reward_sum / env::kEpisodeSteps});
    }
    return out;
  }

 private:
  RunConfig cfg_;
  std::uint64_t seed_;
  std::unique_ptr<env::ThereminEnv> env_;
  agent::DdpgAgent agent_;
  int train_episodes_ = 0;
};

// Runs cfg.epochs epochs for one seed. Deterministic in (cfg, seed).
inline RunResult train_run(const RunConfig& cfg, std::uint64_t seed, const ProgressFn& progress = {}) {
  cfg.validate();
  Trainer trainer(cfg, seed);
  RunResult result;
  result.label = cfg.label;
  result.seed = seed;
  result.epochs = cfg.epochs;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    agent::TrainStats stats;
    auto tests = trainer.run_epoch(epoch, &stats);
    if (progress) {
      double mean = 0.0;
      for (const auto& t : tests) mean += t.successful_steps;
      progress({epoch, mean / static_cast<double>(tests.size()), stats});
    }
    result.tests.insert(result.tests.end(), tests.begin(), tests.end());
  }
  result.policy = trainer.agent().snapshot();
  return result;
}

// ---------------------------------------------------------------------------
// Aggregation.

// Linear-interpolation percentile (p in [0, 100]) of an unsorted sample.
inline double percentile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = p / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct EpochAggregate {
  int epoch = 0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

// Per-epoch median and quartiles across runs; each run supplies one value
// per epoch (clipped to the 0..200 step range).
inline std::vector<EpochAggregate> aggregate(const std::vector<std::vector<double>>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
  const std::size_t epochs = runs.front().size();
  for (const auto& r : runs)
    if (r.size() != epochs) throw std::invalid_argument("aggregate: runs have different epoch counts");
  std::vector<EpochAggregate> out;
  for (std::size_t e = 0; e < epochs; ++e) {
    std::vector<double> col;
    for (const auto& r : runs) col.push_back(std::clamp(r[e], 0.0, static_cast<double>(env::kEpisodeSteps)));
    out.push_back({static_cast<int>(e + 1), percentile(col, 50.0), percentile(col, 25.0), percentile(col, 75.0)});
  }
  return out;
}

inline std::vector<EpochAggregate> aggregate(const std::vector<RunResult>& runs) {
  std::vector<std::vector<double>> values;
  for (const auto& r : runs) values.push_back(r.epoch_means());
  return aggregate(values);
}

// ---------------------------------------------------------------------------
// Output files.

inline std::string metrics_csv(const std::vector<RunResult>& runs) {
  std::ostringstream os;
  os << "epoch,episode_index,seed,successful_steps,mean_reward\n";
  char buf[64];
  for (const auto& r : runs) {
    for (const auto& t : r.tests) {
      std::snprintf(buf, sizeof(buf), "%.6f", t.mean_reward);
      os << t.epoch << ',' << t.episode_index << ',' << t.seed << ',' << t.successful_steps << ',' << buf << '\n';
    }
  }
  return os.str();
}

inline std::string aggregate_csv(const std::vector<EpochAggregate>& agg) {
  std::ostringstream os;
  os << "epoch,median,q25,q75\n";
  char buf[128];
  for (const auto& a : agg) {
    std::snprintf(buf, sizeof(buf), "%d,%.4f,%.4f,%.4f\n", a.epoch, a.median, a.q25, a.q75);
    os << buf;
  }
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

// metrics.csv and aggregate.csv for one config's runs.
inline void export_metrics(const std::vector<RunResult>& runs, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
  write_text(dir / "metrics.csv", metrics_csv(runs));
  write_text(dir / "aggregate.csv", aggregate_csv(aggregate(runs)));
}

// ---------------------------------------------------------------------------
// Evaluation helpers.

struct MelodyResult {
  std::vector<StepTrace> trace;
  dsp::TimeSignal audio;
  int successful_steps = 0;
};

inline std::string trace_csv(const std::vector<StepTrace>& trace) {
  std::ostringstream os;
  os << "step,goal_hz,achieved_hz,success\n";
  char buf[128];
  for (const auto& s : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.4f,%.4f,%d\n", s.step, s.goal_freq, s.achieved_freq, s.success ? 1 : 0);
    os << buf;
  }
  return os.str();
}

// One deterministic episode on the given melody. The rendered audio is the
// clean tone at each step's achieved pitch, concatenated.
inline MelodyResult play_melody(const agent::PolicySnapshot& policy, const std::vector<double>& notes,
                                const env::EnvConfig& env_cfg, std::uint64_t seed,
                                std::optional<kin::RobotState> start = std::nullopt) {
  env::ThereminEnv environment(env_cfg, seed);
  if (start) environment.set_robot(*start);
  const auto melody = fit_melody(notes);
  auto timeline = environment.make_timeline(melody);
  auto outcome = play_episode(
      environment, [&](auto s, auto g) { return policy.act(s, g); }, std::move(timeline), false);
  MelodyResult out;
  out.trace = std::move(outcome.trace);
  out.successful_steps = outcome.successful_steps;
  for (const auto& s : out.trace) {
    const auto tone = dsp::synth_tone(s.achieved_freq);
    out.audio.samples.insert(out.audio.samples.end(), tone.samples.begin(), tone.samples.end());
  }
  return out;
}

// True if the step's goal offset within its segment falls in [first, last]
// (1-based, as in "steps 10-25 of each segment").
inline bool in_segment_window(const StepTrace& s, int first, int last) {
  const int goal_step = std::min(s.step + 1, env::kEpisodeSteps - 1);
  const int offset = goal_step % env::kSegmentSteps + 1;
  return offset >= first && offset <= last;
}

// Fraction of post-transient steps (segment offsets 10..25) on target when
// the policy plays the given goal frequencies, eight per episode.
inline double post_transient_success(const agent::PolicySnapshot& policy, const std::vector<double>& targets,
                                     const env::EnvConfig& env_cfg, std::uint64_t seed,
                                     std::optional<kin::RobotState> start = std::nullopt) {
  env::ThereminEnv environment(env_cfg, seed);
  if (start) environment.set_robot(*start);
  int hits = 0;
  int total = 0;
  for (std::size_t first = 0; first < targets.size(); first += env::kSegments) {
    std::array<double, env::kSegments> notes{};
    for (std::size_t i = 0; i < notes.size(); ++i) notes[i] = targets[(first + i) % targets.size()];
    const std::size_t used = std::min<std::size_t>(env::kSegments, targets.size() - first);
    auto outcome = play_episode(
        environment, [&](auto s, auto g) { return policy.act(s, g); }, environment.make_timeline(notes), false);
    for (const auto& s : outcome.trace) {
      const int seg = env::GoalTimeline::segment_of(std::min(s.step + 1, env::kEpisodeSteps - 1));
      if (static_cast<std::size_t>(seg) >= used || !in_segment_window(s, 10, 25)) continue;
      ++total;
      hits += s.success ? 1 : 0;
    }
  }
  return total ? static_cast<double>(hits) / total : 0.0;
}

}  // namespace tdg::harness
