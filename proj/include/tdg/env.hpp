#pragma once

// Simulated theremin: robot tip distance to the antenna sets the pitch, the
// emitted tone is heard through one of the spectral front-ends, and a goal
// timeline of eight 25-step notes defines the sparse reward.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tdg/dsp.hpp"
#include "tdg/kinematics.hpp"

namespace tdg::env {

inline constexpr int kEpisodeSteps = 200;
inline constexpr int kSegmentSteps = 25;
inline constexpr int kSegments = kEpisodeSteps / kSegmentSteps;
inline constexpr double kTolerance = 0.007;  // relative pitch error counted as a hit
inline constexpr double kA4 = 440.0;

inline constexpr double kPitchFloor = 180.0;
inline constexpr double kPitchSpan = 1200.0;
inline constexpr double kPitchLength = 0.18;
// Highest pitch whose 8th partial stays below Nyquist.
inline constexpr double kMaxPitch = 0.999 * dsp::kSampleRate / (2.0 * dsp::kPartials);
inline constexpr double kMinPitch = 60.0;

enum class RewardKind { TemplateMatch, ArgmaxCQT };
enum class PitchMap { Exponential, Linear };
enum class GoalSet { Chromatic, OffScale, SingleNote };

inline std::string_view to_string(RewardKind k) { return k == RewardKind::TemplateMatch ? "template" : "argmax"; }
inline std::string_view to_string(PitchMap m) { return m == PitchMap::Exponential ? "exponential" : "linear"; }
inline std::string_view to_string(GoalSet g) {
  switch (g) {
    case GoalSet::Chromatic: return "chromatic";
    case GoalSet::OffScale: return "offscale";
    case GoalSet::SingleNote: return "single";
  }
  return "?";
}

inline RewardKind parse_reward_kind(std::string_view s) {
  if (s == "template") return RewardKind::TemplateMatch;
  if (s == "argmax") return RewardKind::ArgmaxCQT;
  throw std::invalid_argument("unknown reward '" + std::string(s) + "' (expected template or argmax)");
}

inline PitchMap parse_pitch_map(std::string_view s) {
  if (s == "exponential") return PitchMap::Exponential;
  if (s == "linear") return PitchMap::Linear;
  throw std::invalid_argument("unknown pitch map '" + std::string(s) + "' (expected exponential or linear)");
}

inline GoalSet parse_goal_set(std::string_view s) {
  if (s == "chromatic") return GoalSet::Chromatic;
  if (s == "offscale") return GoalSet::OffScale;
  if (s == "single") return GoalSet::SingleNote;
  throw std::invalid_argument("unknown goal set '" + std::string(s) + "' (expected chromatic, offscale or single)");
}

// The twelve equal-tempered notes A4 .. Ab5.
inline std::array<double, 12> chromatic_notes() {
  std::array<double, 12> notes{};
  for (int k = 0; k < 12; ++k) notes[static_cast<std::size_t>(k)] = kA4 * std::pow(2.0, k / 12.0);
  return notes;
}

inline double exponential_pitch(double d) { return kPitchFloor + kPitchSpan * std::exp(-d / kPitchLength); }

inline double exponential_distance(double f) {
  if (!(f > kPitchFloor)) throw std::domain_error("pitch at or below the exponential map floor");
  return -kPitchLength * std::log((f - kPitchFloor) / kPitchSpan);
}

namespace detail {

// Affine map through the exponential map's A4 and Ab5 calibration points.
struct LinearCalibration {
  double d_low_note;
  double slope;
};

inline LinearCalibration linear_calibration() {
  const double top = chromatic_notes()[11];
  const double d_a4 = exponential_distance(kA4);
  const double d_top = exponential_distance(top);
  return {d_a4, (top - kA4) / (d_top - d_a4)};
}

}  // namespace detail

inline double distance_to_pitch(double d, PitchMap map = PitchMap::Exponential) {
  if (d < 0.0) throw std::domain_error("distance_to_pitch: negative distance");
  if (map == PitchMap::Exponential) return exponential_pitch(d);
  const auto cal = detail::linear_calibration();
  return kA4 + cal.slope * (d - cal.d_low_note);
}

inline double pitch_to_distance(double f, PitchMap map = PitchMap::Exponential) {
  if (map == PitchMap::Exponential) return exponential_distance(f);
  const auto cal = detail::linear_calibration();
  return cal.d_low_note + (f - kA4) / cal.slope;
}

// Pitch actually sounded: the map clamped to the synthesizable range.
inline double sounded_pitch(double d, PitchMap map) {
  return std::clamp(distance_to_pitch(d, map), kMinPitch, kMaxPitch);
}

inline bool success_step(double achieved_freq, double goal_freq) {
  if (!(achieved_freq > 0.0) || !(goal_freq > 0.0)) throw std::invalid_argument("success_step: frequencies must be positive");
  return std::abs(achieved_freq - goal_freq) / goal_freq < kTolerance;
}

inline double spectral_distance(std::span<const double> s, std::span<const double> g) {
  if (s.size() != g.size())
    throw std::invalid_argument("spectral distance: bin count mismatch (" + std::to_string(s.size()) + " vs " +
                                std::to_string(g.size()) + ")");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += std::abs(g[i] - s[i]);
  return acc;
}

inline double reward_template(std::span<const double> s, std::span<const double> g, double epsilon) {
  return spectral_distance(s, g) < epsilon ? 0.0 : -1.0;
}

inline double reward_template(const dsp::Spectrum& s, const dsp::Spectrum& g, double epsilon) {
  if (s.kind != g.kind) throw std::invalid_argument("reward_template: transform kind mismatch");
  return reward_template(std::span<const double>(s.bins), std::span<const double>(g.bins), epsilon);
}

inline double reward_argmax(std::span<const double> s, std::span<const double> g) {
  if (s.size() != g.size()) throw std::invalid_argument("reward_argmax: bin count mismatch");
  return dsp::argmax(s) == dsp::argmax(g) ? 0.0 : -1.0;
}

inline double reward_argmax(const dsp::Spectrum& s, const dsp::Spectrum& g) {
  if (s.kind != dsp::TransformKind::CQT || g.kind != dsp::TransformKind::CQT)
    throw std::invalid_argument("reward_argmax: both spectra must be CQT");
  return reward_argmax(std::span<const double>(s.bins), std::span<const double>(g.bins));
}

// Spectral distance between clean tones at f and f * (1 + detune).
inline double detuning_distance(const dsp::SpectralTransform& t, double f, double detune) {
  const auto a = t(dsp::synth_tone(f));
  const auto b = t(dsp::synth_tone(f * (1.0 + detune)));
  return spectral_distance(a.bins, b.bins);
}

// Smallest clean-tone spectral distance produced by a 0.7% detuning on any
// goal note; distances below it are treated as hits.
inline double calibrate_epsilon(const dsp::SpectralTransform& t) {
  double eps = std::numeric_limits<double>::infinity();
  for (double f : chromatic_notes()) eps = std::min(eps, detuning_distance(t, f, kTolerance));
  return eps;
}

inline double calibrate_epsilon(const dsp::TransformConfig& cfg) { return calibrate_epsilon(dsp::SpectralTransform(cfg)); }

struct EnvConfig {
  kin::RobotKind robot = kin::RobotKind::Arm6D;
  kin::ActionSpace actuation = kin::ActionSpace::Cartesian;
  dsp::TransformConfig transform = dsp::TransformConfig::cqt();
  double snr_db = 38.0;  // +inf disables the noise
  double epsilon = 0.0;  // 0 selects calibrate_epsilon
  RewardKind reward = RewardKind::TemplateMatch;
  bool reset_between_episodes = true;
  double antenna_y_jitter = 0.1;
  PitchMap pitch_map = PitchMap::Exponential;
  GoalSet goals = GoalSet::Chromatic;

  void validate() const {
    if (epsilon < 0.0) throw std::invalid_argument("env: epsilon must be positive (or 0 to calibrate)");
    if (reward == RewardKind::ArgmaxCQT && transform.kind != dsp::TransformKind::CQT)
      throw std::invalid_argument("env: argmax reward requires the CQT transform");
    if (antenna_y_jitter < 0.0) throw std::invalid_argument("env: antenna jitter must be non-negative");
    if (robot == kin::RobotKind::Cart1D && actuation != kin::ActionSpace::Cartesian)
      throw std::invalid_argument("env: the cart only supports Cartesian actuation");
    if (std::isnan(snr_db)) throw std::invalid_argument("env: snr_db is NaN");
  }

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

// Goal notes, one per 25-step segment, with their clean spectra.
struct GoalTimeline {
  std::array<double, kSegments> note_freqs{};
  std::array<std::shared_ptr<const dsp::Spectrum>, kSegments> segment_spectra{};

  static constexpr int segment_len = kSegmentSteps;
  static constexpr int steps = kEpisodeSteps;

  static int segment_of(int step) {
    if (step < 0 || step >= kEpisodeSteps) throw std::out_of_range("timeline step " + std::to_string(step));
    return step / kSegmentSteps;
  }
  double freq_at(int step) const { return note_freqs[static_cast<std::size_t>(segment_of(step))]; }
  const dsp::Spectrum& spectrum_at(int step) const { return *segment_spectra[static_cast<std::size_t>(segment_of(step))]; }
};

struct Observation {
  dsp::Spectrum audio;
  std::vector<double> proprio;
  double achieved_freq = 0.0;  // evaluation only, never a network input
};

struct StepResult {
  Observation obs;
  double reward = -1.0;
  double goal_freq = 0.0;
  const dsp::Spectrum* goal = nullptr;  // goal paired with obs, owned by the env's timeline
  bool done = false;
  bool success = false;
};

inline constexpr kin::Joints kArmHome{0.0, 0.3, 0.5, 0.6, 0.5, 0.0};
inline constexpr double kCartStart = 0.30;

class ThereminEnv {
 public:
  ThereminEnv(EnvConfig cfg, std::uint64_t seed)
      : cfg_(cfg), transform_(std::make_shared<const dsp::SpectralTransform>(cfg.transform)), rng_(seed) {
    cfg_.validate();
    epsilon_ = cfg_.epsilon > 0.0 ? cfg_.epsilon : calibrate_epsilon(*transform_);
    robot_ = cfg_.robot == kin::RobotKind::Cart1D ? kin::RobotState::cart(kCartStart) : kin::RobotState::arm(kArmHome);
    const auto home_tip = kin::forward_kinematics(kArmHome);
    arm_antenna_ = {home_tip[0] - exponential_distance(600.0), home_tip[1], home_tip[2]};
  }

  const EnvConfig& config() const { return cfg_; }
  double epsilon() const { return epsilon_; }
  const dsp::SpectralTransform& transform() const { return *transform_; }
  std::size_t audio_dim() const { return transform_->n_bins(); }
  std::size_t proprio_dim() const { return robot_.proprio(cfg_.actuation).size(); }
  std::size_t action_dim() const { return kin::action_dim(cfg_.robot, cfg_.actuation); }
  const kin::RobotState& robot() const { return robot_; }
  void set_robot(const kin::RobotState& s) { robot_ = s; }
  double antenna_offset() const { return antenna_offset_; }
  int steps_taken() const { return step_; }
  bool done() const { return step_ >= kEpisodeSteps; }
  const GoalTimeline& timeline() const { return timeline_; }

  kin::Vec3 antenna() const {
    if (cfg_.robot == kin::RobotKind::Cart1D) return {0.0, antenna_offset_, 0.0};
    return {arm_antenna_[0], arm_antenna_[1] + antenna_offset_, arm_antenna_[2]};
  }

  double tip_distance() const { return kin::distance(robot_.tip(), antenna()); }
  double current_pitch() const { return sounded_pitch(tip_distance(), cfg_.pitch_map); }

  // Goal shown with the current observation.
  const dsp::Spectrum& current_goal() const { return timeline_.spectrum_at(std::min(step_, kEpisodeSteps - 1)); }
  double current_goal_freq() const { return timeline_.freq_at(std::min(step_, kEpisodeSteps - 1)); }

  double reward(std::span<const double> achieved, std::span<const double> goal) const {
    return cfg_.reward == RewardKind::ArgmaxCQT ? reward_argmax(achieved, goal) : reward_template(achieved, goal, epsilon_);
  }

  // Clean spectrum of the tone at f, memoized per frequency.
  std::shared_ptr<const dsp::Spectrum> clean_spectrum(double f) {
    auto it = goal_cache_.find(f);
    if (it != goal_cache_.end()) return it->second;
    auto spec = std::make_shared<const dsp::Spectrum>((*transform_)(dsp::synth_tone(f)));
    goal_cache_.emplace(f, spec);
    return spec;
  }

  GoalTimeline make_timeline(std::span<const double> notes) {
    if (notes.size() != kSegments) throw std::invalid_argument("goal timeline needs exactly 8 notes");
    GoalTimeline tl;
    for (std::size_t i = 0; i < kSegments; ++i) {
      tl.note_freqs[i] = notes[i];
      tl.segment_spectra[i] = clean_spectrum(notes[i]);
    }
    return tl;
  }

  GoalTimeline sample_goal_timeline() {
    const auto scale = chromatic_notes();
    std::array<double, kSegments> notes{};
    std::uniform_int_distribution<std::size_t> pick(0, scale.size() - 1);
    std::uniform_real_distribution<double> anywhere(scale.front(), scale.back());
    switch (cfg_.goals) {
      case GoalSet::Chromatic:
        for (auto& n : notes) n = scale[pick(rng_)];
        break;
      case GoalSet::OffScale:
        for (auto& n : notes) n = anywhere(rng_);
        break;
      case GoalSet::SingleNote:
        notes.fill(scale[pick(rng_)]);
        break;
    }
    return make_timeline(notes);
  }

  Observation reset() { return reset(sample_goal_timeline()); }

  Observation reset(GoalTimeline timeline) {
    if (cfg_.robot == kin::RobotKind::Arm6D) {
      if (cfg_.reset_between_episodes) robot_ = kin::RobotState::arm(kArmHome);
      std::uniform_real_distribution<double> jitter(-cfg_.antenna_y_jitter, cfg_.antenna_y_jitter);
      antenna_offset_ = cfg_.antenna_y_jitter > 0.0 ? jitter(rng_) : 0.0;
    } else if (cfg_.reset_between_episodes) {
      robot_ = kin::RobotState::cart(kCartStart);
    }
    timeline_ = std::move(timeline);
    step_ = 0;
    return observe();
  }

  StepResult step(const kin::Action& a) {
    if (!timeline_.segment_spectra[0]) throw std::logic_error("step before reset");
    if (done()) throw std::logic_error("step on a finished episode; call reset()");
    if (a.values.size() != action_dim())
      throw std::invalid_argument("step: action has " + std::to_string(a.values.size()) + " components, expected " +
                                  std::to_string(action_dim()));
    kin::Action act = a;
    act.space = cfg_.actuation;
    robot_ = kin::apply_action(robot_, act);
    ++step_;

    StepResult out;
    out.obs = observe();
    out.goal = &current_goal();
    out.goal_freq = current_goal_freq();
    out.reward = reward(out.obs.audio.bins, out.goal->bins);
    out.success = success_step(out.obs.achieved_freq, out.goal_freq);
    out.done = done();
    return out;
  }

  // Sounds the current position without advancing the episode.
  Observation observe() {
    Observation obs;
    obs.achieved_freq = current_pitch();
    auto tone = dsp::synth_tone(obs.achieved_freq);
    if (std::isfinite(cfg_.snr_db)) tone = dsp::mix_snr(tone, dsp::pink_noise(tone.size(), rng_()), cfg_.snr_db);
    obs.audio = (*transform_)(tone);
    obs.proprio = robot_.proprio(cfg_.actuation);
    return obs;
  }

 private:
  EnvConfig cfg_;
  std::shared_ptr<const dsp::SpectralTransform> transform_;
  std::mt19937_64 rng_;
  double epsilon_ = 0.0;
  kin::RobotState robot_ = kin::RobotState::cart(kCartStart);
  kin::Vec3 arm_antenna_{};
  double antenna_offset_ = 0.0;
  GoalTimeline timeline_;
  int step_ = 0;
  std::map<double, std::shared_ptr<const dsp::Spectrum>> goal_cache_;
};

}  // namespace tdg::env
