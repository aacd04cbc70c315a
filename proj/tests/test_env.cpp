#include <catch_amalgamated.hpp>

#include <limits>
#include <random>
#include <set>

#include "tdg/env.hpp"

using namespace tdg;
using namespace tdg::env;
using Catch::Approx;

namespace {

EnvConfig cart_config() {
  EnvConfig c;
  c.robot = kin::RobotKind::Cart1D;
  c.reward = RewardKind::ArgmaxCQT;
  c.reset_between_episodes = false;
  c.antenna_y_jitter = 0.0;
  return c;
}

EnvConfig quiet(EnvConfig c) {
  c.snr_db = std::numeric_limits<double>::infinity();
  return c;
}

}  // namespace

TEST_CASE("chromatic goal set") {
  const auto notes = chromatic_notes();
  CHECK(notes.front() == 440.0);
  CHECK(notes.back() == Approx(830.609).margin(1e-3));
}

TEST_CASE("exponential pitch map") {
  CHECK(distance_to_pitch(0.0) == Approx(1380.0));
  CHECK(distance_to_pitch(50.0) == Approx(180.0).margin(1e-9));
  for (double d = 0.0; d < 1.0; d += 0.01) CHECK(distance_to_pitch(d) > distance_to_pitch(d + 0.01));
  for (double f : chromatic_notes()) CHECK(distance_to_pitch(pitch_to_distance(f)) == Approx(f).epsilon(1e-12));
  CHECK(pitch_to_distance(440.0) > kin::kCartMin);
  CHECK(pitch_to_distance(440.0) < kin::kCartMax);
  CHECK(pitch_to_distance(830.61) > kin::kCartMin);
  CHECK(pitch_to_distance(830.61) < kin::kCartMax);
  CHECK_THROWS(distance_to_pitch(-0.1));
}

TEST_CASE("linear pitch map agrees at the calibration notes") {
  const double top = chromatic_notes()[11];
  for (double f : {440.0, top}) {
    const double d = pitch_to_distance(f);
    CHECK(distance_to_pitch(d, PitchMap::Linear) == Approx(f).epsilon(1e-12));
  }
  // Strictly between the calibration points the two maps disagree.
  const double mid = pitch_to_distance(622.25);
  CHECK(std::abs(distance_to_pitch(mid, PitchMap::Linear) - 622.25) > 0.007 * 622.25);
  const double a = distance_to_pitch(0.1, PitchMap::Linear);
  const double b = distance_to_pitch(0.2, PitchMap::Linear);
  const double c = distance_to_pitch(0.3, PitchMap::Linear);
  CHECK(b - a == Approx(c - b));
}

TEST_CASE("arm workspace covers the note distances") {
  const ThereminEnv e(quiet(EnvConfig{}), 1);
  std::mt19937_64 rng(4);
  double lo = 1e9;
  double hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    kin::Joints q{};
    for (std::size_t j = 0; j < 6; ++j) {
      std::uniform_real_distribution<double> u(kin::kArmLimits[j].lo, kin::kArmLimits[j].hi);
      q[j] = u(rng);
    }
    const double d = kin::distance(kin::forward_kinematics(q), e.antenna());
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  CHECK(lo < pitch_to_distance(830.61));
  CHECK(hi > pitch_to_distance(440.0));
}

TEST_CASE("success metric") {
  CHECK(success_step(440.0, 440.0));
  CHECK(success_step(443.0, 440.0));
  CHECK_FALSE(success_step(443.2, 440.0));
  CHECK(success_step(437.0, 440.0));
  CHECK_FALSE(success_step(436.8, 440.0));
  CHECK_THROWS(success_step(0.0, 440.0));
}

TEST_CASE("template reward with calibrated epsilon") {
  const dsp::SpectralTransform t(dsp::TransformConfig::cqt());
  const double eps = calibrate_epsilon(t);
  REQUIRE(eps > 0.0);
  const auto g = t(dsp::synth_tone(440.0));
  CHECK(reward_template(g, g, eps) == 0.0);
  CHECK(reward_template(t(dsp::synth_tone(440.0 * 1.006)), g, eps) == 0.0);
  CHECK(reward_template(t(dsp::synth_tone(440.0 * 1.009)), g, eps) == -1.0);
  for (double f : chromatic_notes()) {
    const auto goal = t(dsp::synth_tone(f));
    CHECK(reward_template(t(dsp::synth_tone(f * 1.02)), goal, eps) == -1.0);
  }
  CHECK_THROWS(spectral_distance(std::vector<double>(3), std::vector<double>(4)));
  const dsp::SpectralTransform stft(dsp::TransformConfig::stft());
  CHECK_THROWS(reward_template(stft(dsp::synth_tone(440.0)), g, eps));
}

TEST_CASE("distance grows monotonically with detuning for every transform") {
  for (auto kind : {dsp::TransformKind::CQT, dsp::TransformKind::STFT, dsp::TransformKind::MEL}) {
    const dsp::SpectralTransform t(dsp::TransformConfig::of(kind));
    const double eps = calibrate_epsilon(t);
    for (double f : chromatic_notes()) {
      INFO(dsp::to_string(kind) << " " << f);
      CHECK(detuning_distance(t, f, 0.0035) < eps);
      CHECK(detuning_distance(t, f, 0.007) >= eps);
      double prev = 0.0;
      int violations = 0;
      for (int i = 1; i <= 100; ++i) {
        const double d = detuning_distance(t, f, 0.03 * i / 100.0);
        violations += d <= prev ? 1 : 0;
        prev = d;
      }
      CHECK(violations == 0);
    }
  }
}

TEST_CASE("argmax reward") {
  const dsp::SpectralTransform t(dsp::TransformConfig::cqt());
  const auto g = t(dsp::synth_tone(440.0));
  CHECK(reward_argmax(g, g) == 0.0);
  CHECK(reward_argmax(t(dsp::synth_tone(466.16)), g) == -1.0);
  CHECK(reward_argmax(t(dsp::synth_tone(440.0 * 1.02)), g) == 0.0);
  const dsp::SpectralTransform stft(dsp::TransformConfig::stft());
  const auto s = stft(dsp::synth_tone(440.0));
  CHECK_THROWS(reward_argmax(s, s));
}

TEST_CASE("config validation") {
  auto c = cart_config();
  CHECK_NOTHROW(c.validate());
  c.transform = dsp::TransformConfig::stft();
  CHECK_THROWS(c.validate());
  c = cart_config();
  c.actuation = kin::ActionSpace::Joint;
  CHECK_THROWS(c.validate());
  c = EnvConfig{};
  c.epsilon = -1.0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("goal timelines are block constant") {
  ThereminEnv e(EnvConfig{}, 3);
  const auto tl = e.sample_goal_timeline();
  const auto notes = chromatic_notes();
  const std::set<double> scale(notes.begin(), notes.end());
  for (std::size_t i = 0; i < 8; ++i) CHECK(scale.count(tl.note_freqs[i]) == 1);
  for (int step = 0; step < 200; ++step) {
    CHECK(tl.freq_at(step) == tl.note_freqs[static_cast<std::size_t>(step / 25)]);
    if (step % 25 != 0) CHECK(&tl.spectrum_at(step) == &tl.spectrum_at(step - 1));
  }
  CHECK(GoalTimeline::segment_of(199) == 7);
  ThereminEnv e2(EnvConfig{}, 3);
  CHECK(e2.sample_goal_timeline().note_freqs == tl.note_freqs);
  const dsp::SpectralTransform t(dsp::TransformConfig::cqt());
  CHECK(tl.spectrum_at(0).bins == t(dsp::synth_tone(tl.note_freqs[0])).bins);
}

TEST_CASE("off-scale and single-note goal sets") {
  auto c = EnvConfig{};
  c.goals = GoalSet::OffScale;
  ThereminEnv off(c, 5);
  const auto notes = chromatic_notes();
  for (int i = 0; i < 10; ++i) {
    const auto tl = off.sample_goal_timeline();
    for (double f : tl.note_freqs) {
      CHECK(f >= 440.0);
      CHECK(f <= notes.back());
    }
  }
  c.goals = GoalSet::SingleNote;
  ThereminEnv single(c, 5);
  const auto tl = single.sample_goal_timeline();
  for (double f : tl.note_freqs) CHECK(f == tl.note_freqs[0]);
}

TEST_CASE("arm reset randomizes the antenna within bounds") {
  ThereminEnv a(EnvConfig{}, 9);
  ThereminEnv b(EnvConfig{}, 9);
  std::set<double> offsets;
  for (int i = 0; i < 50; ++i) {
    a.reset();
    b.reset();
    CHECK(a.antenna_offset() == b.antenna_offset());
    CHECK(std::abs(a.antenna_offset()) <= 0.1);
    CHECK(a.robot().joints() == kArmHome);
    offsets.insert(a.antenna_offset());
  }
  CHECK(offsets.size() > 40);
}

TEST_CASE("cart position persists across resets") {
  ThereminEnv e(quiet(cart_config()), 1);
  e.reset();
  for (int i = 0; i < 200; ++i) e.step({{1.0}});
  const double end = e.robot().position();
  CHECK(end == kin::kCartMax);
  e.reset();
  CHECK(e.robot().position() == end);
  CHECK(e.antenna_offset() == 0.0);
}

TEST_CASE("episode stepping") {
  ThereminEnv e(quiet(cart_config()), 2);
  CHECK_THROWS_AS(e.step({{0.0}}), std::logic_error);
  const auto obs = e.reset();
  CHECK(obs.audio.size() == 60);
  CHECK(obs.proprio == std::vector<double>{kCartStart});
  CHECK(obs.achieved_freq == Approx(distance_to_pitch(kCartStart)));
  int steps = 0;
  while (!e.done()) {
    const auto r = e.step({{0.1}});
    ++steps;
    CHECK((r.reward == 0.0 || r.reward == -1.0));
    CHECK(r.done == (steps == 200));
  }
  CHECK(steps == 200);
  CHECK(e.steps_taken() == 200);
  CHECK_THROWS_AS(e.step({{0.0}}), std::logic_error);
  e.reset();
  CHECK_THROWS_AS(e.step({{0.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("reward is scored against the post-action goal") {
  auto c = quiet(cart_config());
  c.reward = RewardKind::TemplateMatch;
  ThereminEnv e(c, 1);
  const auto notes = chromatic_notes();
  std::array<double, 8> melody{};
  for (std::size_t i = 0; i < 8; ++i) melody[i] = notes[i];
  e.set_robot(kin::RobotState::cart(pitch_to_distance(notes[0])));
  e.reset(e.make_timeline(melody));
  for (int t = 0; t < 23; ++t) CHECK(e.step({{0.0}}).reward == 0.0);
  // The 24th action is scored against the note of step 24, still note 0; the
  // 25th against note 1.
  CHECK(e.step({{0.0}}).reward == 0.0);
  const auto r = e.step({{0.0}});
  CHECK(r.goal_freq == notes[1]);
  CHECK(r.reward == -1.0);
  CHECK_FALSE(r.success);
}

TEST_CASE("tip at the goal distance earns reward zero") {
  auto c = quiet(EnvConfig{});
  c.antenna_y_jitter = 0.0;
  ThereminEnv e(c, 1);
  std::array<double, 8> melody{};
  melody.fill(600.0);
  e.reset(e.make_timeline(melody));
  const auto r = e.step({{0.0, 0.0, 0.0}});
  CHECK(r.obs.achieved_freq == Approx(600.0).epsilon(1e-9));
  CHECK(r.reward == 0.0);
  CHECK(r.success);
}

TEST_CASE("episodes are deterministic for a fixed seed and action sequence") {
  auto run = [] {
    ThereminEnv e(EnvConfig{}, 42);
    std::vector<double> trace;
    e.reset();
    for (int t = 0; t < 50; ++t) {
      const auto r = e.step({{0.3, -0.2, 0.1}});
      trace.push_back(r.reward);
      trace.insert(trace.end(), r.obs.audio.bins.begin(), r.obs.audio.bins.end());
    }
    return trace;
  };
  CHECK(run() == run());
}

TEST_CASE("a random cart policy hits notes by accident") {
  ThereminEnv e(cart_config(), 8);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int hits = 0;
  for (int ep = 0; ep < 100; ++ep) {
    e.reset();
    while (!e.done()) hits += e.step({{u(rng)}}).reward == 0.0 ? 1 : 0;
  }
  CHECK(hits > 0);
}

TEST_CASE("noise only touches the observation") {
  ThereminEnv noisy(cart_config(), 1);
  ThereminEnv clean(quiet(cart_config()), 1);
  const auto a = noisy.reset();
  const auto b = clean.reset();
  CHECK(a.achieved_freq == b.achieved_freq);
  CHECK(a.audio.bins != b.audio.bins);
  CHECK(spectral_distance(a.audio.bins, b.audio.bins) < 0.02);
  CHECK(noisy.timeline().spectrum_at(0).bins == clean.timeline().spectrum_at(0).bins);
}
