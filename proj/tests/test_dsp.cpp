#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "tdg/dsp.hpp"
#include "tdg/env.hpp"

using namespace tdg;
using Catch::Approx;

namespace {

dsp::TimeSignal as_signal(std::vector<double> x) { return {std::move(x), dsp::kSampleRate}; }

// Averaged periodogram over non-overlapping Hann frames.
std::vector<double> welch_psd(const std::vector<double>& x, std::size_t frame, std::size_t frames) {
  std::vector<double> psd(frame / 2 + 1, 0.0);
  const auto w = oracle::periodic_hann(frame);
  std::vector<std::complex<double>> buf(frame);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = 0; i < frame; ++i) buf[i] = x[f * frame + i] * w[i];
    dsp::detail::fft_inplace(buf);
    for (std::size_t k = 0; k < psd.size(); ++k) psd[k] += std::norm(buf[k]);
  }
  for (auto& p : psd) p /= static_cast<double>(frames);
  return psd;
}

}  // namespace

TEST_CASE("synth_tone matches the additive formula") {
  const auto tone = dsp::synth_tone(440.0);
  REQUIRE(tone.size() == 1103);
  CHECK(tone.samples[0] == 0.0);
  for (std::size_t n : {1u, 17u, 500u, 1102u}) {
    double expect = 0.0;
    for (int i = 0; i < 8; ++i)
      expect += 0.4 * std::pow(0.25, i) * std::sin(2.0 * std::numbers::pi * 440.0 * (i + 1) * n / 22050.0);
    CHECK(tone.samples[n] == Approx(expect).margin(1e-12));
  }
  double peak = 0.0;
  for (double f : env::chromatic_notes())
    for (double s : dsp::synth_tone(f).samples) peak = std::max(peak, std::abs(s));
  CHECK(peak < 0.534);
}

TEST_CASE("synth_tone rejects invalid pitches") {
  CHECK_THROWS_AS(dsp::synth_tone(0.0), std::invalid_argument);
  CHECK_THROWS_AS(dsp::synth_tone(-5.0), std::invalid_argument);
  CHECK_THROWS_AS(dsp::synth_tone(22050.0 / 16.0), std::invalid_argument);
  CHECK_NOTHROW(dsp::synth_tone(22050.0 / 16.0 - 1.0));
}

TEST_CASE("partial amplitudes decay by 4 per harmonic") {
  // Exact-period tone so partials land on DFT bins.
  const double sr = 22050.0;
  const std::size_t n = 2205;
  const double f = 100.0;
  const auto tone = dsp::synth_tone(f, n / sr, sr);
  const auto mag = oracle::dft_magnitude(tone.samples, n);
  const double base = mag[10];  // 10 Hz bins
  CHECK(base == Approx(0.4 * n / 2.0).epsilon(0.02));
  for (int i = 1; i < 8; ++i) CHECK(mag[10 * (i + 1)] / base == Approx(std::pow(0.25, i)).epsilon(0.02));

  const auto t440 = dsp::synth_tone(440.0);
  const auto m440 = oracle::dft_magnitude(t440.samples, 2048);
  const auto peak = static_cast<std::size_t>(std::max_element(m440.begin(), m440.end()) - m440.begin());
  CHECK(peak == 41);
  CHECK(m440[82] / m440[41] == Approx(0.25).epsilon(0.05));
}

TEST_CASE("pink noise is deterministic, centred and has a -1 PSD slope") {
  const auto a = dsp::pink_noise(1 << 16, 7);
  const auto b = dsp::pink_noise(1 << 16, 7);
  const auto c = dsp::pink_noise(1 << 16, 8);
  CHECK(a.samples == b.samples);
  CHECK(a.samples != c.samples);
  const double mean = std::accumulate(a.samples.begin(), a.samples.end(), 0.0) / a.size();
  CHECK(std::abs(mean) < 0.05);
  CHECK(dsp::mean_power(a.samples) == Approx(1.0 + mean * mean).epsilon(1e-9));

  const std::size_t frame = 2048;
  const auto long_noise = dsp::pink_noise(frame * 100, 3);
  const auto psd = welch_psd(long_noise.samples, frame, 100);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t k = 1; k < psd.size(); ++k) {
    const double f = k * 22050.0 / frame;
    if (f < 100.0 || f > 5000.0) continue;
    const double x = std::log10(f);
    const double y = std::log10(psd[k]);
    sx += x, sy += y, sxx += x * x, sxy += x * y, ++m;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(slope > -1.3);
  CHECK(slope < -0.7);
}

TEST_CASE("mix_snr hits the requested ratio") {
  const auto tone = dsp::synth_tone(523.25);
  const auto noise = dsp::pink_noise(tone.size(), 11);
  CHECK(std::pow(10.0, 3.8) == Approx(6309.573).epsilon(1e-6));
  for (double snr : {38.0, 16.0, 8.0, 0.0, -5.0}) {
    const auto mixed = dsp::mix_snr(tone, noise, snr);
    std::vector<double> scaled(tone.size());
    for (std::size_t i = 0; i < tone.size(); ++i) scaled[i] = mixed.samples[i] - tone.samples[i];
    const double measured = 10.0 * std::log10(dsp::mean_power(tone.samples) / dsp::mean_power(scaled));
    CHECK(std::abs(measured - snr) < 0.01);
  }
  const auto zero = as_signal(std::vector<double>(tone.size(), 0.0));
  CHECK_THROWS_AS(dsp::mix_snr(zero, noise, 10.0), std::domain_error);
  CHECK_THROWS_AS(dsp::mix_snr(tone, zero, 10.0), std::domain_error);
  CHECK_THROWS(dsp::mix_snr(tone, dsp::pink_noise(tone.size() - 1, 1), 10.0));
}

TEST_CASE("STFT equals the naive DFT of the windowed frame") {
  const auto cfg = dsp::TransformConfig::stft();
  const dsp::SpectralTransform t(cfg);
  std::mt19937_64 rng(5);
  const auto w = oracle::periodic_hann(1103);
  for (int trial = 0; trial < 5; ++trial) {
    auto x = oracle::random_signal(1103, rng);
    const auto spec = dsp::stft_magnitude(as_signal(x), cfg);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= w[i];
    const auto ref = oracle::dft_magnitude(x, 2048);
    REQUIRE(spec.size() == 1025);
    double worst = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) worst = std::max(worst, std::abs(ref[k] - spec.bins[k]));
    CHECK(worst < 1e-9);
  }
  CHECK(std::ranges::all_of(t(as_signal(std::vector<double>(1103, 0.0))).bins, [](double v) { return v == 0.0; }));
  const auto s440 = t(dsp::synth_tone(440.0));
  CHECK(dsp::argmax(s440.bins) == 41);
  CHECK(s440.bin_centers[41] == Approx(41 * 22050.0 / 2048));
  CHECK_THROWS_AS(t(as_signal(std::vector<double>(1000, 0.1))), std::invalid_argument);
}

TEST_CASE("STFT magnitude scales linearly") {
  const dsp::SpectralTransform t(dsp::TransformConfig::stft());
  std::mt19937_64 rng(9);
  const auto x = oracle::random_signal(1103, rng);
  auto y = x;
  for (auto& v : y) v *= 2.5;
  const auto a = t(as_signal(x));
  const auto b = t(as_signal(y));
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(b.bins[k] == Approx(2.5 * a.bins[k]).margin(1e-9));
  CHECK(t(as_signal(x)).bins == a.bins);
}

TEST_CASE("CQT equals the direct kernel evaluation") {
  const auto cfg = dsp::TransformConfig::cqt();
  const dsp::SpectralTransform t(cfg);
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = oracle::random_signal(1103, rng);
    const auto spec = dsp::cqt_magnitude(as_signal(x), cfg);
    const auto ref = oracle::cqt_direct(x, 22050.0, 220.0, 12, 60);
    REQUIRE(spec.size() == 60);
    for (std::size_t k = 0; k < 60; ++k) CHECK(std::abs(spec.bins[k] - ref[k]) < 1e-9);
  }
  // Signals shorter than the prebuilt kernels truncate every long kernel.
  const auto short_x = oracle::random_signal(300, rng);
  const auto short_spec = t(as_signal(short_x));
  const auto short_ref = oracle::cqt_direct(short_x, 22050.0, 220.0, 12, 60);
  for (std::size_t k = 0; k < 60; ++k) CHECK(std::abs(short_spec.bins[k] - short_ref[k]) < 1e-9);
  CHECK_THROWS_AS(t(as_signal(std::vector<double>(63, 0.1))), std::invalid_argument);
  CHECK_NOTHROW(t(as_signal(std::vector<double>(64, 0.1))));
}

TEST_CASE("CQT geometry and note discrimination") {
  const dsp::SpectralTransform t(dsp::TransformConfig::cqt());
  const auto& c = t.bin_centers();
  REQUIRE(c.size() == 60);
  CHECK(c[0] == 220.0);
  for (std::size_t k = 0; k + 1 < c.size(); ++k) CHECK(c[k + 1] / c[k] == Approx(std::pow(2.0, 1.0 / 12.0)).epsilon(1e-12));
  CHECK(c.back() < 11025.0);
  CHECK(t.cqt_kernel_length(0) == static_cast<std::size_t>(std::ceil(22050.0 * dsp::cqt_quality(12) / 220.0)));
  for (std::size_t k = 0; k < 48; ++k) {
    const double f = 220.0 * std::pow(2.0, k / 12.0);
    if (f * 8 >= 11025.0) break;
    CHECK(dsp::argmax(t(dsp::synth_tone(f)).bins) == k);
  }
  const auto notes = env::chromatic_notes();
  for (std::size_t i = 0; i + 1 < notes.size(); ++i)
    CHECK(dsp::argmax(t(dsp::synth_tone(notes[i])).bins) != dsp::argmax(t(dsp::synth_tone(notes[i + 1])).bins));
  CHECK(std::ranges::all_of(t(as_signal(std::vector<double>(1103, 0.0))).bins, [](double v) { return v == 0.0; }));
}

TEST_CASE("mel filterbank rows have unit area and follow the mel scale") {
  const auto cfg = dsp::TransformConfig::mel();
  const dsp::SpectralTransform t(cfg);
  REQUIRE(t.n_bins() == 64);
  for (const auto& row : t.mel_filterbank()) {
    CHECK(std::accumulate(row.begin(), row.end(), 0.0) == Approx(1.0).margin(1e-9));
    CHECK(std::ranges::all_of(row, [](double v) { return v >= 0.0; }));
  }
  const auto& centers = t.bin_centers();
  for (std::size_t m = 0; m + 1 < centers.size(); ++m) CHECK(centers[m] < centers[m + 1]);
  CHECK(dsp::hz_to_mel(dsp::mel_to_hz(1234.5)) == Approx(1234.5));

  const auto stft_cfg = dsp::TransformConfig::stft();
  const auto zero = dsp::stft_magnitude(as_signal(std::vector<double>(1103, 0.0)), stft_cfg);
  CHECK(std::ranges::all_of(dsp::mel_scale(zero, cfg).bins, [](double v) { return v == 0.0; }));

  // Pure 440 Hz sine: the strongest band is the one centred nearest 440 Hz.
  std::vector<double> sine(1103);
  for (std::size_t n = 0; n < sine.size(); ++n) sine[n] = std::sin(2.0 * std::numbers::pi * 440.0 * n / 22050.0);
  const auto mel = t(as_signal(sine));
  std::size_t nearest = 0;
  for (std::size_t m = 0; m < centers.size(); ++m)
    if (std::abs(centers[m] - 440.0) < std::abs(centers[nearest] - 440.0)) nearest = m;
  CHECK(dsp::argmax(mel.bins) == nearest);
  CHECK_THROWS_AS(t.apply_mel(mel), std::invalid_argument);
}

TEST_CASE("argmax breaks ties toward the lowest index") {
  const std::vector<double> v{0.0, 3.0, 1.0, 3.0};
  CHECK(dsp::argmax(v) == 1);
  CHECK(dsp::argmax(std::vector<double>(5, 0.0)) == 0);
  CHECK_THROWS(dsp::argmax(std::vector<double>{}));
}

TEST_CASE("transform names round-trip") {
  for (auto k : {dsp::TransformKind::CQT, dsp::TransformKind::STFT, dsp::TransformKind::MEL})
    CHECK(dsp::parse_transform_kind(dsp::to_string(k)) == k);
  CHECK_THROWS(dsp::parse_transform_kind("wavelet"));
}
