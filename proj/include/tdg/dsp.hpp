#pragma once

// Theremin tone synthesis, pink noise, SNR mixing and magnitude spectra
// (constant-Q, single-frame STFT, mel-scaled STFT).

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tdg::dsp {

inline constexpr double kSampleRate = 22050.0;
inline constexpr double kToneSeconds = 0.05;
inline constexpr int kPartials = 8;
inline constexpr double kFundamentalAmplitude = 0.4;
inline constexpr double kPartialDecay = 0.25;

struct TimeSignal {
  std::vector<double> samples;
  double sample_rate = kSampleRate;

  std::size_t size() const { return samples.size(); }
};

enum class TransformKind { CQT, STFT, MEL };

inline std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::CQT: return "cqt";
    case TransformKind::STFT: return "stft";
    case TransformKind::MEL: return "mel";
  }
  return "?";
}

inline TransformKind parse_transform_kind(std::string_view name) {
  if (name == "cqt" || name == "CQT") return TransformKind::CQT;
  if (name == "stft" || name == "STFT") return TransformKind::STFT;
  if (name == "mel" || name == "MEL") return TransformKind::MEL;
  throw std::invalid_argument("unknown transform '" + std::string(name) + "' (expected cqt, stft or mel)");
}

struct Spectrum {
  std::vector<double> bins;
  std::vector<double> bin_centers;
  TransformKind kind = TransformKind::CQT;

  std::size_t size() const { return bins.size(); }
};

struct TransformConfig {
  TransformKind kind = TransformKind::CQT;
  double sample_rate = kSampleRate;
  std::size_t n_bins = 60;          // CQT bins, or mel filters for MEL
  double f_min = 220.0;             // lowest CQT center / lower mel edge
  int bins_per_octave = 12;
  std::size_t window_len = 1103;    // STFT analysis window (one 50 ms tone)
  std::size_t fft_size = 2048;
  std::size_t mel_filters = 64;

  static TransformConfig cqt() { return {}; }

  static TransformConfig stft() {
    TransformConfig cfg;
    cfg.kind = TransformKind::STFT;
    cfg.f_min = 0.0;
    cfg.n_bins = cfg.fft_size / 2 + 1;
    return cfg;
  }

  static TransformConfig mel() {
    TransformConfig cfg;
    cfg.kind = TransformKind::MEL;
    cfg.f_min = 0.0;
    cfg.n_bins = cfg.mel_filters;
    return cfg;
  }

  static TransformConfig of(TransformKind kind) {
    switch (kind) {
      case TransformKind::STFT: return stft();
      case TransformKind::MEL: return mel();
      case TransformKind::CQT: break;
    }
    return cqt();
  }

  // Number of bins the transform emits.
  std::size_t output_bins() const {
    switch (kind) {
      case TransformKind::STFT: return fft_size / 2 + 1;
      case TransformKind::MEL: return mel_filters;
      case TransformKind::CQT: break;
    }
    return n_bins;
  }

  friend bool operator==(const TransformConfig&, const TransformConfig&) = default;
};

inline std::size_t tone_length(double duration, double sample_rate) {
  return static_cast<std::size_t>(std::lround(duration * sample_rate));
}

// Sum of 8 harmonics with amplitudes 0.4 * 4^-i.
inline TimeSignal synth_tone(double f, double duration = kToneSeconds, double sample_rate = kSampleRate) {
  if (!(f > 0.0)) throw std::invalid_argument("synth_tone: frequency must be positive");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("synth_tone: sample rate must be positive");
  if (f * kPartials >= sample_rate / 2.0) {
    throw std::invalid_argument("synth_tone: partial " + std::to_string(kPartials) + " of " + std::to_string(f) +
                                " Hz aliases at sample rate " + std::to_string(sample_rate));
  }
  if (!(duration > 0.0)) throw std::invalid_argument("synth_tone: duration must be positive");
  const std::size_t n = std::max<std::size_t>(1, tone_length(duration, sample_rate));

  TimeSignal out{std::vector<double>(n, 0.0), sample_rate};
  for (int i = 0; i < kPartials; ++i) {
    const double amp = kFundamentalAmplitude * std::pow(kPartialDecay, i);
    const double w = 2.0 * std::numbers::pi * f * (i + 1) / sample_rate;
    for (std::size_t k = 0; k < n; ++k) out.samples[k] += amp * std::sin(w * static_cast<double>(k));
  }
  return out;
}

// Voss-McCartney pink noise: 16 octave rows of uniform noise, row r refreshed
// every 2^r samples, plus one white row. Output has zero mean and unit variance.
inline TimeSignal pink_noise(std::size_t length, std::uint64_t seed, double sample_rate = kSampleRate) {
  if (length == 0) throw std::invalid_argument("pink_noise: length must be positive");
  constexpr int kRows = 16;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);

  std::array<double, kRows> rows{};
  for (auto& r : rows) r = uni(rng);
  double running = std::accumulate(rows.begin(), rows.end(), 0.0);

  TimeSignal out{std::vector<double>(length), sample_rate};
  for (std::size_t n = 0; n < length; ++n) {
    if (n > 0) {
      const int row = std::countr_zero(static_cast<std::uint64_t>(n));
      if (row < kRows) {
        const double fresh = uni(rng);
        running += fresh - rows[row];
        rows[row] = fresh;
      }
    }
    out.samples[n] = running + uni(rng);
  }

  const double mean = std::accumulate(out.samples.begin(), out.samples.end(), 0.0) / static_cast<double>(length);
  double var = 0.0;
  for (double& s : out.samples) {
    s -= mean;
    var += s * s;
  }
  var /= static_cast<double>(length);
  if (var > 0.0) {
    const double inv = 1.0 / std::sqrt(var);
    for (double& s : out.samples) s *= inv;
  }
  return out;
}

inline double mean_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double p = 0.0;
  for (double v : x) p += v * v;
  return p / static_cast<double>(x.size());
}

// Noise gain that puts `noise` at `snr_db` below `signal`.
inline double snr_noise_gain(std::span<const double> signal, std::span<const double> noise, double snr_db) {
  const double ps = mean_power(signal);
  const double pn = mean_power(noise);
  if (!(ps > 0.0) || !(pn > 0.0)) throw std::domain_error("mix_snr: zero-power signal or noise");
  return std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
}

inline TimeSignal mix_snr(const TimeSignal& signal, const TimeSignal& noise, double snr_db) {
  if (signal.size() != noise.size()) throw std::invalid_argument("mix_snr: length mismatch");
  if (signal.sample_rate != noise.sample_rate) throw std::invalid_argument("mix_snr: sample rate mismatch");
  const double gain = snr_noise_gain(signal.samples, noise.samples, snr_db);
  TimeSignal out = signal;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += gain * noise.samples[i];
  return out;
}

// Periodic Hann window.
inline std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Quality factor of a CQT with `bins_per_octave` bins: f_k / bandwidth_k.
inline double cqt_quality(int bins_per_octave) { return 1.0 / (std::pow(2.0, 1.0 / bins_per_octave) - 1.0); }

inline constexpr std::size_t kMinCqtKernel = 64;

namespace detail {

// In-place iterative radix-2 FFT; size must be a power of two.
inline void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n == 0 || !std::has_single_bit(n)) throw std::invalid_argument("fft: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        // Twiddles evaluated directly; recurrences drift past 1e-12.
        const std::complex<double> w = std::polar(1.0, ang * static_cast<double>(k));
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + half] * w;
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

}  // namespace detail

// Precomputed analysis for one TransformConfig. Immutable after construction,
// so one instance may be shared by concurrent readers.
class SpectralTransform {
 public:
  explicit SpectralTransform(TransformConfig cfg) : cfg_(cfg) {
    if (!(cfg_.sample_rate > 0.0)) throw std::invalid_argument("transform: sample rate must be positive");
    switch (cfg_.kind) {
      case TransformKind::CQT: build_cqt(); break;
      case TransformKind::STFT: build_stft(); break;
      case TransformKind::MEL:
        build_stft();
        build_mel();
        break;
    }
  }

  const TransformConfig& config() const { return cfg_; }
  std::size_t n_bins() const { return centers_.size(); }
  const std::vector<double>& bin_centers() const { return centers_; }

  // Mel filterbank rows (one per band) over the STFT bins.
  const std::vector<std::vector<double>>& mel_filterbank() const { return mel_bank_; }

  Spectrum operator()(const TimeSignal& sig) const {
    switch (cfg_.kind) {
      case TransformKind::CQT: return cqt(sig);
      case TransformKind::STFT: return stft(sig);
      case TransformKind::MEL: return apply_mel(stft(sig));
    }
    throw std::logic_error("unreachable");
  }

  Spectrum stft(const TimeSignal& sig) const {
    if (sig.size() < cfg_.window_len) {
      throw std::invalid_argument("stft: signal of " + std::to_string(sig.size()) + " samples shorter than window of " +
                                  std::to_string(cfg_.window_len));
    }
    std::vector<std::complex<double>> buf(cfg_.fft_size, {0.0, 0.0});
    for (std::size_t i = 0; i < cfg_.window_len; ++i) buf[i] = sig.samples[i] * window_[i];
    detail::fft_inplace(buf);
    Spectrum out;
    out.kind = TransformKind::STFT;
    out.bins.resize(stft_centers_.size());
    for (std::size_t k = 0; k < out.bins.size(); ++k) out.bins[k] = std::abs(buf[k]);
    out.bin_centers = stft_centers_;
    return out;
  }

  Spectrum apply_mel(const Spectrum& spec) const {
    if (spec.kind != TransformKind::STFT) throw std::invalid_argument("mel_scale: input must be an STFT spectrum");
    if (spec.size() != stft_centers_.size()) throw std::invalid_argument("mel_scale: STFT bin count mismatch");
    Spectrum out;
    out.kind = TransformKind::MEL;
    out.bins.assign(mel_bank_.size(), 0.0);
    for (std::size_t m = 0; m < mel_bank_.size(); ++m) {
      const auto& row = mel_bank_[m];
      double acc = 0.0;
      for (std::size_t k = mel_lo_[m]; k < mel_hi_[m]; ++k) acc += row[k] * spec.bins[k];
      out.bins[m] = acc;
    }
    out.bin_centers = centers_;
    return out;
  }

  Spectrum cqt(const TimeSignal& sig) const {
    if (sig.size() < kMinCqtKernel) {
      throw std::invalid_argument("cqt: signal of " + std::to_string(sig.size()) + " samples is below the " +
                                  std::to_string(kMinCqtKernel) + "-sample kernel floor");
    }
    Spectrum out;
    out.kind = TransformKind::CQT;
    out.bins.resize(kernels_.size());
    out.bin_centers = centers_;
    for (std::size_t k = 0; k < kernels_.size(); ++k) {
      const Kernel& kern = kernel_for(k, sig.size());
      const std::size_t start = (sig.size() - kern.re.size()) / 2;
      double re = 0.0;
      double im = 0.0;
      for (std::size_t n = 0; n < kern.re.size(); ++n) {
        const double x = sig.samples[start + n];
        re += x * kern.re[n];
        im += x * kern.im[n];
      }
      out.bins[k] = std::hypot(re, im);
    }
    return out;
  }

  // Nominal (untruncated) CQT kernel length for bin k.
  std::size_t cqt_kernel_length(std::size_t k) const {
    return static_cast<std::size_t>(std::ceil(cfg_.sample_rate * cqt_quality(cfg_.bins_per_octave) / centers_.at(k)));
  }

 private:
  struct Kernel {
    std::vector<double> re;
    std::vector<double> im;
  };

  static Kernel make_kernel(double f, double sample_rate, std::size_t len) {
    Kernel kern;
    kern.re.resize(len);
    kern.im.resize(len);
    const auto w = hann(len);
    const double step = -2.0 * std::numbers::pi * f / sample_rate;
    const double norm = 1.0 / static_cast<double>(len);
    for (std::size_t n = 0; n < len; ++n) {
      kern.re[n] = norm * w[n] * std::cos(step * static_cast<double>(n));
      kern.im[n] = norm * w[n] * std::sin(step * static_cast<double>(n));
    }
    return kern;
  }

  // Kernels are prebuilt for the configured tone length; other lengths that
  // truncate a kernel are built on demand.
  const Kernel& kernel_for(std::size_t k, std::size_t signal_len) const {
    const std::size_t len = std::min(nominal_len_[k], signal_len);
    if (len == kernels_[k].re.size()) return kernels_[k];
    thread_local Kernel scratch;
    scratch = make_kernel(centers_[k], cfg_.sample_rate, len);
    return scratch;
  }

  void build_cqt() {
    if (!(cfg_.f_min > 0.0)) throw std::invalid_argument("cqt: f_min must be positive");
    if (cfg_.bins_per_octave <= 0 || cfg_.n_bins == 0) throw std::invalid_argument("cqt: need bins");
    centers_.resize(cfg_.n_bins);
    for (std::size_t k = 0; k < cfg_.n_bins; ++k)
      centers_[k] = cfg_.f_min * std::pow(2.0, static_cast<double>(k) / cfg_.bins_per_octave);
    if (centers_.back() >= cfg_.sample_rate / 2.0) throw std::invalid_argument("cqt: top bin above Nyquist");
    nominal_len_.resize(cfg_.n_bins);
    kernels_.resize(cfg_.n_bins);
    for (std::size_t k = 0; k < cfg_.n_bins; ++k) {
      nominal_len_[k] = cqt_kernel_length(k);
      const std::size_t len = std::min(nominal_len_[k], cfg_.window_len);
      kernels_[k] = make_kernel(centers_[k], cfg_.sample_rate, len);
    }
  }

  void build_stft() {
    if (cfg_.window_len == 0 || cfg_.window_len > cfg_.fft_size) throw std::invalid_argument("stft: bad window length");
    if (!std::has_single_bit(cfg_.fft_size)) throw std::invalid_argument("stft: fft size must be a power of two");
    window_ = hann(cfg_.window_len);
    stft_centers_.resize(cfg_.fft_size / 2 + 1);
    for (std::size_t k = 0; k < stft_centers_.size(); ++k)
      stft_centers_[k] = static_cast<double>(k) * cfg_.sample_rate / static_cast<double>(cfg_.fft_size);
    centers_ = stft_centers_;
  }

  // Triangular filters equally spaced in mel between f_min and Nyquist, each
  // normalized to unit area (weights sum to one).
  void build_mel() {
    const std::size_t bands = cfg_.mel_filters;
    if (bands == 0) throw std::invalid_argument("mel: need at least one filter");
    const double lo = hz_to_mel(cfg_.f_min);
    const double hi = hz_to_mel(cfg_.sample_rate / 2.0);
    std::vector<double> edges(bands + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
      edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bands + 1));

    mel_bank_.assign(bands, std::vector<double>(stft_centers_.size(), 0.0));
    mel_lo_.assign(bands, 0);
    mel_hi_.assign(bands, 0);
    centers_.resize(bands);
    for (std::size_t m = 0; m < bands; ++m) {
      const double left = edges[m];
      const double mid = edges[m + 1];
      const double right = edges[m + 2];
      centers_[m] = mid;
      auto& row = mel_bank_[m];
      double area = 0.0;
      for (std::size_t k = 0; k < stft_centers_.size(); ++k) {
        const double f = stft_centers_[k];
        double v = 0.0;
        if (f > left && f <= mid) v = (f - left) / (mid - left);
        else if (f > mid && f < right) v = (right - f) / (right - mid);
        row[k] = v;
        area += v;
      }
      if (!(area > 0.0)) throw std::invalid_argument("mel: filter " + std::to_string(m) + " covers no STFT bin");
      std::size_t first = row.size();
      std::size_t last = 0;
      for (std::size_t k = 0; k < row.size(); ++k) {
        row[k] /= area;
        if (row[k] != 0.0) {
          first = std::min(first, k);
          last = k + 1;
        }
      }
      mel_lo_[m] = first;
      mel_hi_[m] = last;
    }
  }

  TransformConfig cfg_;
  std::vector<double> centers_;
  // STFT / MEL
  std::vector<double> window_;
  std::vector<double> stft_centers_;
  std::vector<std::vector<double>> mel_bank_;
  std::vector<std::size_t> mel_lo_;
  std::vector<std::size_t> mel_hi_;
  // CQT
  std::vector<std::size_t> nominal_len_;
  std::vector<Kernel> kernels_;
};

inline Spectrum stft_magnitude(const TimeSignal& sig, const TransformConfig& cfg) {
  if (cfg.kind != TransformKind::STFT) throw std::invalid_argument("stft_magnitude: config kind must be STFT");
  return SpectralTransform(cfg).stft(sig);
}

inline Spectrum mel_scale(const Spectrum& spec, const TransformConfig& cfg) {
  TransformConfig mel_cfg = cfg;
  mel_cfg.kind = TransformKind::MEL;
  return SpectralTransform(mel_cfg).apply_mel(spec);
}

inline Spectrum cqt_magnitude(const TimeSignal& sig, const TransformConfig& cfg) {
  if (cfg.kind != TransformKind::CQT) throw std::invalid_argument("cqt_magnitude: config kind must be CQT");
  return SpectralTransform(cfg).cqt(sig);
}

inline std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("argmax of empty range");
  // max_element keeps the first maximum: ties resolve to the lowest index.
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace tdg::dsp
