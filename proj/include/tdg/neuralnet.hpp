#pragma once

// Dense ReLU networks with exact reverse-mode gradients and Adam.
//
// Batches are stored column-wise: a forward pass on an (inputs x batch)
// matrix yields an (outputs x batch) matrix. Gradients returned by backward()
// are sums over the batch columns; scale the output cotangent to get means.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tdg::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class OutputActivation : std::uint32_t { Identity = 0, Tanh = 1 };

inline constexpr std::size_t kHiddenWidth = 64;
inline constexpr std::size_t kHiddenLayers = 3;

// input -> 64 -> 64 -> 64 -> output
inline std::vector<std::size_t> standard_shape(std::size_t inputs, std::size_t outputs) {
  std::vector<std::size_t> shape{inputs};
  for (std::size_t i = 0; i < kHiddenLayers; ++i) shape.push_back(kHiddenWidth);
  shape.push_back(outputs);
  return shape;
}

struct Layer {
  Matrix w;
  Vector b;
};

struct Gradients {
  std::vector<Layer> layers;

  Gradients& operator+=(const Gradients& o) {
    if (o.layers.size() != layers.size()) throw std::invalid_argument("gradient shape mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      layers[l].w += o.layers[l].w;
      layers[l].b += o.layers[l].b;
    }
    return *this;
  }

  Gradients& operator*=(double s) {
    for (auto& l : layers) {
      l.w *= s;
      l.b *= s;
    }
    return *this;
  }

  // Row-major weights then bias, layer by layer; same order as Mlp::flat().
  Vector flat() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.w.size() + l.b.size());
    Vector out(static_cast<Eigen::Index>(n));
    Eigen::Index at = 0;
    for (const auto& l : layers) {
      for (Eigen::Index r = 0; r < l.w.rows(); ++r)
        for (Eigen::Index c = 0; c < l.w.cols(); ++c) out(at++) = l.w(r, c);
      for (Eigen::Index r = 0; r < l.b.size(); ++r) out(at++) = l.b(r);
    }
    return out;
  }
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct ForwardCache {
  std::uint64_t stamp = 0;
  std::vector<Matrix> inputs;  // input to each layer
  std::vector<Matrix> pre;     // pre-activation of each layer
  Matrix output;
};

namespace detail {

inline std::uint64_t next_stamp() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

inline void write_f64(std::ostream& os, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(b, 8);
}

inline std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("network file truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline double read_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("network file truncated");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

inline constexpr char kMagic[8] = {'T', 'D', 'G', 'M', 'L', 'P', '0', '1'};

}  // namespace detail

class Mlp {
 public:
  Mlp() = default;

  // Zero-initialized network of the given layer widths.
  Mlp(std::vector<std::size_t> shape, OutputActivation out) : shape_(std::move(shape)), out_act_(out) {
    if (shape_.size() < 2) throw std::invalid_argument("network needs at least an input and an output layer");
    for (auto n : shape_)
      if (n == 0) throw std::invalid_argument("layer widths must be positive");
    for (std::size_t l = 0; l + 1 < shape_.size(); ++l) {
      const auto rows = static_cast<Eigen::Index>(shape_[l + 1]);
      const auto cols = static_cast<Eigen::Index>(shape_[l]);
      layers_.push_back({Matrix::Zero(rows, cols), Vector::Zero(rows)});
      m_.push_back({Matrix::Zero(rows, cols), Vector::Zero(rows)});
      v_.push_back({Matrix::Zero(rows, cols), Vector::Zero(rows)});
    }
    touch();
  }

  // Glorot-uniform weights, zero biases.
  static Mlp init(std::vector<std::size_t> shape, OutputActivation out, std::uint64_t seed) {
    Mlp net(std::move(shape), out);
    std::mt19937_64 rng(seed);
    for (auto& layer : net.layers_) {
      const double bound = std::sqrt(6.0 / static_cast<double>(layer.w.rows() + layer.w.cols()));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (Eigen::Index r = 0; r < layer.w.rows(); ++r)
        for (Eigen::Index c = 0; c < layer.w.cols(); ++c) layer.w(r, c) = dist(rng);
    }
    net.touch();
    return net;
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t input_size() const { return shape_.front(); }
  std::size_t output_size() const { return shape_.back(); }
  OutputActivation output_activation() const { return out_act_; }
  const std::vector<Layer>& layers() const { return layers_; }
  long adam_steps() const { return adam_t_; }
  const std::vector<Layer>& adam_m() const { return m_; }
  const std::vector<Layer>& adam_v() const { return v_; }
  std::uint64_t stamp() const { return stamp_; }

  // Mutable access invalidates outstanding caches.
  std::vector<Layer>& mutable_layers() {
    touch();
    return layers_;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.w.size() + l.b.size());
    return n;
  }

  Vector flat() const { return Gradients{layers_}.flat(); }

  void set_flat(const Vector& p) {
    if (static_cast<std::size_t>(p.size()) != parameter_count()) throw std::invalid_argument("set_flat: size mismatch");
    Eigen::Index at = 0;
    for (auto& l : layers_) {
      for (Eigen::Index r = 0; r < l.w.rows(); ++r)
        for (Eigen::Index c = 0; c < l.w.cols(); ++c) l.w(r, c) = p(at++);
      for (Eigen::Index r = 0; r < l.b.size(); ++r) l.b(r) = p(at++);
    }
    touch();
  }

  Matrix forward(const Matrix& x, ForwardCache* cache = nullptr) const {
    if (static_cast<std::size_t>(x.rows()) != input_size())
      throw std::invalid_argument("forward: input has " + std::to_string(x.rows()) + " rows, network expects " +
                                  std::to_string(input_size()));
    if (cache) {
      cache->stamp = stamp_;
      cache->inputs.clear();
      cache->pre.clear();
    }
    Matrix a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Matrix z = layers_[l].w * a;
      z.colwise() += layers_[l].b;
      if (cache) {
        cache->inputs.push_back(std::move(a));
        cache->pre.push_back(z);
      }
      if (l + 1 < layers_.size()) {
        a = z.cwiseMax(0.0);
      } else {
        a = out_act_ == OutputActivation::Tanh ? Matrix(z.array().tanh().matrix()) : std::move(z);
      }
    }
    if (cache) cache->output = a;
    return a;
  }

  Vector forward(const Vector& x) const { return forward(Matrix(x)).col(0); }

  struct Backward {
    Gradients grads;
    Matrix input_grad;
  };

  Backward backward(const ForwardCache& cache, const Matrix& dy) const {
    if (cache.stamp != stamp_ || cache.pre.size() != layers_.size())
      throw std::logic_error("backward: cache does not belong to this network state");
    if (dy.rows() != cache.output.rows() || dy.cols() != cache.output.cols())
      throw std::invalid_argument("backward: output cotangent shape mismatch");

    Backward out;
    out.grads.layers.resize(layers_.size());
    Matrix dz = dy;
    if (out_act_ == OutputActivation::Tanh) dz.array() *= 1.0 - cache.output.array().square();
    for (std::size_t l = layers_.size(); l-- > 0;) {
      out.grads.layers[l].w = dz * cache.inputs[l].transpose();
      out.grads.layers[l].b = dz.rowwise().sum();
      Matrix da = layers_[l].w.transpose() * dz;
      if (l > 0) {
        dz = (cache.pre[l - 1].array() > 0.0).select(da, 0.0);
      } else {
        out.input_grad = std::move(da);
      }
    }
    return out;
  }

  // One Adam descent step along g.
  void adam_step(const Gradients& g, double lr, const AdamConfig& cfg = {}) {
    if (g.layers.size() != layers_.size()) throw std::invalid_argument("adam_step: gradient shape mismatch");
    ++adam_t_;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam_t_));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam_t_));
    auto update = [&](auto& p, auto& m, auto& v, const auto& grad) {
      if (grad.rows() != p.rows() || grad.cols() != p.cols()) throw std::invalid_argument("adam_step: shape mismatch");
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
      p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.eps);
    };
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      update(layers_[l].w, m_[l].w, v_[l].w, g.layers[l].w);
      update(layers_[l].b, m_[l].b, v_[l].b, g.layers[l].b);
    }
    touch();
  }

  // this <- (1 - tau) * this + tau * online
  void polyak_blend(const Mlp& online, double tau) {
    if (online.shape_ != shape_) throw std::invalid_argument("polyak_blend: shape mismatch");
    if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("polyak_blend: tau outside [0, 1]");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      layers_[l].w = (1.0 - tau) * layers_[l].w + tau * online.layers_[l].w;
      layers_[l].b = (1.0 - tau) * layers_[l].b + tau * online.layers_[l].b;
    }
    touch();
  }

  // Parameters only; optimizer moments are not persisted.
  void save(std::ostream& os) const {
    os.write(detail::kMagic, sizeof(detail::kMagic));
    detail::write_u32(os, static_cast<std::uint32_t>(shape_.size()));
    for (auto n : shape_) detail::write_u32(os, static_cast<std::uint32_t>(n));
    detail::write_u32(os, static_cast<std::uint32_t>(out_act_));
    for (const auto& l : layers_) {
      for (Eigen::Index r = 0; r < l.w.rows(); ++r)
        for (Eigen::Index c = 0; c < l.w.cols(); ++c) detail::write_f64(os, l.w(r, c));
      for (Eigen::Index r = 0; r < l.b.size(); ++r) detail::write_f64(os, l.b(r));
    }
  }

  static Mlp load(std::istream& is) {
    char magic[sizeof(detail::kMagic)];
    if (!is.read(magic, sizeof(magic)) || !std::equal(magic, magic + sizeof(magic), detail::kMagic))
      throw std::runtime_error("not a network file (bad magic)");
    const std::uint32_t depth = detail::read_u32(is);
    if (depth < 2 || depth > 64) throw std::runtime_error("network file: implausible layer count");
    std::vector<std::size_t> shape(depth);
    for (auto& n : shape) n = detail::read_u32(is);
    const std::uint32_t act = detail::read_u32(is);
    if (act > 1) throw std::runtime_error("network file: unknown output activation");
    Mlp net(shape, static_cast<OutputActivation>(act));
    for (auto& l : net.layers_) {
      for (Eigen::Index r = 0; r < l.w.rows(); ++r)
        for (Eigen::Index c = 0; c < l.w.cols(); ++c) l.w(r, c) = detail::read_f64(is);
      for (Eigen::Index r = 0; r < l.b.size(); ++r) l.b(r) = detail::read_f64(is);
    }
    net.touch();
    return net;
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    save(f);
  }

  static Mlp load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    return load(f);
  }

 private:
  void touch() { stamp_ = detail::next_stamp(); }

  std::vector<std::size_t> shape_;
  OutputActivation out_act_ = OutputActivation::Identity;
  std::vector<Layer> layers_;
  std::vector<Layer> m_;
  std::vector<Layer> v_;
  long adam_t_ = 0;
  std::uint64_t stamp_ = 0;
};

inline Mlp adam_step(Mlp net, const Gradients& g, double lr) {
  net.adam_step(g, lr);
  return net;
}

inline Mlp polyak_blend(Mlp target, const Mlp& online, double tau) {
  target.polyak_blend(online, tau);
  return target;
}

}  // namespace tdg::nn
