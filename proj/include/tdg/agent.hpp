#pragma once

// Goal-conditioned DDPG with time-dependent goals.
//
// Every step carries its own goal g_t, so transitions are stored as
// (s_t, a_t, g_t, s_{t+1}, g_{t+1}) and the critic bootstraps through the
// goal that is active at t+1. Hindsight replay ("future" strategy) swaps both
// goals of a sampled transition for a spectrum the agent actually produced
// later in the same episode and re-scores the reward against it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdg/dsp.hpp"
#include "tdg/neuralnet.hpp"

namespace tdg::agent {

using nn::Matrix;
using nn::Vector;

// r(achieved spectrum, goal spectrum)
using RewardFn = std::function<double(std::span<const double>, std::span<const double>)>;

struct AgentConfig {
  double gamma = 0.995;
  double lr = 0.001;
  double random_action_prob = 0.30;
  double action_noise_scale = 0.20;
  double her_ratio = 4.0;  // relabeled : original
  std::size_t batch_size = 128;
  std::size_t updates_per_episode = 40;
  std::size_t buffer_capacity = 5000;  // episodes
  double tau = 0.05;
  bool her_segment_coherent = false;
  bool normalize_inputs = true;
  bool clip_target = true;  // clip Bellman targets to [-1/(1-gamma), 0]
  double action_l2 = 1.0;   // penalty on mean squared actor output

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("agent: gamma must lie in (0, 1)");
    if (!(lr > 0.0)) throw std::invalid_argument("agent: learning rate must be positive");
    if (random_action_prob < 0.0 || random_action_prob > 1.0)
      throw std::invalid_argument("agent: random action probability outside [0, 1]");
    if (action_noise_scale < 0.0) throw std::invalid_argument("agent: action noise must be non-negative");
    if (her_ratio < 0.0) throw std::invalid_argument("agent: HER ratio must be non-negative");
    if (batch_size == 0) throw std::invalid_argument("agent: batch size must be positive");
    if (buffer_capacity == 0) throw std::invalid_argument("agent: buffer capacity must be positive");
    if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("agent: tau outside [0, 1]");
    if (action_l2 < 0.0) throw std::invalid_argument("agent: action_l2 must be non-negative");
  }

  friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

inline constexpr int kEpisodeLength = 200;
inline constexpr int kSegmentLength = 25;

// One materialized replay tuple.
struct Transition {
  std::vector<double> s_t;
  std::vector<double> a_t;
  std::vector<double> g_t;
  std::vector<double> s_next;
  std::vector<double> g_next;
  std::vector<double> achieved_next;
  double reward = -1.0;
  double achieved_freq_next = 0.0;
  std::uint64_t episode_id = 0;
  int step_index = 0;
  bool segment_boundary = false;

  bool terminal() const { return step_index == kEpisodeLength - 1; }
};

using GoalPtr = std::shared_ptr<const dsp::Spectrum>;

// A complete episode without duplicated storage: observation t+1 doubles as
// the successor of step t, and goals are shared per segment.
struct EpisodeRecord {
  std::uint64_t id = 0;
  std::size_t audio_dim = 0;
  std::vector<std::vector<double>> features;  // s_0 .. s_T (audio bins, then proprio)
  std::vector<GoalPtr> goals;                 // goal shown with each s_t
  std::vector<std::vector<double>> actions;   // a_0 .. a_{T-1}
  std::vector<double> rewards;                // r(s_{t+1}, g_{t+1})
  std::vector<double> achieved_freqs;         // pitch of s_{t+1}

  int steps() const { return static_cast<int>(actions.size()); }

  std::span<const double> achieved(int t) const {
    return std::span<const double>(features.at(static_cast<std::size_t>(t + 1))).first(audio_dim);
  }
  std::span<const double> goal(int t) const { return goals.at(static_cast<std::size_t>(t))->bins; }

  void check() const {
    const auto n = actions.size();
    if (n == 0) throw std::invalid_argument("episode is empty");
    if (features.size() != n + 1 || goals.size() != n + 1 || rewards.size() != n || achieved_freqs.size() != n)
      throw std::invalid_argument("episode record arrays are inconsistent");
  }

  Transition transition(int t) const {
    const auto i = static_cast<std::size_t>(t);
    Transition tr;
    tr.s_t = features.at(i);
    tr.a_t = actions.at(i);
    tr.g_t = goals.at(i)->bins;
    tr.s_next = features.at(i + 1);
    tr.g_next = goals.at(i + 1)->bins;
    const auto ach = achieved(t);
    tr.achieved_next.assign(ach.begin(), ach.end());
    tr.reward = rewards.at(i);
    tr.achieved_freq_next = achieved_freqs.at(i);
    tr.episode_id = id;
    tr.step_index = t;
    tr.segment_boundary = (t + 1) % kSegmentLength == 0;
    return tr;
  }
};

// Tuple fed to the learner, after optional hindsight relabeling.
struct TrainingTuple {
  std::vector<double> s;
  std::vector<double> a;
  std::vector<double> g;
  double r = -1.0;
  std::vector<double> s_next;
  std::vector<double> g_next;
  bool terminal = false;
  bool relabeled = false;
};

// Relabel (or keep) step t of an episode. With probability ratio/(ratio+1) a
// future step t' in (t, T] is drawn and the spectrum achieved at t'-1 replaces
// both goals; the reward is recomputed, never copied.
inline TrainingTuple her_sample(const EpisodeRecord& ep, int t, std::mt19937_64& rng, double ratio, const RewardFn& reward,
                                bool segment_coherent = false) {
  const int steps = ep.steps();
  if (steps == 0) throw std::invalid_argument("her: empty episode");
  if (t < 0 || t >= steps) throw std::out_of_range("her: step index out of range");
  const auto i = static_cast<std::size_t>(t);
  TrainingTuple out;
  out.s = ep.features[i];
  out.a = ep.actions[i];
  out.s_next = ep.features[i + 1];
  out.terminal = t == steps - 1;

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const double p_relabel = ratio / (ratio + 1.0);
  if (ratio > 0.0 && coin(rng) < p_relabel) {
    int last = steps;
    if (segment_coherent) last = std::min(steps, (t / kSegmentLength + 1) * kSegmentLength);
    std::uniform_int_distribution<int> future(t + 1, last);
    const int t_future = future(rng);
    const auto g = ep.achieved(t_future - 1);
    out.g.assign(g.begin(), g.end());
    out.g_next = out.g;
    out.r = reward(ep.achieved(t), out.g_next);
    out.relabeled = true;
  } else {
    out.g = ep.goals[i]->bins;
    out.g_next = ep.goals[i + 1]->bins;
    out.r = ep.rewards[i];
  }
  return out;
}

// Relabels every transition of an episode once.
inline std::vector<TrainingTuple> her_relabel(const EpisodeRecord& ep, std::mt19937_64& rng, double ratio,
                                              const RewardFn& reward, bool segment_coherent = false) {
  ep.check();
  std::vector<TrainingTuple> out;
  out.reserve(static_cast<std::size_t>(ep.steps()));
  for (int t = 0; t < ep.steps(); ++t) out.push_back(her_sample(ep, t, rng, ratio, reward, segment_coherent));
  return out;
}

// Ring buffer of whole episodes; the oldest is evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("replay buffer capacity must be positive");
  }

  void push(EpisodeRecord ep) {
    ep.check();
    if (episodes_.size() == capacity_) episodes_.pop_front();
    episodes_.push_back(std::move(ep));
  }

  std::size_t size() const { return episodes_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return episodes_.empty(); }
  const EpisodeRecord& at(std::size_t i) const { return episodes_.at(i); }
  const EpisodeRecord& oldest() const { return episodes_.front(); }
  const EpisodeRecord& newest() const { return episodes_.back(); }

 private:
  std::size_t capacity_;
  std::deque<EpisodeRecord> episodes_;
};

// Running mean / standard deviation with clipping of the standardized value.
class Normalizer {
 public:
  Normalizer() = default;
  explicit Normalizer(std::size_t dim, double clip = 5.0, double min_std = 1e-2)
      : sum_(Vector::Zero(static_cast<Eigen::Index>(dim))),
        sumsq_(Vector::Zero(static_cast<Eigen::Index>(dim))),
        mean_(Vector::Zero(static_cast<Eigen::Index>(dim))),
        std_(Vector::Ones(static_cast<Eigen::Index>(dim))),
        clip_(clip),
        min_std_(min_std) {}

  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  const Vector& stddev() const { return std_; }
  double clip() const { return clip_; }
  double count() const { return count_; }

  void update(std::span<const double> x) {
    if (x.size() != dim()) throw std::invalid_argument("normalizer: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum_(static_cast<Eigen::Index>(i)) += x[i];
      sumsq_(static_cast<Eigen::Index>(i)) += x[i] * x[i];
    }
    count_ += 1.0;
  }

  // Publishes the accumulated statistics.
  void recompute() {
    if (count_ <= 0.0) return;
    mean_ = sum_ / count_;
    const Vector var = (sumsq_ / count_ - mean_.cwiseProduct(mean_)).cwiseMax(0.0);
    std_ = var.cwiseSqrt().cwiseMax(min_std_);
  }

  void apply(std::span<const double> x, Eigen::Ref<Vector> out) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      out(k) = std::clamp((x[i] - mean_(k)) / std_(k), -clip_, clip_);
    }
  }

  void save(std::ostream& os) const {
    nn::detail::write_u32(os, static_cast<std::uint32_t>(dim()));
    nn::detail::write_f64(os, clip_);
    for (Eigen::Index i = 0; i < mean_.size(); ++i) nn::detail::write_f64(os, mean_(i));
    for (Eigen::Index i = 0; i < std_.size(); ++i) nn::detail::write_f64(os, std_(i));
  }

  static Normalizer load(std::istream& is) {
    const std::uint32_t dim = nn::detail::read_u32(is);
    if (dim > (1u << 20)) throw std::runtime_error("normalizer: implausible dimension");
    Normalizer n(dim, nn::detail::read_f64(is));
    for (Eigen::Index i = 0; i < n.mean_.size(); ++i) n.mean_(i) = nn::detail::read_f64(is);
    for (Eigen::Index i = 0; i < n.std_.size(); ++i) n.std_(i) = nn::detail::read_f64(is);
    return n;
  }

 private:
  Vector sum_;
  Vector sumsq_;
  Vector mean_;
  Vector std_;
  double count_ = 0.0;
  double clip_ = 5.0;
  double min_std_ = 1e-2;
};

// Column-stacked learner inputs. Observation and goal rows are already
// normalized.
struct Batch {
  Matrix s;       // obs_dim x B
  Matrix g;       // goal_dim x B
  Matrix a;       // act_dim x B
  Vector r;       // B
  Matrix s_next;  // obs_dim x B
  Matrix g_next;  // goal_dim x B
  Vector not_terminal;

  Eigen::Index size() const { return s.cols(); }
};

inline Matrix stack(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

inline Matrix stack(const Matrix& a, const Matrix& b, const Matrix& c) {
  Matrix out(a.rows() + b.rows() + c.rows(), a.cols());
  out << a, b, c;
  return out;
}

// One Adam step on the mean-squared Bellman error; returns the loss before
// the step.
inline double critic_update(nn::Mlp& critic, const nn::Mlp& critic_target, const nn::Mlp& actor_target, const Batch& batch,
                            const AgentConfig& cfg) {
  const double n = static_cast<double>(batch.size());
  const Matrix next_action = actor_target.forward(stack(batch.s_next, batch.g_next));
  const Matrix q_next = critic_target.forward(stack(batch.s_next, batch.g_next, next_action));
  Vector y = batch.r + cfg.gamma * batch.not_terminal.cwiseProduct(q_next.row(0).transpose());
  if (cfg.clip_target) y = y.cwiseMax(-1.0 / (1.0 - cfg.gamma)).cwiseMin(0.0);

  nn::ForwardCache cache;
  const Matrix q = critic.forward(stack(batch.s, batch.g, batch.a), &cache);
  const Vector err = q.row(0).transpose() - y;
  const double loss = err.squaredNorm() / n;
  const Matrix dq = (2.0 / n) * err.transpose();
  const auto back = critic.backward(cache, dq);
  critic.adam_step(back.grads, cfg.lr);
  return loss;
}

// Gradient of J = mean Q(s, actor(s, g), g) - action_l2 * mean(actor^2) with
// respect to the actor weights.
inline nn::Gradients actor_objective_gradient(const nn::Mlp& actor, const nn::Mlp& critic, const Batch& batch,
                                              double* objective = nullptr, double action_l2 = 0.0) {
  const double n = static_cast<double>(batch.size());
  nn::ForwardCache actor_cache;
  const Matrix act = actor.forward(stack(batch.s, batch.g), &actor_cache);
  nn::ForwardCache critic_cache;
  const Matrix q = critic.forward(stack(batch.s, batch.g, act), &critic_cache);
  const double elems = static_cast<double>(act.size());
  if (objective) *objective = q.sum() / n - action_l2 * act.squaredNorm() / elems;
  const Matrix dq = Matrix::Constant(1, q.cols(), 1.0 / n);
  const auto critic_back = critic.backward(critic_cache, dq);
  Matrix d_action = critic_back.input_grad.bottomRows(act.rows());
  if (action_l2 > 0.0) d_action -= (2.0 * action_l2 / elems) * act;
  return actor.backward(actor_cache, d_action).grads;
}

// One Adam ascent step on J; returns J before the step.
inline double actor_update(nn::Mlp& actor, const nn::Mlp& critic, const Batch& batch, const AgentConfig& cfg) {
  double objective = 0.0;
  nn::Gradients grad = actor_objective_gradient(actor, critic, batch, &objective, cfg.action_l2);
  grad *= -1.0;
  actor.adam_step(grad, cfg.lr);
  return objective;
}

struct TrainStats {
  double critic_loss = 0.0;
  double actor_objective = 0.0;
  double relabeled_fraction = 0.0;
  std::size_t updates = 0;
};

// Actor plus the input statistics it was trained with.
struct PolicySnapshot {
  nn::Mlp actor;
  Normalizer obs_norm;
  Normalizer goal_norm;
  bool normalize = true;

  std::vector<double> act(std::span<const double> s, std::span<const double> g) const {
    Vector x(static_cast<Eigen::Index>(s.size() + g.size()));
    fill_input(s, g, x);
    const Vector y = actor.forward(x);
    return {y.data(), y.data() + y.size()};
  }

  void fill_input(std::span<const double> s, std::span<const double> g, Eigen::Ref<Vector> x) const {
    const auto ns = static_cast<Eigen::Index>(s.size());
    const auto ng = static_cast<Eigen::Index>(g.size());
    if (normalize) {
      obs_norm.apply(s, x.head(ns));
      goal_norm.apply(g, x.segment(ns, ng));
    } else {
      for (Eigen::Index i = 0; i < ns; ++i) x(i) = s[static_cast<std::size_t>(i)];
      for (Eigen::Index i = 0; i < ng; ++i) x(ns + i) = g[static_cast<std::size_t>(i)];
    }
  }

  // Network block followed by the two normalizer blocks.
  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    actor.save(f);
    nn::detail::write_u32(f, normalize ? 1u : 0u);
    obs_norm.save(f);
    goal_norm.save(f);
    if (!f) throw std::runtime_error("write failed for '" + path + "'");
  }

  static PolicySnapshot load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open policy '" + path + "'");
    PolicySnapshot p;
    p.actor = nn::Mlp::load(f);
    p.normalize = nn::detail::read_u32(f) != 0;
    p.obs_norm = Normalizer::load(f);
    p.goal_norm = Normalizer::load(f);
    if (p.obs_norm.dim() + p.goal_norm.dim() != p.actor.input_size())
      throw std::runtime_error("policy file: normalizer sizes do not match the network input");
    return p;
  }
};

class DdpgAgent {
 public:
  DdpgAgent(std::size_t obs_dim, std::size_t goal_dim, std::size_t action_dim, AgentConfig cfg, std::uint64_t seed)
      : cfg_(cfg),
        obs_dim_(obs_dim),
        goal_dim_(goal_dim),
        action_dim_(action_dim),
        rng_(seed),
        buffer_(cfg.buffer_capacity),
        obs_norm_(obs_dim),
        goal_norm_(goal_dim) {
    cfg_.validate();
    std::mt19937_64 init_rng(seed ^ 0x9e3779b97f4a7c15ULL);
    actor_ = nn::Mlp::init(nn::standard_shape(obs_dim + goal_dim, action_dim), nn::OutputActivation::Tanh, init_rng());
    critic_ = nn::Mlp::init(nn::standard_shape(obs_dim + goal_dim + action_dim, 1), nn::OutputActivation::Identity,
                            init_rng());
    actor_target_ = actor_;
    critic_target_ = critic_;
  }

  const AgentConfig& config() const { return cfg_; }
  const nn::Mlp& actor() const { return actor_; }
  const nn::Mlp& critic() const { return critic_; }
  const nn::Mlp& actor_target() const { return actor_target_; }
  const nn::Mlp& critic_target() const { return critic_target_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const Normalizer& obs_normalizer() const { return obs_norm_; }
  const Normalizer& goal_normalizer() const { return goal_norm_; }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t goal_dim() const { return goal_dim_; }
  std::size_t action_dim() const { return action_dim_; }

  PolicySnapshot snapshot() const { return {actor_, obs_norm_, goal_norm_, cfg_.normalize_inputs}; }

  // Deterministic actor output, or the exploratory variant: uniform random
  // with probability random_action_prob, otherwise Gaussian-perturbed.
  std::vector<double> select_action(std::span<const double> s, std::span<const double> g, bool explore) {
    check_dims(s, g);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (explore && coin(rng_) < cfg_.random_action_prob) {
      std::uniform_real_distribution<double> uni(-1.0, 1.0);
      std::vector<double> a(action_dim_);
      for (auto& v : a) v = uni(rng_);
      last_action_random_ = true;
      return a;
    }
    last_action_random_ = false;
    auto a = snapshot_act(s, g);
    if (explore) {
      std::normal_distribution<double> noise(0.0, cfg_.action_noise_scale);
      for (auto& v : a) v = std::clamp(v + noise(rng_), -1.0, 1.0);
    }
    return a;
  }

  bool last_action_was_random() const { return last_action_random_; }

  void store(EpisodeRecord ep) {
    ep.check();
    if (ep.features.front().size() != obs_dim_ || ep.goals.front()->bins.size() != goal_dim_)
      throw std::invalid_argument("store: episode feature sizes do not match the agent");
    ep.id = next_episode_id_++;
    if (cfg_.normalize_inputs) {
      for (const auto& f : ep.features) obs_norm_.update(f);
      for (const auto& g : ep.goals) goal_norm_.update(g->bins);
      obs_norm_.recompute();
      goal_norm_.recompute();
    }
    buffer_.push(std::move(ep));
  }

  Batch make_batch(std::span<const TrainingTuple> tuples) const {
    const auto n = static_cast<Eigen::Index>(tuples.size());
    Batch b;
    b.s.resize(static_cast<Eigen::Index>(obs_dim_), n);
    b.g.resize(static_cast<Eigen::Index>(goal_dim_), n);
    b.a.resize(static_cast<Eigen::Index>(action_dim_), n);
    b.r.resize(n);
    b.s_next.resize(static_cast<Eigen::Index>(obs_dim_), n);
    b.g_next.resize(static_cast<Eigen::Index>(goal_dim_), n);
    b.not_terminal.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& t = tuples[static_cast<std::size_t>(j)];
      normalize_into(obs_norm_, t.s, b.s.col(j));
      normalize_into(goal_norm_, t.g, b.g.col(j));
      normalize_into(obs_norm_, t.s_next, b.s_next.col(j));
      normalize_into(goal_norm_, t.g_next, b.g_next.col(j));
      for (std::size_t k = 0; k < action_dim_; ++k) b.a(static_cast<Eigen::Index>(k), j) = t.a[k];
      b.r(j) = t.r;
      b.not_terminal(j) = t.terminal ? 0.0 : 1.0;
    }
    return b;
  }

  std::vector<TrainingTuple> sample_tuples(const RewardFn& reward) {
    if (buffer_.empty()) throw std::logic_error("sample from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick_ep(0, buffer_.size() - 1);
    std::vector<TrainingTuple> tuples;
    tuples.reserve(cfg_.batch_size);
    for (std::size_t i = 0; i < cfg_.batch_size; ++i) {
      const auto& ep = buffer_.at(pick_ep(rng_));
      std::uniform_int_distribution<int> pick_t(0, ep.steps() - 1);
      tuples.push_back(her_sample(ep, pick_t(rng_), rng_, cfg_.her_ratio, reward, cfg_.her_segment_coherent));
    }
    return tuples;
  }

  // Update phase after an episode: critic then actor per batch, then one
  // Polyak blend of both targets.
  TrainStats train(const RewardFn& reward) {
    TrainStats stats;
    if (cfg_.updates_per_episode == 0 || buffer_.empty()) return stats;
    std::size_t relabeled = 0;
    for (std::size_t u = 0; u < cfg_.updates_per_episode; ++u) {
      const auto tuples = sample_tuples(reward);
      for (const auto& t : tuples) relabeled += t.relabeled ? 1 : 0;
      const Batch batch = make_batch(tuples);
      stats.critic_loss += critic_update(critic_, critic_target_, actor_target_, batch, cfg_);
      stats.actor_objective += actor_update(actor_, critic_, batch, cfg_);
      ++stats.updates;
    }
    const auto n = static_cast<double>(stats.updates);
    stats.critic_loss /= n;
    stats.actor_objective /= n;
    stats.relabeled_fraction = static_cast<double>(relabeled) / (n * static_cast<double>(cfg_.batch_size));
    actor_target_.polyak_blend(actor_, cfg_.tau);
    critic_target_.polyak_blend(critic_, cfg_.tau);
    return stats;
  }

 private:
  void check_dims(std::span<const double> s, std::span<const double> g) const {
    if (s.size() != obs_dim_ || g.size() != goal_dim_)
      throw std::invalid_argument("agent: observation/goal size mismatch (" + std::to_string(s.size()) + ", " +
                                  std::to_string(g.size()) + ")");
  }

  std::vector<double> snapshot_act(std::span<const double> s, std::span<const double> g) const {
    Vector x(static_cast<Eigen::Index>(obs_dim_ + goal_dim_));
    normalize_into(obs_norm_, s, x.head(static_cast<Eigen::Index>(obs_dim_)));
    normalize_into(goal_norm_, g, x.tail(static_cast<Eigen::Index>(goal_dim_)));
    const Vector y = actor_.forward(x);
    return {y.data(), y.data() + y.size()};
  }

  void normalize_into(const Normalizer& norm, std::span<const double> x, Eigen::Ref<Vector> out) const {
    if (cfg_.normalize_inputs) {
      norm.apply(x, out);
    } else {
      for (std::size_t i = 0; i < x.size(); ++i) out(static_cast<Eigen::Index>(i)) = x[i];
    }
  }

  AgentConfig cfg_;
  std::size_t obs_dim_;
  std::size_t goal_dim_;
  std::size_t action_dim_;
  std::mt19937_64 rng_;
  nn::Mlp actor_;
  nn::Mlp critic_;
  nn::Mlp actor_target_;
  nn::Mlp critic_target_;
  ReplayBuffer buffer_;
  Normalizer obs_norm_;
  Normalizer goal_norm_;
  std::uint64_t next_episode_id_ = 0;
  bool last_action_random_ = false;
};

}  // namespace tdg::agent
