#pragma once

// Small hand-built problems shared by the unit and acceptance tests.

#include <array>
#include <cmath>

#include "tdg/agent.hpp"

namespace fixture {

struct ChainResult {
  int updates = 0;  // updates until every Q value was within tolerance, or the budget
  bool converged = false;
  std::array<double, 3> q{};
  std::array<double, 3> expected{};
};

// Deterministic chain s0 -> s1 -> s2 -> end with reward -1 per step. States
// are one-hot, the goal is a constant zero and the action is ignored by the
// dynamics. The target policy always outputs 0, the action stored in the
// batch. The critic is trained with the agent's Bellman update and a target
// network blended after every update.
inline ChainResult bellman_chain(int budget, double tolerance, std::uint64_t seed = 1) {
  using tdg::nn::Matrix;
  tdg::agent::AgentConfig cfg;
  const double tau = 0.05;
  auto critic = tdg::nn::Mlp::init(tdg::nn::standard_shape(5, 1), tdg::nn::OutputActivation::Identity, seed);
  auto critic_target = critic;
  // all-zero weights: the policy always picks the action the batch holds
  const tdg::nn::Mlp actor_target(tdg::nn::standard_shape(4, 1), tdg::nn::OutputActivation::Tanh);

  tdg::agent::Batch b;
  b.s = Matrix::Identity(3, 3);
  b.g = Matrix::Zero(1, 3);
  b.a = Matrix::Zero(1, 3);
  b.r = tdg::nn::Vector::Constant(3, -1.0);
  b.s_next = Matrix::Zero(3, 3);
  b.s_next(1, 0) = 1.0;
  b.s_next(2, 1) = 1.0;
  b.g_next = Matrix::Zero(1, 3);
  b.not_terminal = tdg::nn::Vector::Ones(3);
  b.not_terminal(2) = 0.0;

  ChainResult out;
  out.expected = {-1.0 - cfg.gamma * (1.0 + cfg.gamma), -1.0 - cfg.gamma, -1.0};
  const Matrix probe = tdg::agent::stack(b.s, b.g, b.a);
  for (int u = 1; u <= budget; ++u) {
    tdg::agent::critic_update(critic, critic_target, actor_target, b, cfg);
    critic_target.polyak_blend(critic, tau);
    const Matrix q = critic.forward(probe);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      out.q[static_cast<std::size_t>(i)] = q(0, i);
      worst = std::max(worst, std::abs(q(0, i) - out.expected[static_cast<std::size_t>(i)]));
    }
    out.updates = u;
    if (worst < tolerance) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace fixture
