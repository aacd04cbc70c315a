#pragma once

// Analytic robot models: a 1-DOF cart on a bounded track and a 6-DOF serial
// arm actuated either per joint or through damped-least-squares IK.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace tdg::kin {

using Vec3 = std::array<double, 3>;
using Joints = std::array<double, 6>;

inline constexpr double kLinkLength = 0.2;
inline constexpr double kMaxJointStep = 0.035;  // rad per step
inline constexpr double kMaxTipStep = 0.02;     // m per step
inline constexpr double kIkDamping = 0.01;
inline constexpr double kCartMin = 0.05;
inline constexpr double kCartMax = 0.60;

enum class RobotKind { Cart1D, Arm6D };
enum class ActionSpace { Cartesian, Joint };

inline std::string_view to_string(RobotKind k) { return k == RobotKind::Cart1D ? "cart1d" : "arm6d"; }
inline std::string_view to_string(ActionSpace s) { return s == ActionSpace::Cartesian ? "cartesian" : "joint"; }

inline RobotKind parse_robot_kind(std::string_view s) {
  if (s == "cart1d") return RobotKind::Cart1D;
  if (s == "arm6d") return RobotKind::Arm6D;
  throw std::invalid_argument("unknown robot '" + std::string(s) + "' (expected cart1d or arm6d)");
}

inline ActionSpace parse_action_space(std::string_view s) {
  if (s == "cartesian") return ActionSpace::Cartesian;
  if (s == "joint") return ActionSpace::Joint;
  throw std::invalid_argument("unknown actuation '" + std::string(s) + "' (expected cartesian or joint)");
}

struct Limits {
  double lo;
  double hi;
};

inline constexpr std::array<Limits, 6> kArmLimits{{
    {-std::numbers::pi, std::numbers::pi}, {-2.0, 2.0}, {-2.0, 2.0}, {-2.0, 2.0}, {-2.0, 2.0}, {-2.0, 2.0}}};

// Rotation axes of the chain, base to tip: z, y, y, y, y, z.
inline constexpr std::array<char, 6> kArmAxes{'z', 'y', 'y', 'y', 'y', 'z'};

struct Action {
  std::vector<double> values;
  ActionSpace space = ActionSpace::Cartesian;
};

inline std::size_t action_dim(RobotKind robot, ActionSpace space) {
  if (robot == RobotKind::Cart1D) return 1;
  return space == ActionSpace::Cartesian ? 3 : 6;
}

// Rotations composed as 3x3 matrices, each link translating 0.2 m along the
// local z axis after its joint.
inline Vec3 forward_kinematics(const Joints& q) {
  using Mat = std::array<std::array<double, 3>, 3>;
  Mat r{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  Vec3 p{0.0, 0.0, 0.0};
  for (std::size_t j = 0; j < 6; ++j) {
    const double c = std::cos(q[j]);
    const double s = std::sin(q[j]);
    Mat next{};
    for (int i = 0; i < 3; ++i) {
      if (kArmAxes[j] == 'z') {
        next[i][0] = r[i][0] * c + r[i][1] * s;
        next[i][1] = -r[i][0] * s + r[i][1] * c;
        next[i][2] = r[i][2];
      } else {
        next[i][0] = r[i][0] * c - r[i][2] * s;
        next[i][1] = r[i][1];
        next[i][2] = r[i][0] * s + r[i][2] * c;
      }
    }
    r = next;
    for (int i = 0; i < 3; ++i) p[i] += r[i][2] * kLinkLength;
  }
  return p;
}

class RobotState {
 public:
  static RobotState cart(double position) {
    RobotState s(RobotKind::Cart1D);
    s.position_ = std::clamp(position, kCartMin, kCartMax);
    s.refresh();
    return s;
  }

  static RobotState arm(const Joints& joints) {
    RobotState s(RobotKind::Arm6D);
    for (std::size_t j = 0; j < 6; ++j) s.joints_[j] = std::clamp(joints[j], kArmLimits[j].lo, kArmLimits[j].hi);
    s.refresh();
    return s;
  }

  RobotKind kind() const { return kind_; }
  const Joints& joints() const { return joints_; }
  double position() const { return position_; }
  const Vec3& tip() const { return tip_; }

  // Proprioceptive reading for the given actuation mode.
  std::vector<double> proprio(ActionSpace space) const {
    if (kind_ == RobotKind::Cart1D) return {position_};
    if (space == ActionSpace::Joint) return {joints_.begin(), joints_.end()};
    return {tip_.begin(), tip_.end()};
  }

  friend bool operator==(const RobotState&, const RobotState&) = default;

 private:
  explicit RobotState(RobotKind kind) : kind_(kind) {}

  void refresh() { tip_ = kind_ == RobotKind::Cart1D ? Vec3{position_, 0.0, 0.0} : forward_kinematics(joints_); }

  RobotKind kind_;
  Joints joints_{};
  double position_ = 0.0;
  Vec3 tip_{};
};

namespace detail {

inline double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

inline void expect_len(const Action& a, std::size_t n, const char* what) {
  if (a.values.size() != n)
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(n) + " action components, got " +
                                std::to_string(a.values.size()));
}

}  // namespace detail

inline RobotState apply_joint_action(const RobotState& state, const Action& a) {
  if (state.kind() != RobotKind::Arm6D || a.space != ActionSpace::Joint)
    throw std::invalid_argument("apply_joint_action: needs an arm and a joint-space action");
  detail::expect_len(a, 6, "apply_joint_action");
  Joints q = state.joints();
  for (std::size_t j = 0; j < 6; ++j) q[j] += detail::clamp_unit(a.values[j]) * kMaxJointStep;
  return RobotState::arm(q);
}

// Central-difference Jacobian of the tip position.
inline Eigen::Matrix<double, 3, 6> tip_jacobian(const Joints& q) {
  constexpr double h = 1e-6;
  Eigen::Matrix<double, 3, 6> jac;
  for (std::size_t j = 0; j < 6; ++j) {
    Joints up = q;
    Joints dn = q;
    up[j] += h;
    dn[j] -= h;
    const Vec3 pu = forward_kinematics(up);
    const Vec3 pd = forward_kinematics(dn);
    for (int i = 0; i < 3; ++i) jac(i, static_cast<int>(j)) = (pu[i] - pd[i]) / (2.0 * h);
  }
  return jac;
}

// One damped-least-squares iteration toward tip + a * 0.02 m.
inline RobotState apply_cartesian_action(const RobotState& state, const Action& a) {
  if (state.kind() != RobotKind::Arm6D || a.space != ActionSpace::Cartesian)
    throw std::invalid_argument("apply_cartesian_action: needs an arm and a Cartesian action");
  detail::expect_len(a, 3, "apply_cartesian_action");
  Eigen::Vector3d d;
  for (int i = 0; i < 3; ++i) d(i) = detail::clamp_unit(a.values[static_cast<std::size_t>(i)]) * kMaxTipStep;
  if (d.isZero(0.0)) return state;

  const auto jac = tip_jacobian(state.joints());
  const Eigen::Matrix3d jjt = jac * jac.transpose() + kIkDamping * kIkDamping * Eigen::Matrix3d::Identity();
  const Eigen::Matrix<double, 6, 1> dq = jac.transpose() * jjt.ldlt().solve(d);
  Joints q = state.joints();
  for (std::size_t j = 0; j < 6; ++j) q[j] += dq(static_cast<int>(j));
  return RobotState::arm(q);
}

inline RobotState apply_cart_action(const RobotState& state, const Action& a) {
  if (state.kind() != RobotKind::Cart1D) throw std::invalid_argument("apply_cart_action: needs a cart");
  detail::expect_len(a, 1, "apply_cart_action");
  return RobotState::cart(state.position() + detail::clamp_unit(a.values[0]) * kMaxTipStep);
}

inline RobotState apply_action(const RobotState& state, const Action& a) {
  if (state.kind() == RobotKind::Cart1D) return apply_cart_action(state, a);
  return a.space == ActionSpace::Joint ? apply_joint_action(state, a) : apply_cartesian_action(state, a);
}

inline double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

}  // namespace tdg::kin
