// Copyright 2026 The Dualhab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dualhab/kinematics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "dualhab/error.h"
#include "dualhab/world.h"

namespace dualhab {
namespace {

using Eigen::Matrix3d;
using Eigen::Matrix4d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

constexpr double kMaxStep = 0.5;          // rad per DLS iteration
constexpr double kTightTolerance = 1e-10;  // early exit once this close
constexpr int kRestarts = 10;

Matrix3d axis_rotation(const Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

// Joint origins and world axes alongside the end-effector pose.
struct ChainFrames {
  std::vector<Vector3d> origins;
  std::vector<Vector3d> axes;
  Pose tip;
};

ChainFrames chain_frames(const KinematicChain& chain, const std::vector<double>& q) {
  ChainFrames frames;
  frames.origins.reserve(q.size());
  frames.axes.reserve(q.size());
  Matrix3d r = Matrix3d::Identity();
  Vector3d p = chain.base_offset;
  for (int i = 0; i < chain.n_joints(); ++i) {
    frames.origins.push_back(p);
    frames.axes.push_back(r * chain.axes[i]);
    r = r * axis_rotation(chain.axes[i], q[i]);
    p = p + r * Vector3d(chain.link_lengths[i], 0.0, 0.0);
  }
  frames.tip.rotation = r;
  frames.tip.translation = p;
  return frames;
}

Vector3d rotation_vector(const Matrix3d& r) {
  Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

void clamp_to_limits(const KinematicChain& chain, std::vector<double>& q) {
  for (int i = 0; i < chain.n_joints(); ++i) {
    q[i] = std::clamp(q[i], chain.joint_limits[i].first, chain.joint_limits[i].second);
  }
}

struct Residual {
  double position;
  double rotation;
};

Residual residual(const KinematicChain& chain, const std::vector<double>& q,
                  const Pose& target) {
  Pose tip = chain_frames(chain, q).tip;
  return {(target.translation - tip.translation).norm(),
          rotation_distance(target.rotation, tip.rotation)};
}

// One damped-least-squares run from `start`. When `bias_weight` > 0 and the
// chain is redundant, the exact null-space projection of (q_ref - q) is added
// so the task error is unaffected.
std::vector<double> dls_run(const KinematicChain& chain, const Pose& target,
                            std::vector<double> q, const std::vector<double>* q_ref,
                            double bias_weight, const IkOptions& options) {
  const int n = chain.n_joints();
  const double lambda2 = options.damping * options.damping;
  clamp_to_limits(chain, q);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    ChainFrames frames = chain_frames(chain, q);
    Eigen::Matrix<double, 6, 1> e;
    e.head<3>() = target.translation - frames.tip.translation;
    e.tail<3>() = rotation_vector(target.rotation * frames.tip.rotation.transpose());
    if (e.head<3>().norm() <= kTightTolerance && e.tail<3>().norm() <= kTightTolerance) {
      break;
    }
    MatrixXd jac(6, n);
    for (int i = 0; i < n; ++i) {
      jac.block<3, 1>(0, i) = frames.axes[i].cross(frames.tip.translation - frames.origins[i]);
      jac.block<3, 1>(3, i) = frames.axes[i];
    }
    Eigen::Matrix<double, 6, 6> jjt = jac * jac.transpose();
    jjt.diagonal().array() += lambda2;
    VectorXd dq = jac.transpose() * jjt.ldlt().solve(e);
    if (q_ref != nullptr && bias_weight > 0.0 && n > 6) {
      MatrixXd pinv = jac.completeOrthogonalDecomposition().pseudoInverse();
      MatrixXd null = MatrixXd::Identity(n, n) - pinv * jac;
      VectorXd pull(n);
      for (int i = 0; i < n; ++i) pull[i] = (*q_ref)[i] - q[i];
      dq += null * (bias_weight * pull);
    }
    double biggest = dq.cwiseAbs().maxCoeff();
    if (biggest > kMaxStep) dq *= kMaxStep / biggest;
    if (biggest < 1e-15) break;
    for (int i = 0; i < n; ++i) q[i] += dq[i];
    clamp_to_limits(chain, q);
  }
  return q;
}

// Fixed restart schedule: well spread configurations inside the limits.
std::vector<double> restart_point(const KinematicChain& chain, int k) {
  static constexpr double kIrrationals[] = {0.41421356237, 0.73205080757, 0.23606797750,
                                            0.64575131106, 0.31662479036, 0.60555127546,
                                            0.12310562562, 0.35889894354};
  std::vector<double> q(chain.n_joints());
  for (int j = 0; j < chain.n_joints(); ++j) {
    double frac = std::fmod(0.5 + k * kIrrationals[j % 8] + 0.1 * (j / 8), 1.0);
    auto [lo, hi] = chain.joint_limits[j];
    q[j] = 0.5 * (lo + hi) + 0.7 * (frac - 0.5) * (hi - lo);
  }
  return q;
}

// Closed-form candidates for the default arm layout (yaw, two parallel
// pitches, then a roll-pitch-roll wrist with a single tool link). Other
// layouts get none. They only seed the DLS runs.
std::vector<std::vector<double>> analytic_starts(const KinematicChain& chain, const Pose& target) {
  std::vector<std::vector<double>> out;
  if (chain.n_joints() != 6) return out;
  const Vector3d expected[] = {Vector3d::UnitZ(), Vector3d::UnitY(), Vector3d::UnitY(),
                               Vector3d::UnitX(), Vector3d::UnitY(), Vector3d::UnitX()};
  double sign[6];
  for (int i = 0; i < 6; ++i) {
    double d = chain.axes[i].dot(expected[i]);
    if (std::abs(std::abs(d) - 1.0) > 1e-12) return out;
    sign[i] = d > 0 ? 1.0 : -1.0;
  }
  const auto& len = chain.link_lengths;
  if (len[0] != 0.0 || len[3] != 0.0 || len[4] != 0.0) return out;
  const double a = len[1], b = len[2], c = len[5];
  if (a <= 0.0 || b <= 0.0) return out;

  Vector3d w = target.translation - c * target.rotation.col(0) - chain.base_offset;
  double planar = std::hypot(w.x(), w.y());
  double up = -w.z();
  double cos3 = (planar * planar + up * up - a * a - b * b) / (2.0 * a * b);
  if (std::abs(cos3) > 1.0 + 1e-9) return out;
  cos3 = std::clamp(cos3, -1.0, 1.0);
  auto wrap = [](double v) { return std::remainder(v, 2.0 * std::numbers::pi); };
  for (double flip : {1.0, -1.0}) {
    double t1 = std::atan2(flip * w.y(), flip * w.x());
    double r = flip * planar;
    for (double elbow : {1.0, -1.0}) {
      double t3 = elbow * std::acos(cos3);
      double t2 = std::atan2(up, r) - std::atan2(b * std::sin(t3), a + b * std::cos(t3));
      Matrix3d r03 = axis_rotation(Vector3d::UnitZ(), t1) *
                     axis_rotation(Vector3d::UnitY(), t2 + t3);
      Matrix3d m = r03.transpose() * target.rotation;
      double base5 = std::acos(std::clamp(m(0, 0), -1.0, 1.0));
      for (double wrist : {1.0, -1.0}) {
        double t5 = wrist * base5;
        double s5 = std::sin(t5);
        double t4 = 0.0, t6 = 0.0;
        if (std::abs(s5) > 1e-9) {
          t4 = std::atan2(m(1, 0) / s5, -m(2, 0) / s5);
          t6 = std::atan2(m(0, 1) / s5, m(0, 2) / s5);
        } else {
          t6 = std::atan2(m(2, 1), m(1, 1));
        }
        double theta[6] = {t1, t2, t3, t4, t5, t6};
        std::vector<double> q(6);
        for (int i = 0; i < 6; ++i) q[i] = sign[i] * wrap(theta[i]);
        out.push_back(std::move(q));
      }
    }
  }
  return out;
}

bool within(const Residual& r, const IkOptions& options) {
  return r.position <= options.position_tolerance && r.rotation <= options.rotation_tolerance;
}

void check_target_reach(const KinematicChain& chain, const Pose& target) {
  double distance = (target.translation - chain.base_offset).norm();
  if (distance > chain.total_length() + 1e-12) {
    throw Unreachable("target at distance " + std::to_string(distance) +
                      " exceeds chain length " + std::to_string(chain.total_length()));
  }
}

JointVector solve_arm(const KinematicChain& chain, const Pose& target,
                      const std::vector<double>& start, const std::vector<double>* q_ref,
                      double bias_weight, const IkOptions& options) {
  check_target_reach(chain, target);
  std::vector<std::vector<double>> starts;
  starts.push_back(start);
  starts.push_back(std::vector<double>(chain.n_joints(), 0.0));
  for (auto& q : analytic_starts(chain, target)) starts.push_back(std::move(q));
  for (int k = 1; k <= kRestarts; ++k) starts.push_back(restart_point(chain, k));
  for (const auto& s : starts) {
    std::vector<double> q = dls_run(chain, target, s, q_ref, bias_weight, options);
    if (within(residual(chain, q, target), options)) return JointVector{q, {}};
  }
  throw Unreachable("IK did not converge within the iteration budget");
}

void check_dims(const KinematicChain& chain, const JointVector& q) {
  if (static_cast<int>(q.angles.size()) != chain.n_joints()) {
    throw DimensionMismatch("expected " + std::to_string(chain.n_joints()) +
                            " joint angles, got " + std::to_string(q.angles.size()));
  }
  if (!q.velocities.empty() && q.velocities.size() != q.angles.size()) {
    throw DimensionMismatch("velocity vector length differs from angle vector");
  }
}

}  // namespace

Matrix4d Pose::homogeneous() const {
  Matrix4d m = Matrix4d::Identity();
  m.block<3, 3>(0, 0) = rotation;
  m.block<3, 1>(0, 3) = translation;
  return m;
}

Pose Pose::from_homogeneous(const Matrix4d& m) {
  Pose p;
  p.rotation = m.block<3, 3>(0, 0);
  p.translation = m.block<3, 1>(0, 3);
  return p;
}

double KinematicChain::total_length() const {
  double total = 0.0;
  for (double l : link_lengths) total += l;
  return total;
}

void KinematicChain::validate() const {
  if (n_joints() < 2) throw DimensionMismatch("a chain needs at least 2 joints");
  if (link_lengths.size() != axes.size() || joint_limits.size() != axes.size()) {
    throw DimensionMismatch("axes, link_lengths and joint_limits must have equal length");
  }
  for (const auto& [lo, hi] : joint_limits) {
    if (!(lo < hi)) throw LimitViolation("joint limit lo must be below hi");
  }
  for (const auto& a : axes) {
    if (std::abs(a.norm() - 1.0) > 1e-9) throw DimensionMismatch("joint axes must be unit length");
  }
}

bool KinematicChain::within_limits(const JointVector& q) const {
  if (static_cast<int>(q.angles.size()) != n_joints()) return false;
  for (int i = 0; i < n_joints(); ++i) {
    if (q.angles[i] < joint_limits[i].first || q.angles[i] > joint_limits[i].second) {
      return false;
    }
  }
  return true;
}

KinematicChain KinematicChain::mirrored() const {
  KinematicChain m = *this;
  // Reflecting y turns R(a, q) into R(Ma, -q).
  for (auto& a : m.axes) a = Vector3d(a.x(), -a.y(), a.z());
  for (auto& [lo, hi] : m.joint_limits) {
    double new_lo = -hi;
    hi = -lo;
    lo = new_lo;
  }
  m.base_offset.y() = -m.base_offset.y();
  return m;
}

KinematicChain default_arm_chain(ArmSide side, double reach, double shoulder_offset) {
  KinematicChain chain;
  chain.axes = {Vector3d::UnitZ(), Vector3d::UnitY(), Vector3d::UnitY(),
                Vector3d::UnitX(), Vector3d::UnitY(), Vector3d::UnitX()};
  chain.link_lengths = {0.0, 0.45 * reach, 0.40 * reach, 0.0, 0.0, 0.15 * reach};
  chain.joint_limits = {{-2.9, 2.9}, {-2.0, 2.0}, {-2.6, 2.6},
                        {-2.9, 2.9}, {-2.0, 2.0}, {-2.9, 2.9}};
  chain.base_offset = Vector3d(0.0, shoulder_offset, 0.0);
  return side == ArmSide::kLeft ? chain : chain.mirrored();
}

RobotConfig default_robot_config(RobotProfile profile) {
  RobotConfig config;
  config.profile = profile;
  if (profile == RobotProfile::kX1) {
    config.reach_radius = 1.0;
    config.shoulder_offset = 0.15;
  } else {
    config.reach_radius = 1.5;
    config.shoulder_offset = 0.2;
  }
  config.left = default_arm_chain(ArmSide::kLeft, config.reach_radius, config.shoulder_offset);
  config.right = default_arm_chain(ArmSide::kRight, config.reach_radius, config.shoulder_offset);
  return config;
}

Pose forward_kinematics(const KinematicChain& chain, const JointVector& joints) {
  check_dims(chain, joints);
  if (!chain.within_limits(joints)) throw LimitViolation("joint angles outside limits");
  return chain_frames(chain, joints.angles).tip;
}

double rotation_distance(const Matrix3d& a, const Matrix3d& b) {
  double c = 0.5 * ((a.transpose() * b).trace() - 1.0);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

JointVector solve_ik_decoupled(const KinematicChain& chain, const Pose& target,
                               const JointVector& seed, const IkOptions& options) {
  check_dims(chain, seed);
  return solve_arm(chain, target, seed.angles, nullptr, 0.0, options);
}

std::pair<JointVector, JointVector> solve_ik_wholebody(
    const KinematicChain& left, const KinematicChain& right,
    const std::pair<Matrix4d, Matrix4d>& targets,
    const std::pair<JointVector, JointVector>& current, const WholeBodyOptions& options) {
  check_dims(left, current.first);
  check_dims(right, current.second);
  Pose left_target = Pose::from_homogeneous(targets.first);
  Pose right_target = Pose::from_homogeneous(targets.second);
  check_target_reach(left, left_target);
  check_target_reach(right, right_target);

  double midpoint = 0.5 * (left_target.translation.y() + right_target.translation.y());
  if (std::abs(midpoint) > options.balance_bound) {
    throw BalanceViolation("hand midpoint lateral offset " + std::to_string(midpoint) +
                           " exceeds balance bound " + std::to_string(options.balance_bound));
  }

  auto reference = [](const KinematicChain& chain, const JointVector& q) {
    std::vector<double> ref = q.angles;
    for (std::size_t i = 0; i < ref.size() && i < q.velocities.size(); ++i) {
      ref[i] += q.velocities[i];
    }
    clamp_to_limits(chain, ref);
    return ref;
  };
  std::vector<double> left_ref = reference(left, current.first);
  std::vector<double> right_ref = reference(right, current.second);
  JointVector l = solve_arm(left, left_target, left_ref, &left_ref, options.velocity_weight,
                            options.ik);
  JointVector r = solve_arm(right, right_target, right_ref, &right_ref,
                            options.velocity_weight, options.ik);
  return {std::move(l), std::move(r)};
}

// ---------------------------------------------------------------------------

CubicSpline::CubicSpline(std::vector<double> knots, std::vector<double> values,
                         SplineBoundary boundary)
    : knots_(std::move(knots)), values_(std::move(values)) {
  const std::size_t m = knots_.size();
  if (m < 2 || values_.size() != m) {
    throw DimensionMismatch("spline needs at least two knots and one value per knot");
  }
  for (std::size_t i = 1; i < m; ++i) {
    if (!(knots_[i] > knots_[i - 1])) throw DimensionMismatch("knots must increase strictly");
  }
  // Tridiagonal system for the knot second derivatives, solved by the
  // Thomas algorithm.
  std::vector<double> sub(m, 0.0), diag(m, 0.0), sup(m, 0.0), rhs(m, 0.0);
  auto h = [&](std::size_t i) { return knots_[i + 1] - knots_[i]; };
  auto slope = [&](std::size_t i) { return (values_[i + 1] - values_[i]) / h(i); };
  if (boundary == SplineBoundary::kNatural) {
    diag[0] = 1.0;
    diag[m - 1] = 1.0;
  } else {
    diag[0] = 2.0 * h(0);
    sup[0] = h(0);
    rhs[0] = 6.0 * slope(0);
    sub[m - 1] = h(m - 2);
    diag[m - 1] = 2.0 * h(m - 2);
    rhs[m - 1] = -6.0 * slope(m - 2);
  }
  for (std::size_t i = 1; i + 1 < m; ++i) {
    sub[i] = h(i - 1);
    diag[i] = 2.0 * (h(i - 1) + h(i));
    sup[i] = h(i);
    rhs[i] = 6.0 * (slope(i) - slope(i - 1));
  }
  for (std::size_t i = 1; i < m; ++i) {
    double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  moments_.assign(m, 0.0);
  moments_[m - 1] = rhs[m - 1] / diag[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) {
    moments_[i] = (rhs[i] - sup[i] * moments_[i + 1]) / diag[i];
  }
}

std::size_t CubicSpline::segment_of(double t) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  std::size_t idx = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
  return std::min(idx, knots_.size() - 2);
}

double CubicSpline::segment_value(std::size_t i, double t) const {
  double h = knots_[i + 1] - knots_[i];
  double a = (knots_[i + 1] - t) / h;
  double b = (t - knots_[i]) / h;
  return a * values_[i] + b * values_[i + 1] +
         ((a * a * a - a) * moments_[i] + (b * b * b - b) * moments_[i + 1]) * h * h / 6.0;
}

double CubicSpline::segment_derivative(std::size_t i, double t) const {
  double h = knots_[i + 1] - knots_[i];
  double a = (knots_[i + 1] - t) / h;
  double b = (t - knots_[i]) / h;
  return (values_[i + 1] - values_[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * moments_[i] +
         (3.0 * b * b - 1.0) / 6.0 * h * moments_[i + 1];
}

double CubicSpline::value(double t) const { return segment_value(segment_of(t), t); }

double CubicSpline::derivative(double t) const {
  return segment_derivative(segment_of(t), t);
}

Trajectory interpolate_via(const std::vector<JointVector>& configs, int n,
                           SplineBoundary boundary) {
  if (n < 2) throw DimensionMismatch("a trajectory needs at least 2 waypoints");
  if (configs.size() < 2) throw DimensionMismatch("a trajectory needs at least 2 configurations");
  const std::size_t dof = configs.front().size();
  for (const auto& c : configs) {
    if (c.size() != dof) throw DimensionMismatch("configurations differ in joint count");
  }
  Trajectory traj;
  const std::size_t m = configs.size();
  for (std::size_t i = 0; i < m; ++i) {
    traj.knots.push_back(static_cast<double>(i) / static_cast<double>(m - 1));
  }
  for (int k = 0; k < n; ++k) traj.sample_times.push_back(static_cast<double>(k) / (n - 1));

  std::vector<JointVector> waypoints(n, JointVector{std::vector<double>(dof), {}});
  for (std::size_t j = 0; j < dof; ++j) {
    std::vector<double> values(m);
    bool constant = true;
    for (std::size_t i = 0; i < m; ++i) {
      values[i] = configs[i].angles[j];
      constant = constant && values[i] == values[0];
    }
    if (constant) {
      for (int k = 0; k < n; ++k) waypoints[k].angles[j] = values[0];
      continue;
    }
    CubicSpline spline(traj.knots, values, boundary);
    for (int k = 0; k < n; ++k) waypoints[k].angles[j] = spline.value(traj.sample_times[k]);
  }
  waypoints.front().angles = configs.front().angles;
  waypoints.back().angles = configs.back().angles;
  traj.waypoints = std::move(waypoints);
  return traj;
}

Trajectory interpolate_trajectory(const JointVector& start, const JointVector& goal, int n,
                                  SplineBoundary boundary) {
  if (start.size() != goal.size()) {
    throw DimensionMismatch("start and goal differ in joint count");
  }
  JointVector a{start.angles, {}};
  JointVector b{goal.angles, {}};
  return interpolate_via({a, b}, n, boundary);
}

// ---------------------------------------------------------------------------

bool within_arm_workspace(double forward, double left, HeightBand band, Posture posture,
                          ArmSide arm, double reach_radius) {
  constexpr double kEps = 1e-9;
  if (band == HeightBand::kLow && posture != Posture::kCrouch) return false;
  if (band == HeightBand::kHigh && posture != Posture::kStand) return false;
  double distance = std::hypot(forward, left);
  if (distance > reach_radius + kEps) return false;
  if (distance <= kEps) return true;
  double bearing = std::atan2(left, forward) * 180.0 / std::numbers::pi;
  if (arm == ArmSide::kLeft) {
    return bearing >= kLeftSectorMin - kEps && bearing <= kLeftSectorMax + kEps;
  }
  return bearing >= kRightSectorMin - kEps && bearing <= kRightSectorMax + kEps;
}

std::pair<double, double> robot_frame_offset(const RobotState& robot, int x, int y) {
  auto [fx, fy] = heading_vector(robot.heading);
  double dx = x - robot.x;
  double dy = y - robot.y;
  // Left is the heading rotated a quarter turn counterclockwise.
  return {dx * fx + dy * fy, -dx * fy + dy * fx};
}

bool check_reachable(const RobotState& robot, ArmSide arm, const ObjectInstance& object) {
  auto [forward, left] = robot_frame_offset(robot, object.x, object.y);
  return within_arm_workspace(forward, left, object.band, robot.posture, arm,
                              robot.reach_radius);
}

JointVector interaction_joints(const KinematicChain& chain, ArmSide side, double forward,
                               double left, HeightBand band, double reach_radius) {
  // Build the left-arm configuration for the mirrored geometry; the right arm
  // uses the negated angles.
  double lateral = side == ArmSide::kLeft ? left : -left;
  double shoulder = std::abs(chain.base_offset.y());
  double yaw = std::atan2(lateral - shoulder, forward);
  double distance = std::hypot(forward, left);
  double closeness = 1.0 - std::clamp(distance / std::max(reach_radius, 1e-9), 0.0, 1.0);
  double pitch = band == HeightBand::kLow ? 0.55 : band == HeightBand::kHigh ? -0.35 : 0.15;
  double elbow = 0.25 + 0.5 * closeness;
  std::vector<double> q(chain.n_joints(), 0.0);
  const double canonical[] = {yaw, pitch, elbow, 0.0, -0.5 * (pitch + elbow), 0.0};
  for (int i = 0; i < chain.n_joints() && i < 6; ++i) q[i] = canonical[i];
  if (side == ArmSide::kRight) {
    for (double& v : q) v = -v;
  }
  clamp_to_limits(chain, q);
  return JointVector{q, {}};
}

}  // namespace dualhab
