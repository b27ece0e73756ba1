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

// Simplified serial arm chains for the two humanoid profiles.
//
// Frames: the robot base frame sits at the torso with x forward, y to the
// robot's left and z up; lengths are in grid units. A chain is a sequence of
// revolute joints; joint i rotates about `axes[i]` and is followed by a link
// of length `link_lengths[i]` along the local x axis. All-zero joints put the
// arm straight out along +x from its shoulder (the "home" pose).
//
// Two solvers mirror the robots' control stacks:
//   * solve_ik_decoupled: one arm, rotation + translation target, seeded with
//     the current configuration (X1).
//   * solve_ik_wholebody: both arms from 4x4 targets, biased toward the
//     current joints extrapolated by their velocities, with a lateral balance
//     bound on the hands' midpoint (H1).
// Both run damped least squares with a fixed damping and iteration budget and
// a fixed restart schedule, so results are bit-reproducible.

#ifndef DUALHAB_KINEMATICS_H_
#define DUALHAB_KINEMATICS_H_

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dualhab/catalog.h"

namespace dualhab {

struct RobotState;
struct ObjectInstance;

struct JointVector {
  std::vector<double> angles;
  // rad per step; empty means zero.
  std::vector<double> velocities;

  std::size_t size() const { return angles.size(); }
  friend bool operator==(const JointVector&, const JointVector&) = default;
};

struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Matrix4d homogeneous() const;
  static Pose from_homogeneous(const Eigen::Matrix4d& m);
};

struct KinematicChain {
  std::vector<Eigen::Vector3d> axes;  // unit vectors in the joint's frame
  std::vector<double> link_lengths;
  std::vector<std::pair<double, double>> joint_limits;
  Eigen::Vector3d base_offset = Eigen::Vector3d::Zero();

  int n_joints() const { return static_cast<int>(axes.size()); }
  double total_length() const;
  // Throws LimitViolation/DimensionMismatch for malformed chains.
  void validate() const;
  bool within_limits(const JointVector& q) const;
  // Reflection through the torso's sagittal (x-z) plane. With mirrored
  // chains, mirrored targets are solved by negated joint angles.
  KinematicChain mirrored() const;
};

// Six revolute joints (yaw, shoulder pitch, elbow pitch, wrist roll, wrist
// pitch, wrist roll); links sum to `reach`.
KinematicChain default_arm_chain(ArmSide side, double reach, double shoulder_offset);

struct RobotConfig {
  RobotProfile profile = RobotProfile::kX1;
  double reach_radius = 1.0;
  double shoulder_offset = 0.15;
  KinematicChain left;
  KinematicChain right;
  // Whole-body (H1) solver knobs.
  double balance_bound = 0.3;
  double velocity_weight = 0.1;

  const KinematicChain& chain(ArmSide side) const {
    return side == ArmSide::kLeft ? left : right;
  }
};

RobotConfig default_robot_config(RobotProfile profile);

Pose forward_kinematics(const KinematicChain& chain, const JointVector& joints);

// Geodesic distance between two rotations, in radians.
double rotation_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

struct IkOptions {
  double damping = 0.1;
  int max_iterations = 200;
  double position_tolerance = 1e-3;
  double rotation_tolerance = 1e-2;
};

JointVector solve_ik_decoupled(const KinematicChain& chain, const Pose& target,
                               const JointVector& seed, const IkOptions& options = {});

struct WholeBodyOptions {
  IkOptions ik;
  // Max |y| of the midpoint between the two hand targets. Infinity disables
  // the check (single-arm motions).
  double balance_bound = 0.3;
  double velocity_weight = 0.1;
};

std::pair<JointVector, JointVector> solve_ik_wholebody(
    const KinematicChain& left, const KinematicChain& right,
    const std::pair<Eigen::Matrix4d, Eigen::Matrix4d>& targets,
    const std::pair<JointVector, JointVector>& current,
    const WholeBodyOptions& options = {});

// ---------------------------------------------------------------------------
// Cubic splines and joint trajectories.

enum class SplineBoundary {
  kNatural,  // zero second derivative at both ends
  kClamped,  // zero first derivative at both ends
};

class CubicSpline {
 public:
  // knots strictly increasing, same length as values, at least 2 points.
  CubicSpline(std::vector<double> knots, std::vector<double> values,
              SplineBoundary boundary = SplineBoundary::kNatural);

  double value(double t) const;
  double derivative(double t) const;
  // Evaluation restricted to one segment, used for one-sided limits at knots.
  double segment_value(std::size_t segment, double t) const;
  double segment_derivative(std::size_t segment, double t) const;

  const std::vector<double>& knots() const { return knots_; }
  // Second derivatives at the knots.
  const std::vector<double>& moments() const { return moments_; }

 private:
  std::size_t segment_of(double t) const;

  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> moments_;
};

struct Trajectory {
  std::vector<JointVector> waypoints;
  std::vector<double> knots;         // interpolation knot times
  std::vector<double> sample_times;  // parameter of each waypoint
};

// Per-joint cubic spline from start to goal sampled at n uniform parameter
// steps in [0, 1]; endpoints are copied exactly.
Trajectory interpolate_trajectory(const JointVector& start, const JointVector& goal,
                                  int n, SplineBoundary boundary = SplineBoundary::kNatural);

// Spline through several configurations at uniform knot times.
Trajectory interpolate_via(const std::vector<JointVector>& configs, int n,
                           SplineBoundary boundary = SplineBoundary::kNatural);

// ---------------------------------------------------------------------------
// Reachability.

// Arm sectors, degrees counterclockwise from the heading.
inline constexpr double kLeftSectorMin = -45.0;
inline constexpr double kLeftSectorMax = 135.0;
inline constexpr double kRightSectorMin = -135.0;
inline constexpr double kRightSectorMax = 45.0;

// `forward`/`left` is the object's planar offset in the robot frame.
bool within_arm_workspace(double forward, double left, HeightBand band, Posture posture,
                          ArmSide arm, double reach_radius);

bool check_reachable(const RobotState& robot, ArmSide arm, const ObjectInstance& object);

// Planar offset of an object in the robot frame (forward, left).
std::pair<double, double> robot_frame_offset(const RobotState& robot, int x, int y);

// Joint configuration used to build the interaction target for an object at
// the given robot-frame offset. Within the chain's limits by construction.
JointVector interaction_joints(const KinematicChain& chain, ArmSide side, double forward,
                               double left, HeightBand band, double reach_radius);

}  // namespace dualhab

#endif  // DUALHAB_KINEMATICS_H_
