// Copyright 2026 The rtmotion Authors
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

#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

namespace rtmotion {

using Matrix6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

/// Rotation from Z-Y-X intrinsic Euler angles: Rz(yaw) * Ry(pitch) * Rx(roll).
Eigen::Matrix3d rotation_from_rpy(double roll, double pitch, double yaw);

/// Inverse of rotation_from_rpy; pitch is returned in [-pi/2, pi/2].
Eigen::Vector3d rpy_from_rotation(const Eigen::Matrix3d& rotation);

/// Rotation vector (axis * angle) of a rotation matrix.
Eigen::Vector3d log_map(const Eigen::Matrix3d& rotation);

/// End-effector pose: translation in meters, Z-Y-X Euler angles in radians.
struct Pose {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Vector3d rpy = Eigen::Vector3d::Zero();  // roll, pitch, yaw

  Eigen::Matrix3d rotation() const { return rotation_from_rpy(rpy[0], rpy[1], rpy[2]); }
  Eigen::Isometry3d transform() const;
  static Pose from_transform(const Eigen::Isometry3d& transform);
  static Pose from_array(const std::array<double, 6>& values);
  std::array<double, 6> to_array() const;
  bool is_finite() const;
};

struct JointLimit {
  double min = 0.0;
  double max = 0.0;
};

struct Joint {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // unit, in the joint frame
  Eigen::Isometry3d parent_offset = Eigen::Isometry3d::Identity();
};

/// Serial revolute chain: each joint frame is parent_offset * Rot(axis, q)
/// relative to the previous joint frame, followed by ee_transform.
struct ChainConfig {
  std::string name;
  std::vector<Joint> joints;
  std::vector<JointLimit> joint_limits;
  Eigen::VectorXd v_max;
  Eigen::VectorXd a_max;
  double control_frequency = 100.0;
  Eigen::Isometry3d ee_transform = Eigen::Isometry3d::Identity();
  /// Rest configuration used when no initial state is supplied; within limits.
  Eigen::VectorXd home;

  int dof() const { return static_cast<int>(joints.size()); }

  /// Throws ValidationError if any invariant is violated.
  void validate() const;

  Eigen::VectorXd clamp(const Eigen::VectorXd& q) const;
  bool within_limits(const Eigen::VectorXd& q, double slack = 0.0) const;
};

ChainConfig chain_from_json(const nlohmann::json& j);
nlohmann::json chain_to_json(const ChainConfig& config);
ChainConfig load_chain(const std::string& path);

Eigen::Isometry3d forward_kinematics_transform(const ChainConfig& config,
                                               const Eigen::VectorXd& q);
Pose forward_kinematics(const ChainConfig& config, const Eigen::VectorXd& q);

/// Geometric Jacobian in the base frame: rows 0-2 linear, rows 3-5 angular.
Matrix6X jacobian(const ChainConfig& config, const Eigen::VectorXd& q);

struct IkSettings {
  double damping = 1e-3;          // initial Levenberg damping
  double damping_factor = 10.0;   // multiplied on a rejected step, divided on an accepted one
  int max_iters = 200;
  double position_tol = 1e-4;     // m, acceptance bound on the returned iterate
  double orientation_tol = 1e-3;  // rad
  double position_goal = 1e-9;    // stop early once this tight
  double orientation_goal = 1e-9;
};

struct IkResult {
  Eigen::VectorXd q;
  int iterations = 0;
  double position_error = 0.0;
  double orientation_error = 0.0;
};

/// Damped least squares from `seed`, clamping to joint limits every step.
/// Throws NoConvergence when the final iterate misses the tolerances.
IkResult solve_ik(const ChainConfig& config, const Pose& target, const Eigen::VectorXd& seed,
                  const IkSettings& settings = {});

Eigen::VectorXd inverse_kinematics(const ChainConfig& config, const Pose& target,
                                   const Eigen::VectorXd& seed, const IkSettings& settings = {});

/// Position and rotation-vector error of `current` relative to `target`.
Vector6 pose_error(const Eigen::Isometry3d& target, const Eigen::Isometry3d& current);

}  // namespace rtmotion
