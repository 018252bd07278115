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

#include <string>
#include <vector>

#include "rtmotion/chain.hpp"
#include "rtmotion/poly.hpp"
#include "rtmotion/qpsolve.hpp"

namespace rtmotion {

inline constexpr const char* kMoveCartesian = "rt-move-cartesian";

struct CartesianWaypoint {
  Pose pose;
  double duration = 0.0;  // seconds from the previous waypoint
};

struct PlanRequest {
  std::string robot_id;
  std::string request_type = kMoveCartesian;
  std::vector<CartesianWaypoint> waypoints;
  std::string request_id;
};

struct RobotState {
  Eigen::VectorXd q;
  Eigen::VectorXd qd;
  Eigen::VectorXd qdd;
  double timestamp = 0.0;

  static RobotState at_rest(const Eigen::VectorXd& q, double timestamp = 0.0);
};

struct PlannerSettings {
  int degree = kDefaultDegree;
  SolverSettings solver;
  IkSettings ik;
  /// Solve the per-joint QPs through the OpenMP kernel instead of the serial one.
  bool parallel = true;
};

/// Multi-joint trajectory sharing one segment-time grid, anchored at `epoch`.
struct Plan {
  std::vector<JointTrajectory> joints;
  std::vector<Eigen::VectorXd> joint_waypoints;
  std::vector<double> durations;
  RobotState initial;
  double epoch = 0.0;
  std::string request_id;

  // Diagnostics of the per-joint solves.
  double qp_time = 0.0;  // wall time of the per-joint solve kernel, seconds
  int max_iterations = 0;
  std::vector<double> solve_times;

  double duration() const;
  int dof() const { return static_cast<int>(joints.size()); }
};

struct Reference {
  RobotState state;
  Pose pose;
};

/// Checks the request against the chain: non-empty, finite poses, each
/// duration at least two control periods. Throws ValidationError.
void validate_request(const PlanRequest& request, const ChainConfig& chain);

/// IK for each waypoint seeded by the previous solution (starting from s0.q),
/// then one QP per joint. The plan's epoch is s0.timestamp.
/// Throws ValidationError, IkFailure or QpFailure.
Plan plan(const PlanRequest& request, const ChainConfig& chain, const RobotState& s0,
          const PlannerSettings& settings = {});

/// Commanded joint state at absolute time t (hold after the final segment).
RobotState reference_state(const Plan& plan, double t);

/// Commanded state plus its end-effector pose.
Reference reference_at(const Plan& plan, const ChainConfig& chain, double t);

/// Re-plans from the commanded reference of `active` at t_now; the new
/// plan's epoch is t_now. On failure the exception propagates and the caller
/// keeps `active`.
Plan preempt(const Plan& active, double t_now, const PlanRequest& request, const ChainConfig& chain,
             const PlannerSettings& settings = {});

/// Largest |jump| in q, qd, qdd over all interior junctions and joints.
double max_junction_discontinuity(const Plan& plan);

/// Largest |qd|, |qdd| of the final segment end, before the hold.
double terminal_residual(const Plan& plan);

/// Largest |q(T_i) - d_i| over waypoints and joints.
double pass_through_residual(const Plan& plan);

}  // namespace rtmotion
