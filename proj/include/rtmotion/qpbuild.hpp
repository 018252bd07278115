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

#include <json.hpp>

namespace rtmotion {

inline constexpr double kCostRegularization = 1e-9;

/// Position waypoint for one joint and the time allotted to reach it.
struct JointTarget {
  double position = 0.0;
  double duration = 0.0;
};

struct InitialState {
  double q = 0.0;
  double qd = 0.0;
  double qdd = 0.0;
};

/// min p'Qp  s.t.  lower <= A p <= upper, with the first n_eq rows tight.
struct QpProblem {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd A;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  int n_eq = 0;
  int degree = 0;
  std::vector<double> durations;

  int num_segments() const { return static_cast<int>(durations.size()); }
  int num_variables() const { return static_cast<int>(Q.rows()); }
  int num_constraints() const { return static_cast<int>(A.rows()); }

  Eigen::MatrixXd A_eq() const { return A.topRows(n_eq); }
  Eigen::VectorXd b_eq() const { return lower.head(n_eq); }
};

struct LinearConstraints {
  Eigen::MatrixXd A;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Sample count per segment: max(2, round(f_c * duration)).
int samples_per_segment(double duration, double control_frequency);

/// Normalized sample positions in [0, 1], endpoints included.
std::vector<double> sample_grid(double duration, double control_frequency);

/// Sum over the sample grid of b'''(u) b'''(u)^T scaled by duration^-6.
Eigen::MatrixXd jerk_cost_matrix(int degree, double duration, double control_frequency);
Eigen::MatrixXd jerk_cost_matrix(int degree, double duration, const std::vector<double>& u_samples);

/// Rows: 3 initial-state, 3 terminal, then per interior junction one
/// pass-through and three continuity rows (4N + 2 in total).
LinearConstraints build_equality(const std::vector<JointTarget>& waypoints, const InitialState& s0,
                                 int degree);

/// Velocity and acceleration interval rows on each segment's sample grid.
LinearConstraints build_inequality(int degree, const std::vector<double>& durations,
                                   double control_frequency, double v_max, double a_max);

struct JointLimits {
  double v_max = 0.0;
  double a_max = 0.0;
};

/// Full per-joint problem. Rejects rank-deficient equality sets.
QpProblem assemble_qp(const std::vector<JointTarget>& waypoints, const InitialState& s0, int degree,
                      double control_frequency, const JointLimits& limits);

/// Equality-only problem (no velocity/acceleration rows).
QpProblem assemble_equality_qp(const std::vector<JointTarget>& waypoints, const InitialState& s0,
                               int degree, double control_frequency);

/// Dense row-major dump for offline inspection.
nlohmann::json qp_to_json(const QpProblem& problem);
QpProblem qp_from_json(const nlohmann::json& j);

}  // namespace rtmotion
