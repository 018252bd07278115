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

#include <string_view>

#include "rtmotion/qpbuild.hpp"

namespace rtmotion {

struct SolverSettings {
  double rho = 1.0;
  double sigma = 1e-6;
  double alpha = 1.6;
  double eps_abs = 1e-6;
  double eps_rel = 1e-6;
  int max_iters = 4000;
  int check_interval = 25;
  /// Ruiz equilibration passes; 0 disables scaling.
  int scaling_iters = 10;
  /// Re-solve the KKT system on the detected active set after convergence.
  bool polish = true;

  void validate() const;
};

enum class SolveStatus { solved, max_iters, primal_infeasible };

std::string_view to_string(SolveStatus status);

struct Solution {
  Eigen::VectorXd p;
  Eigen::VectorXd y;  // constraint multipliers, unscaled
  SolveStatus status = SolveStatus::max_iters;
  int iterations = 0;
  double solve_time = 0.0;  // seconds
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool polished = false;

  bool ok() const { return status == SolveStatus::solved; }
};

/// Operator-splitting solve of min p'Qp s.t. lower <= A p <= upper.
/// Deterministic for a fixed (problem, settings) pair.
Solution solve(const QpProblem& problem, const SolverSettings& settings = {});

/// Direct solve of the stationarity system [2Q A'; A 0][p; l] = [0; b].
/// Throws ValidationError when the KKT matrix is singular.
Eigen::VectorXd solve_kkt_equality(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& A_eq,
                                   const Eigen::VectorXd& b_eq);

/// p'Qp
double quadratic_cost(const Eigen::MatrixXd& Q, const Eigen::VectorXd& p);

}  // namespace rtmotion
