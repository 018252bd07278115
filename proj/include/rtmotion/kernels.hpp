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

// Data-parallel kernels. Each has a serial twin with identical arithmetic;
// the serial versions are the reference the tests and benchmarks compare to.

#include <vector>

#include "rtmotion/poly.hpp"
#include "rtmotion/qpsolve.hpp"

namespace rtmotion::kernels {

/// One independent QP per joint, distributed over OpenMP threads.
std::vector<Solution> solve_joint_problems(const std::vector<QpProblem>& problems,
                                           const SolverSettings& settings);
std::vector<Solution> solve_joint_problems_serial(const std::vector<QpProblem>& problems,
                                                  const SolverSettings& settings);

/// Evaluates every joint at every time; result is time-major
/// (index = k * joints.size() + j).
std::vector<JointSample> sample_trajectories(const std::vector<JointTrajectory>& joints,
                                             const std::vector<double>& times);
std::vector<JointSample> sample_trajectories_serial(const std::vector<JointTrajectory>& joints,
                                                    const std::vector<double>& times);

int max_threads();

}  // namespace rtmotion::kernels
