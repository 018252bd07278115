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

#include "rtmotion/kernels.hpp"

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rtmotion::kernels {

namespace {

// Exceptions must not cross the parallel region; keep the first one by index.
struct ErrorSlot {
  std::vector<std::exception_ptr> errors;
  explicit ErrorSlot(std::size_t n) : errors(n) {}
  void rethrow() const {
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
};

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<Solution> solve_joint_problems(const std::vector<QpProblem>& problems,
                                           const SolverSettings& settings) {
  const auto n = static_cast<long>(problems.size());
  std::vector<Solution> out(problems.size());
  ErrorSlot slot(problems.size());
#pragma omp parallel for schedule(static)
  for (long j = 0; j < n; ++j) {
    try {
      out[static_cast<std::size_t>(j)] = solve(problems[static_cast<std::size_t>(j)], settings);
    } catch (...) {
      slot.errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
  }
  slot.rethrow();
  return out;
}

std::vector<Solution> solve_joint_problems_serial(const std::vector<QpProblem>& problems,
                                                  const SolverSettings& settings) {
  std::vector<Solution> out;
  out.reserve(problems.size());
  for (const auto& p : problems) out.push_back(solve(p, settings));
  return out;
}

std::vector<JointSample> sample_trajectories(const std::vector<JointTrajectory>& joints,
                                             const std::vector<double>& times) {
  const std::size_t dof = joints.size();
  const auto ticks = static_cast<long>(times.size());
  std::vector<JointSample> out(times.size() * dof);
  ErrorSlot slot(times.size());
#pragma omp parallel for schedule(static)
  for (long k = 0; k < ticks; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    try {
      for (std::size_t j = 0; j < dof; ++j) out[kk * dof + j] = joints[j].eval(times[kk]);
    } catch (...) {
      slot.errors[kk] = std::current_exception();
    }
  }
  slot.rethrow();
  return out;
}

std::vector<JointSample> sample_trajectories_serial(const std::vector<JointTrajectory>& joints,
                                                    const std::vector<double>& times) {
  std::vector<JointSample> out;
  out.reserve(times.size() * joints.size());
  for (double t : times) {
    for (const auto& joint : joints) out.push_back(joint.eval(t));
  }
  return out;
}

}  // namespace rtmotion::kernels
