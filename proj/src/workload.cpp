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

#include "rtmotion/workload.hpp"

#include <algorithm>
#include <chrono>

#include "rtmotion/kernels.hpp"

namespace rtmotion {

std::vector<QpProblem> random_request(const BenchWorkload& w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> start(-1.0, 1.0);
  std::uniform_real_distribution<double> step(-w.step, w.step);
  std::vector<QpProblem> problems;
  problems.reserve(static_cast<std::size_t>(w.joints));
  for (int j = 0; j < w.joints; ++j) {
    const double q0 = start(rng);
    std::vector<JointTarget> targets;
    double q = q0;
    for (int i = 0; i < w.n; ++i) {
      q += step(rng);
      targets.push_back({q, w.segment});
    }
    problems.push_back(assemble_qp(targets, {q0, 0.0, 0.0}, w.degree, w.fc, {w.v_max, w.a_max}));
  }
  return problems;
}

BenchRecord time_request(const BenchWorkload& w, const std::vector<QpProblem>& problems,
                         const SolverSettings& settings, bool parallel) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Solution> sols = parallel ? kernels::solve_joint_problems(problems, settings)
                                              : kernels::solve_joint_problems_serial(problems, settings);
  BenchRecord r;
  r.solve_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.n = w.n;
  r.degree = w.degree;
  r.joints = w.joints;
  for (const auto& s : sols) {
    r.iterations = std::max(r.iterations, s.iterations);
    if (!s.ok() && r.status == SolveStatus::solved) r.status = s.status;
  }
  return r;
}

nlohmann::json to_json(const BenchRecord& r) {
  return {{"n", r.n},
          {"L", r.degree},
          {"joints", r.joints},
          {"solve_time_s", r.solve_time_s},
          {"iterations", r.iterations},
          {"status", std::string(to_string(r.status))}};
}

}  // namespace rtmotion
