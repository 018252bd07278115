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

// Randomized per-request QP workload for solve-time studies.

#include <json.hpp>

#include <random>
#include <string>
#include <vector>

#include "rtmotion/poly.hpp"
#include "rtmotion/qpbuild.hpp"
#include "rtmotion/qpsolve.hpp"

namespace rtmotion {

/// Each joint starts at rest at U(-1, 1) rad and random-walks through n
/// targets with steps U(-step, step), one segment of `segment` s per target.
struct BenchWorkload {
  int n = 5;
  int degree = kDefaultDegree;
  int joints = 6;
  double segment = 0.05;
  double fc = 100.0;
  double v_max = 2.0;
  double a_max = 15.0;
  double step = 0.005;
};

struct BenchRecord {
  int n = 0;
  int degree = 0;
  int joints = 0;
  double solve_time_s = 0.0;
  int iterations = 0;  // worst joint
  SolveStatus status = SolveStatus::solved;  // first non-solved joint status, if any
};

std::vector<QpProblem> random_request(const BenchWorkload& workload, std::mt19937_64& rng);

/// Solves one request's joint problems through the parallel or serial kernel.
BenchRecord time_request(const BenchWorkload& workload, const std::vector<QpProblem>& problems,
                         const SolverSettings& settings, bool parallel);

nlohmann::json to_json(const BenchRecord& record);

}  // namespace rtmotion
