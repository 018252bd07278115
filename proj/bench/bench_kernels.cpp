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

// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include <random>

#include "rtmotion/kernels.hpp"
#include "rtmotion/workload.hpp"

namespace {

using namespace rtmotion;

std::vector<QpProblem> problems(int joints) {
  BenchWorkload w;
  w.joints = joints;
  std::mt19937_64 rng(1);
  return random_request(w, rng);
}

void BM_SolveParallel(benchmark::State& state) {
  const auto p = problems(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::solve_joint_problems(p, {}));
}

void BM_SolveSerial(benchmark::State& state) {
  const auto p = problems(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::solve_joint_problems_serial(p, {}));
}

std::vector<JointTrajectory> trajectories(int joints) {
  const auto p = problems(joints);
  const auto sols = kernels::solve_joint_problems_serial(p, {});
  std::vector<JointTrajectory> out;
  for (std::size_t j = 0; j < p.size(); ++j) {
    out.push_back(JointTrajectory::from_coefficients(sols[j].p, p[j].degree, p[j].durations));
  }
  return out;
}

std::vector<double> grid() {
  std::vector<double> t(2500);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<double>(k) * 1e-4;
  return t;
}

void BM_SampleParallel(benchmark::State& state) {
  const auto j = trajectories(static_cast<int>(state.range(0)));
  const auto t = grid();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::sample_trajectories(j, t));
}

void BM_SampleSerial(benchmark::State& state) {
  const auto j = trajectories(static_cast<int>(state.range(0)));
  const auto t = grid();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::sample_trajectories_serial(j, t));
}

}  // namespace

BENCHMARK(BM_SolveParallel)->Arg(6)->Arg(12)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SolveSerial)->Arg(6)->Arg(12)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SampleParallel)->Arg(6)->Arg(12)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SampleSerial)->Arg(6)->Arg(12)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
