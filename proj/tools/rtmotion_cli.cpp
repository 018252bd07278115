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

// rtmotion command line: plan | serve | sim | bench

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

#include "rtmotion/errors.hpp"
#include "rtmotion/kernels.hpp"
#include "rtmotion/planner.hpp"
#include "rtmotion/scenario.hpp"
#include "rtmotion/service.hpp"
#include "rtmotion/wire.hpp"
#include "rtmotion/workload.hpp"

namespace {

using namespace rtmotion;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::clamp(p, 0.0, 1.0) * static_cast<double>(v.size() - 1) + 0.5);
  return v[idx];
}

struct PlanArgs {
  std::string chain;
  std::string waypoints;
  std::string out;
  int degree = kDefaultDegree;
};

int run_plan(const PlanArgs& a) {
  const ChainConfig chain = load_chain(a.chain);
  PlanRequest request;
  request.request_id = "offline";
  request.waypoints = wire::load_waypoints(a.waypoints);
  PlannerSettings settings;
  settings.degree = a.degree;
  const Plan p = plan(request, chain, RobotState::at_rest(chain.home), settings);
  if (!a.out.empty()) {
    auto out = open_out(a.out);
    write_trajectory_csv(out, p.joints, chain.control_frequency);
  }
  std::cout << "waypoints " << p.durations.size() << ", duration " << p.duration() << " s\n"
            << "max junction discontinuity " << max_junction_discontinuity(p) << "\n"
            << "terminal residual " << terminal_residual(p) << "\n"
            << "pass-through residual " << pass_through_residual(p) << "\n"
            << "qp time " << p.qp_time * 1e3 << " ms, max iterations " << p.max_iterations << "\n";
  return 0;
}

struct ServeArgs {
  std::string chain;
  int port = 7400;
  int telemetry_port = -1;
  std::string robot = "arm";
  double duration = 0.0;
};

int run_serve(const ServeArgs& a) {
  const ChainConfig chain = load_chain(a.chain);
  SessionOptions options;
  options.keep_log = false;
  Session session(chain, RobotState::at_rest(chain.home), options);
  Service service(session, {"127.0.0.1", a.port, a.telemetry_port, a.robot});
  service.start();
  std::cout << "serving robot '" << a.robot << "' on 127.0.0.1:" << service.port() << ", telemetry on "
            << service.telemetry_port() << std::endl;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto start = std::chrono::steady_clock::now();
  while (!g_stop) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    if (a.duration > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= a.duration) {
      break;
    }
  }
  service.stop();
  std::cout << "ticks " << service.dispatcher().ticks() << ", max dispatch lateness "
            << service.dispatcher().max_jitter() * 1e3 << " ms, acks " << service.acks_sent() << std::endl;
  return 0;
}

struct SimArgs {
  std::string scenario;
  std::string out;
  std::string report;
  std::uint64_t seed = 0;
  double jitter_ms = -1.0;
};

int run_sim(const SimArgs& a) {
  const ScenarioScript script = load_scenario(a.scenario);
  ScenarioOptions options;
  options.seed = a.seed;
  if (a.jitter_ms >= 0.0) options.jitter_ms = a.jitter_ms;
  const ScenarioResult result = run_scenario(script, options);
  if (!a.out.empty()) {
    auto out = open_out(a.out);
    write_log_csv(out, result.log);
  }
  if (!a.report.empty()) {
    auto out = open_out(a.report);
    out << result.report.dump(2) << '\n';
  }
  nlohmann::json summary = result.report;
  summary.erase("events");
  std::cout << summary.dump(2) << std::endl;
  return 0;
}

struct BenchArgs {
  int n = 5;
  int degree = kDefaultDegree;
  int joints = 6;
  int samples = 400;
  double segment = 0.05;
  double fc = 100.0;
  double v_max = 2.0;
  double a_max = 15.0;
  double step = 0.005;
  std::uint64_t seed = 0;
  bool serial = false;
  std::string out;
};

int run_bench(const BenchArgs& a) {
  BenchWorkload w;
  w.n = a.n;
  w.degree = a.degree;
  w.joints = a.joints;
  w.segment = a.segment;
  w.fc = a.fc;
  w.v_max = a.v_max;
  w.a_max = a.a_max;
  w.step = a.step;
  std::mt19937_64 rng(a.seed);
  const SolverSettings settings;
  std::ofstream file;
  if (!a.out.empty()) file = open_out(a.out);
  std::vector<double> times;
  std::size_t solved = 0;
  for (int s = 0; s < a.samples; ++s) {
    const BenchRecord rec = time_request(w, random_request(w, rng), settings, !a.serial);
    solved += rec.status == SolveStatus::solved ? 1 : 0;
    times.push_back(rec.solve_time_s);
    if (file) file << to_json(rec).dump() << '\n';
  }
  std::cout << "samples " << times.size() << ", solved " << solved << ", threads " << kernels::max_threads()
            << "\nsolve time ms: median " << percentile(times, 0.5) * 1e3 << ", p90 " << percentile(times, 0.9) * 1e3
            << ", max " << percentile(times, 1.0) * 1e3 << std::endl;
  return solved == times.size() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time minimum-jerk motion planning"};
  app.require_subcommand(1);
  app.fallthrough();

  PlanArgs plan_args;
  auto* plan_cmd = app.add_subcommand("plan", "Plan an offline waypoint file and write the sampled trajectory");
  plan_cmd->add_option("chain", plan_args.chain, "Chain JSON")->required();
  plan_cmd->add_option("waypoints", plan_args.waypoints, "Waypoint list JSON")->required();
  plan_cmd->add_option("--out", plan_args.out, "Trajectory CSV");
  plan_cmd->add_option("--degree", plan_args.degree, "Polynomial degree")->check(CLI::Range(4, 12));

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Run the live request/telemetry service");
  serve_cmd->add_option("chain", serve_args.chain, "Chain JSON")->required();
  serve_cmd->add_option("--port", serve_args.port, "Request port");
  serve_cmd->add_option("--telemetry-port", serve_args.telemetry_port, "Telemetry port (default port + 1)");
  serve_cmd->add_option("--robot", serve_args.robot, "Robot id");
  serve_cmd->add_option("--duration", serve_args.duration, "Stop after this many seconds (0 = until signal)");

  SimArgs sim_args;
  auto* sim_cmd = app.add_subcommand("sim", "Run a scenario script on the simulated clock");
  sim_cmd->add_option("scenario", sim_args.scenario, "Scenario JSON")->required();
  sim_cmd->add_option("--out", sim_args.out, "Telemetry log CSV");
  sim_cmd->add_option("--report", sim_args.report, "Report JSON");
  sim_cmd->add_option("--jitter-ms", sim_args.jitter_ms, "Override teleop delivery jitter (+/- ms)");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Per-request QP solve-time study");
  bench_cmd->add_option("--n", bench_args.n, "Waypoints per request")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--L", bench_args.degree, "Polynomial degree")->check(CLI::Range(4, 12));
  bench_cmd->add_option("--joints", bench_args.joints, "Joints per request")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--samples", bench_args.samples, "Requests to time")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--segment", bench_args.segment, "Segment duration s");
  bench_cmd->add_option("--fc", bench_args.fc, "Control frequency Hz");
  bench_cmd->add_option("--step", bench_args.step, "Max joint increment per waypoint, rad");
  bench_cmd->add_flag("--serial", bench_args.serial, "Use the serial kernel");
  bench_cmd->add_option("--out", bench_args.out, "JSONL output");

  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Seed for randomized workloads")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  sim_args.seed = seed;
  bench_args.seed = seed;

  try {
    if (*plan_cmd) return run_plan(plan_args);
    if (*serve_cmd) return run_serve(serve_args);
    if (*sim_cmd) return run_sim(sim_args);
    if (*bench_cmd) return run_bench(bench_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 1;
}
