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

// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rtmotion/kernels.hpp"
#include "rtmotion/planner.hpp"
#include "rtmotion/qpsolve.hpp"
#include "rtmotion/scenario.hpp"
#include "rtmotion/workload.hpp"
#include "support.hpp"

using namespace rtmotion;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

ScenarioResult scenario(const std::string& name) {
  return run_scenario(load_scenario(testsupport::data_path("scenarios/" + name + ".json")));
}

struct LimitUse {
  double excess = -INFINITY;  // largest |value| - limit
  double fraction = 0.0;      // largest |value| / limit
};

// Sampled limit check straight from the telemetry log.
LimitUse limit_use(const ScenarioResult& r, const ChainConfig& c) {
  LimitUse u;
  for (const auto& rec : r.log) {
    for (int j = 0; j < c.dof(); ++j) {
      const double v = std::abs(rec.reference.qd[j]), a = std::abs(rec.reference.qdd[j]);
      u.excess = std::max({u.excess, v - c.v_max[j], a - c.a_max[j]});
      u.fraction = std::max({u.fraction, v / c.v_max[j], a / c.a_max[j]});
    }
  }
  return u;
}

Outcome quintic() {
  const auto t0 = Clock::now();
  const QpProblem p = assemble_qp({{1.0, 1.0}}, {0, 0, 0}, 5, 100.0, {2.0, 15.0});
  const Solution s = solve(p);
  Eigen::VectorXd expected(6);
  expected << 0, 0, 0, 10, -15, 6;
  const double err = s.ok() ? (s.p - expected).cwiseAbs().maxCoeff() : INFINITY;
  const double dt = seconds_since(t0);
  return {err <= 1e-6 && dt < 1.0, fmt("max coefficient error %.2e, %.3f s", err, dt)};
}

Outcome kkt_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2026);
  SolverSettings settings;
  settings.polish = false;  // the operator-splitting iterate itself is compared
  double worst = 0.0;
  int unsolved = 0;
  for (int i = 0; i < 50; ++i) {
    const QpProblem p = testsupport::random_equality_problem(rng);
    const Eigen::VectorXd ref = solve_kkt_equality(p.Q, p.A_eq(), p.b_eq());
    const Solution s = solve(p, settings);
    if (!s.ok()) ++unsolved;
    worst = std::max(worst, (s.p - ref).norm() / std::max(1.0, ref.norm()));
  }
  const double dt = seconds_since(t0);
  return {unsolved == 0 && worst <= 1e-5 && dt < 10.0,
          fmt("max relative difference %.2e, unsolved %.0f, %.3f s", worst, unsolved, dt)};
}

Outcome continuity() {
  const ChainConfig c = testsupport::six_dof();
  double junction = 0.0, terminal = 0.0;
  LimitUse use;
  int accepted = 0;
  for (const char* name : {"draw-line", "draw-circle"}) {
    const ScenarioResult r = scenario(name);
    junction = std::max(junction, r.report.at("max_junction_discontinuity").get<double>());
    terminal = std::max(terminal, r.report.at("max_terminal_residual").get<double>());
    const LimitUse u = limit_use(r, c);
    use.excess = std::max(use.excess, u.excess);
    use.fraction = std::max(use.fraction, u.fraction);
    accepted += r.report.at("requests").at("accepted").get<int>();
  }
  return {accepted == 2 && junction <= 1e-6 && terminal <= 1e-6 && use.excess <= 1e-6,
          fmt("junction %.2e, terminal %.2e, peak limit use %.3f", junction, terminal, use.fraction)};
}

Outcome preemption() {
  const ChainConfig c = testsupport::six_dof();
  const ScenarioResult r = scenario("chase");
  const int preemptions = r.report.at("requests").at("preemptions").get<int>();
  // Inter-tick step against v_max / f_c, computed from the log.
  double ratio = 0.0;
  for (std::size_t k = 1; k < r.log.size(); ++k) {
    for (int j = 0; j < c.dof(); ++j) {
      const double step = std::abs(r.log[k].reference.q[j] - r.log[k - 1].reference.q[j]);
      ratio = std::max(ratio, step / (c.v_max[j] / c.control_frequency));
    }
  }
  const double rest = std::max(r.report.at("final").at("max_abs_qd").get<double>(),
                               r.report.at("final").at("max_abs_qdd").get<double>());
  const double target = r.report.at("final_target_error_m").get<double>();
  return {preemptions >= 10 && ratio <= 1.001 && rest <= 1e-6 && target <= 1e-4,
          fmt("%.0f preemptions, max step ratio %.4f, final rest %.1e, final target error %.1e m", preemptions, ratio,
              rest, target)};
}

Outcome teleop() {
  const ScenarioResult r = scenario("teleop-replay");
  const int preemptions = r.report.at("requests").at("preemptions").get<int>();
  const double delay = r.report.at("pipeline_delay_s").get<double>();
  const double junction = r.report.at("max_junction_discontinuity").get<double>();
  return {preemptions >= 100 && std::abs(delay - 0.2) <= 0.02 && junction <= 1e-6,
          fmt("delay %.3f s, %.0f preemptions, junction %.2e", delay, preemptions, junction)};
}

Outcome bench() {
  BenchWorkload w;  // 6 joints, N = 5, L = 5
  std::mt19937_64 rng(0);
  std::vector<double> times;
  int solved = 0;
  for (int s = 0; s < 400; ++s) {
    const BenchRecord r = time_request(w, random_request(w, rng), SolverSettings{}, true);
    times.push_back(r.solve_time_s);
    solved += r.status == SolveStatus::solved ? 1 : 0;
  }
  std::nth_element(times.begin(), times.begin() + 200, times.end());
  const double median = times[200];
  return {median <= 5e-3 && solved == 400,
          fmt("median %.3f ms over 400 requests, %.0f solved, %.0f threads", median * 1e3, solved,
              kernels::max_threads())};
}

Outcome kinematics() {
  const ChainConfig c = testsupport::six_dof();
  std::mt19937_64 rng(77);
  double jac = 0.0;
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd q = testsupport::random_q(c, rng);
    const Matrix6X J = jacobian(c, q);
    for (int j = 0; j < c.dof(); ++j) {
      Eigen::VectorXd qp = q, qm = q;
      qp[j] += h;
      qm[j] -= h;
      const auto Tp = forward_kinematics_transform(c, qp), Tm = forward_kinematics_transform(c, qm);
      const Eigen::Vector3d lin = (Tp.translation() - Tm.translation()) / (2 * h);
      const Eigen::AngleAxisd d(Tp.linear() * Tm.linear().transpose());
      const Eigen::Vector3d ang = d.axis() * d.angle() / (2 * h);
      jac = std::max({jac, (J.block<3, 1>(0, j) - lin).cwiseAbs().maxCoeff(),
                      (J.block<3, 1>(3, j) - ang).cwiseAbs().maxCoeff()});
    }
  }
  std::uniform_real_distribution<double> nudge(-0.1, 0.1);
  double pos = 0.0, rot = 0.0;
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd q = testsupport::random_q(c, rng);
    Eigen::VectorXd seed = q;
    for (int j = 0; j < c.dof(); ++j) seed[j] += nudge(rng);
    const auto target = forward_kinematics_transform(c, q);
    try {
      const Eigen::VectorXd sol = inverse_kinematics(c, Pose::from_transform(target), c.clamp(seed));
      const auto got = forward_kinematics_transform(c, sol);
      pos = std::max(pos, (got.translation() - target.translation()).norm());
      rot = std::max(rot, Eigen::AngleAxisd(got.linear().transpose() * target.linear()).angle());
    } catch (const std::exception&) {
      ++failures;
    }
  }
  return {jac <= 1e-5 && failures == 0 && pos <= 1e-4 && rot <= 1e-3,
          fmt("jacobian error %.2e, round trip %.1e m / %.1e rad, %.0f failures", jac, pos, rot, failures)};
}

Outcome geometric_deviation() {
  const ChainConfig c = testsupport::six_dof();
  const auto waypoints = testsupport::scenario_waypoints("draw-line");
  const Plan p = plan(testsupport::request_of(waypoints), c, RobotState::at_rest(c.home));
  std::vector<Eigen::Vector3d> pts{forward_kinematics(c, c.home).translation};
  for (const auto& w : waypoints) pts.push_back(w.pose.translation);
  double worst = 0.0;
  for (int k = 0; k * 1e-3 <= p.duration() + 1e-12; ++k) {
    worst = std::max(worst, testsupport::polyline_distance(reference_at(p, c, k * 1e-3).pose.translation, pts));
  }
  const double circle = scenario("draw-circle").report.at("path_deviation_m").get<double>();
  return {worst <= 2e-3, fmt("line deviation %.3f mm (circle %.3f mm, reported only)", worst * 1e3, circle * 1e3)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"analytic quintic", quintic},
      {"KKT equivalence", kkt_equivalence},
      {"continuity suite", continuity},
      {"preemption suite", preemption},
      {"teleop buffering", teleop},
      {"solve-time benchmark", bench},
      {"kinematics suite", kinematics},
      {"geometric deviation", geometric_deviation},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
