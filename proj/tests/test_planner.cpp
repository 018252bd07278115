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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "rtmotion/errors.hpp"
#include "rtmotion/planner.hpp"
#include "support.hpp"

using namespace rtmotion;
using testsupport::request_of;
using testsupport::scenario_waypoints;
using testsupport::six_dof;

namespace {

// Joint-space limit check on the control grid.
int grid_limit_violations(const Plan& p, const ChainConfig& c, double tol) {
  int bad = 0;
  const auto ticks = static_cast<int>(std::ceil(p.duration() * c.control_frequency)) + 1;
  for (int k = 0; k < ticks; ++k) {
    const RobotState s = reference_state(p, p.epoch + k / c.control_frequency);
    for (int j = 0; j < c.dof(); ++j) {
      if (std::abs(s.qd[j]) > c.v_max[j] + tol || std::abs(s.qdd[j]) > c.a_max[j] + tol) ++bad;
      if (s.q[j] < c.joint_limits[j].min - tol || s.q[j] > c.joint_limits[j].max + tol) ++bad;
    }
  }
  return bad;
}

double state_gap(const RobotState& a, const RobotState& b) {
  return std::max({(a.q - b.q).cwiseAbs().maxCoeff(), (a.qd - b.qd).cwiseAbs().maxCoeff(),
                   (a.qdd - b.qdd).cwiseAbs().maxCoeff()});
}

std::vector<Eigen::Vector3d> line_points(const ChainConfig& c, const std::vector<CartesianWaypoint>& w) {
  std::vector<Eigen::Vector3d> pts{forward_kinematics(c, c.home).translation};
  for (const auto& x : w) pts.push_back(x.pose.translation);
  return pts;
}

}  // namespace

TEST_CASE("line plan: timing, pass-through, continuity, rest and limits") {
  const ChainConfig c = six_dof();
  const auto w = scenario_waypoints("draw-line");
  const Plan p = plan(request_of(w), c, RobotState::at_rest(c.home));
  CHECK(p.duration() == doctest::Approx(3.5));
  CHECK(p.dof() == 6);
  CHECK(pass_through_residual(p) <= 1e-6);
  CHECK(max_junction_discontinuity(p) <= 1e-6);
  CHECK(terminal_residual(p) <= 1e-6);
  CHECK(grid_limit_violations(p, c, 1e-6) == 0);

  // Each waypoint arrival reproduces the requested pose.
  double t = 0.0;
  for (const auto& x : w) {
    t += x.duration;
    const Pose got = reference_at(p, c, t).pose;
    CHECK((got.translation - x.pose.translation).norm() <= 1e-4);
  }

  // Geometric deviation from the straight segments, sampled at 1 kHz.
  const auto pts = line_points(c, w);
  double worst = 0.0;
  for (int k = 0; k <= 3500; ++k) {
    worst = std::max(worst, testsupport::polyline_distance(reference_at(p, c, k * 1e-3).pose.translation, pts));
  }
  CHECK(worst <= 2e-3);
}

TEST_CASE("circle plan keeps the same invariants") {
  const ChainConfig c = six_dof();
  const Plan p = plan(request_of(scenario_waypoints("draw-circle")), c, RobotState::at_rest(c.home));
  CHECK(p.duration() == doctest::Approx(9.0));
  CHECK(pass_through_residual(p) <= 1e-6);
  CHECK(max_junction_discontinuity(p) <= 1e-6);
  CHECK(terminal_residual(p) <= 1e-6);
  CHECK(grid_limit_violations(p, c, 1e-6) == 0);
}

TEST_CASE("reference at the epoch and after the final waypoint") {
  const ChainConfig c = six_dof();
  const RobotState s0 = RobotState::at_rest(c.home, 2.0);
  const Plan p = plan(request_of(scenario_waypoints("draw-line")), c, s0);
  CHECK(p.epoch == 2.0);
  CHECK(state_gap(reference_state(p, 2.0), s0) <= 1e-9);
  const RobotState end = reference_state(p, 2.0 + p.duration());
  CHECK((end.q - p.joint_waypoints.back()).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(end.qd.cwiseAbs().maxCoeff() == 0.0);
  CHECK(end.qdd.cwiseAbs().maxCoeff() == 0.0);
  const RobotState later = reference_state(p, 100.0);
  CHECK((later.q - end.q).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(reference_state(p, 1.99), ValidationError);
}

TEST_CASE("a single waypoint at the current pose yields a stationary plan") {
  const ChainConfig c = six_dof();
  CartesianWaypoint w;
  w.pose = forward_kinematics(c, c.home);
  w.duration = 1.0;
  const Plan p = plan(request_of({w}), c, RobotState::at_rest(c.home));
  for (double t : {0.0, 0.25, 0.5, 0.99}) {
    const RobotState s = reference_state(p, t);
    CHECK((s.q - c.home).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(s.qd.cwiseAbs().maxCoeff() <= 1e-9);
    for (const auto& j : p.joints) CHECK(std::abs(j.jerk(t)) <= 1e-6);
  }
}

TEST_CASE("preemption starts from the commanded reference at receipt") {
  const ChainConfig c = six_dof();
  const Pose home = forward_kinematics(c, c.home);
  CartesianWaypoint a;
  a.pose = home;
  a.pose.translation += Eigen::Vector3d(0.0, 0.05, -0.05);
  a.duration = 1.5;
  const Plan first = plan(request_of({a}, "a"), c, RobotState::at_rest(c.home));

  CartesianWaypoint b = a;
  b.pose.translation = home.translation + Eigen::Vector3d(0.03, -0.02, -0.04);
  const double t_now = 1.0;
  const Plan second = preempt(first, t_now, request_of({b}, "b"), c);
  CHECK(second.epoch == t_now);
  CHECK(second.request_id == "b");
  const RobotState old_ref = reference_state(first, t_now);
  CHECK(state_gap(second.initial, old_ref) == 0.0);
  CHECK(state_gap(reference_state(second, t_now), old_ref) <= 1e-9);
  CHECK(old_ref.qd.cwiseAbs().maxCoeff() > 1e-3);  // the switch happened mid-motion
  CHECK(terminal_residual(second) <= 1e-6);
}

TEST_CASE("one hundred buffered preemptions stay continuous") {
  const ChainConfig c = six_dof();
  const Pose home = forward_kinematics(c, c.home);
  const double dt = 0.04, w = 2.0 * std::numbers::pi * 0.25;
  auto master = [&](double t) {
    Pose p = home;
    p.translation += Eigen::Vector3d(0.02 * std::sin(w * t), 0.015 * (1.0 - std::cos(w * t)), 0.0);
    return p;
  };
  Plan active = plan(request_of({{master(0.0), dt}}), c, RobotState::at_rest(c.home));
  double worst = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double t_now = k * dt;
    std::vector<CartesianWaypoint> buf;
    for (int i = std::max(0, k - 4); i <= k; ++i) buf.push_back({master(i * dt), dt});
    Plan next = preempt(active, t_now, request_of(buf, std::to_string(k)), c);
    worst = std::max(worst, state_gap(reference_state(next, t_now), reference_state(active, t_now)));
    CHECK(max_junction_discontinuity(next) <= 1e-6);
    active = std::move(next);
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("request validation names the failing field") {
  const ChainConfig c = six_dof();
  const RobotState s0 = RobotState::at_rest(c.home);
  auto reason = [&](const PlanRequest& r) -> std::string {
    try {
      plan(r, c, s0);
    } catch (const std::exception& e) {
      return e.what();
    }
    return "accepted";
  };
  CartesianWaypoint ok;
  ok.pose = forward_kinematics(c, c.home);
  ok.duration = 0.5;

  CHECK(reason(request_of({})).rfind("waypoints", 0) == 0);
  CartesianWaypoint shortw = ok;
  shortw.duration = 0.015;
  CHECK(reason(request_of({ok, shortw})).rfind("duration", 0) == 0);
  shortw.duration = 0.0;
  CHECK_THROWS_AS(plan(request_of({shortw}), c, s0), ValidationError);
  CartesianWaypoint nan = ok;
  nan.pose.translation.x() = NAN;
  CHECK(reason(request_of({nan})).rfind("pose", 0) == 0);
  PlanRequest typed = request_of({ok});
  typed.request_type = "rt-move-joint";
  CHECK(reason(typed).rfind("type", 0) == 0);
  ok.duration = 0.02;  // exactly two control periods
  CHECK(reason(request_of({ok})) == "accepted");
}

TEST_CASE("unreachable waypoints reject the whole request") {
  const ChainConfig c = six_dof();
  CartesianWaypoint near;
  near.pose = forward_kinematics(c, c.home);
  near.pose.translation.y() += 0.02;
  near.duration = 0.5;
  CartesianWaypoint far = near;
  far.pose.translation = Eigen::Vector3d(3.0, 0.0, 0.5);
  try {
    plan(request_of({near, far}), c, RobotState::at_rest(c.home));
    FAIL("expected IkFailure");
  } catch (const IkFailure& e) {
    CHECK(e.waypoint() == 1);
    CHECK(std::string(e.what()).rfind("ik", 0) == 0);
  }
}

TEST_CASE("limits that cannot be met fail in the QP stage") {
  ChainConfig c = six_dof();
  c.v_max = Eigen::VectorXd::Constant(6, 1e-3);
  CHECK_THROWS_AS(plan(request_of(scenario_waypoints("draw-line")), c, RobotState::at_rest(c.home)), QpFailure);
}

TEST_CASE("planning is deterministic and kernel-independent") {
  const ChainConfig c = six_dof();
  const auto r = request_of(scenario_waypoints("draw-circle"));
  PlannerSettings serial;
  serial.parallel = false;
  const Plan a = plan(r, c, RobotState::at_rest(c.home));
  const Plan b = plan(r, c, RobotState::at_rest(c.home));
  const Plan s = plan(r, c, RobotState::at_rest(c.home), serial);
  for (int j = 0; j < c.dof(); ++j) {
    for (std::size_t i = 0; i < a.durations.size(); ++i) {
      const auto& ca = a.joints[j].segments()[i].coeffs;
      CHECK((ca - b.joints[j].segments()[i].coeffs).cwiseAbs().maxCoeff() == 0.0);
      CHECK((ca - s.joints[j].segments()[i].coeffs).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}
