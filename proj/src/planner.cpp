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

#include "rtmotion/planner.hpp"

#include <chrono>
#include <cmath>

#include "rtmotion/errors.hpp"
#include "rtmotion/kernels.hpp"
#include "rtmotion/qpbuild.hpp"

namespace rtmotion {

RobotState RobotState::at_rest(const Eigen::VectorXd& q, double timestamp) {
  return {q, Eigen::VectorXd::Zero(q.size()), Eigen::VectorXd::Zero(q.size()), timestamp};
}

double Plan::duration() const { return joints.empty() ? 0.0 : joints.front().total_time(); }

void validate_request(const PlanRequest& request, const ChainConfig& chain) {
  if (request.request_type != kMoveCartesian) {
    throw ValidationError("type: unsupported request type '" + request.request_type + "'");
  }
  if (request.waypoints.empty()) throw ValidationError("waypoints: empty");
  const double min_duration = 2.0 / chain.control_frequency;
  for (std::size_t i = 0; i < request.waypoints.size(); ++i) {
    const auto& w = request.waypoints[i];
    if (!w.pose.is_finite()) throw ValidationError("pose: waypoint " + std::to_string(i) + " is not finite");
    if (!std::isfinite(w.duration) || w.duration < min_duration * (1.0 - 1e-9)) {
      throw ValidationError("duration: waypoint " + std::to_string(i) + " has duration " +
                            std::to_string(w.duration) + " s, minimum is two control periods (" +
                            std::to_string(min_duration) + " s)");
    }
  }
}

namespace {

void check_state(const RobotState& s, const ChainConfig& chain) {
  const auto n = static_cast<Eigen::Index>(chain.dof());
  if (s.q.size() != n || s.qd.size() != n || s.qdd.size() != n) {
    throw ValidationError("state: dimension does not match chain dof");
  }
  if (!s.q.allFinite() || !s.qd.allFinite() || !s.qdd.allFinite() || !std::isfinite(s.timestamp)) {
    throw ValidationError("state: not finite");
  }
}

}  // namespace

Plan plan(const PlanRequest& request, const ChainConfig& chain, const RobotState& s0,
          const PlannerSettings& settings) {
  validate_request(request, chain);
  check_state(s0, chain);
  const int dof = chain.dof();
  const std::size_t n = request.waypoints.size();

  Plan out;
  out.request_id = request.request_id;
  out.epoch = s0.timestamp;
  out.initial = s0;
  out.durations.reserve(n);
  out.joint_waypoints.reserve(n);

  Eigen::VectorXd seed = s0.q;
  for (std::size_t i = 0; i < n; ++i) {
    try {
      seed = inverse_kinematics(chain, request.waypoints[i].pose, seed, settings.ik);
    } catch (const NoConvergence& e) {
      std::string what = e.what();
      if (what.rfind("ik: ", 0) == 0) what.erase(0, 4);
      throw IkFailure(i, what);
    }
    out.joint_waypoints.push_back(seed);
    out.durations.push_back(request.waypoints[i].duration);
  }

  std::vector<QpProblem> problems;
  problems.reserve(static_cast<std::size_t>(dof));
  for (int j = 0; j < dof; ++j) {
    std::vector<JointTarget> targets(n);
    for (std::size_t i = 0; i < n; ++i) targets[i] = {out.joint_waypoints[i][j], out.durations[i]};
    problems.push_back(assemble_qp(targets, {s0.q[j], s0.qd[j], s0.qdd[j]}, settings.degree,
                                   chain.control_frequency, {chain.v_max[j], chain.a_max[j]}));
  }

  const auto start = std::chrono::steady_clock::now();
  const std::vector<Solution> solutions = settings.parallel
                                              ? kernels::solve_joint_problems(problems, settings.solver)
                                              : kernels::solve_joint_problems_serial(problems, settings.solver);
  out.qp_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  out.joints.reserve(static_cast<std::size_t>(dof));
  for (int j = 0; j < dof; ++j) {
    const Solution& sol = solutions[static_cast<std::size_t>(j)];
    if (!sol.ok()) throw QpFailure(static_cast<std::size_t>(j), std::string(to_string(sol.status)));
    out.max_iterations = std::max(out.max_iterations, sol.iterations);
    out.solve_times.push_back(sol.solve_time);
    out.joints.push_back(JointTrajectory::from_coefficients(sol.p, settings.degree, out.durations));
  }
  return out;
}

RobotState reference_state(const Plan& plan, double t) {
  if (plan.joints.empty()) throw ValidationError("reference: empty plan");
  if (t < plan.epoch) throw ValidationError("reference: time precedes plan epoch");
  const double local = t - plan.epoch;
  const auto dof = static_cast<Eigen::Index>(plan.joints.size());
  RobotState s{Eigen::VectorXd(dof), Eigen::VectorXd(dof), Eigen::VectorXd(dof), t};
  for (Eigen::Index j = 0; j < dof; ++j) {
    const JointSample v = plan.joints[static_cast<std::size_t>(j)].eval(local);
    s.q[j] = v.q;
    s.qd[j] = v.qd;
    s.qdd[j] = v.qdd;
  }
  return s;
}

Reference reference_at(const Plan& plan, const ChainConfig& chain, double t) {
  RobotState s = reference_state(plan, t);
  Pose pose = forward_kinematics(chain, s.q);
  return {std::move(s), pose};
}

Plan preempt(const Plan& active, double t_now, const PlanRequest& request, const ChainConfig& chain,
             const PlannerSettings& settings) {
  const RobotState s0 = reference_state(active, t_now);
  return plan(request, chain, s0, settings);
}

double max_junction_discontinuity(const Plan& plan) {
  double worst = 0.0;
  for (const auto& joint : plan.joints) {
    const auto& segs = joint.segments();
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
      const double t = segs[i + 1].start_time;
      for (int k = 0; k < 3; ++k) {
        worst = std::max(worst, std::abs(eval_segment(segs[i], t, k) - eval_segment(segs[i + 1], t, k)));
      }
    }
  }
  return worst;
}

double terminal_residual(const Plan& plan) {
  double worst = 0.0;
  for (const auto& joint : plan.joints) {
    const auto& last = joint.segments().back();
    worst = std::max({worst, std::abs(eval_segment(last, last.end_time(), 1)),
                      std::abs(eval_segment(last, last.end_time(), 2))});
  }
  return worst;
}

double pass_through_residual(const Plan& plan) {
  double worst = 0.0;
  for (std::size_t j = 0; j < plan.joints.size(); ++j) {
    const auto& segs = plan.joints[j].segments();
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const double q = eval_segment(segs[i], segs[i].end_time(), 0);
      worst = std::max(worst, std::abs(q - plan.joint_waypoints[i][static_cast<Eigen::Index>(j)]));
    }
  }
  return worst;
}

}  // namespace rtmotion
