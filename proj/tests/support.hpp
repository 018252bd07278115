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

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtmotion/chain.hpp"
#include "rtmotion/planner.hpp"
#include "rtmotion/qpbuild.hpp"
#include "rtmotion/scenario.hpp"
#include "rtmotion/wire.hpp"

namespace testsupport {

inline std::string data_path(const std::string& rel) { return std::string(RTMOTION_DATA_DIR) + "/" + rel; }

inline nlohmann::json read_json(const std::string& rel) {
  std::ifstream in(data_path(rel));
  if (!in) throw std::runtime_error("missing test data " + rel);
  return nlohmann::json::parse(in);
}

inline rtmotion::ChainConfig planar2() { return rtmotion::load_chain(data_path("fixtures/planar2.json")); }
inline rtmotion::ChainConfig six_dof() { return rtmotion::load_chain(data_path("fixtures/six_dof.json")); }

/// Waypoints of the first send_request event in a scenario script.
inline std::vector<rtmotion::CartesianWaypoint> scenario_waypoints(const std::string& scenario) {
  const nlohmann::json j = read_json("scenarios/" + scenario + ".json");
  for (const auto& e : j.at("events")) {
    if (e.at("action") == "send_request") return rtmotion::wire::waypoints_from_json(e.at("waypoints"));
  }
  throw std::runtime_error("no request in " + scenario);
}

inline rtmotion::PlanRequest request_of(std::vector<rtmotion::CartesianWaypoint> waypoints, std::string id = "r") {
  rtmotion::PlanRequest r;
  r.robot_id = "arm";
  r.request_id = std::move(id);
  r.waypoints = std::move(waypoints);
  return r;
}

/// Uniform configuration strictly inside the limits by `margin`.
inline Eigen::VectorXd random_q(const rtmotion::ChainConfig& c, std::mt19937_64& rng, double margin = 0.1) {
  Eigen::VectorXd q(c.dof());
  for (int j = 0; j < c.dof(); ++j) {
    std::uniform_real_distribution<double> u(c.joint_limits[j].min + margin, c.joint_limits[j].max - margin);
    q[j] = u(rng);
  }
  return q;
}

/// Distance from p to the polyline through pts (independent of the library helper).
inline double polyline_distance(const Eigen::Vector3d& p, const std::vector<Eigen::Vector3d>& pts) {
  double best = (p - pts.front()).norm();
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Eigen::Vector3d a = pts[i - 1], ab = pts[i] - pts[i - 1];
    const double len2 = ab.squaredNorm();
    double s = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    s = std::min(1.0, std::max(0.0, s));
    best = std::min(best, (p - (a + s * ab)).norm());
  }
  return best;
}

/// Rotation about a unit axis by angle (Rodrigues), written out by hand.
inline Eigen::Matrix3d rodrigues(const Eigen::Vector3d& k, double a) {
  Eigen::Matrix3d K;
  K << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(a) * K + (1.0 - std::cos(a)) * K * K;
}

/// Random equality-only problem: N in 1..5 segments, degree 4..6 (a single
/// quartic segment is skipped as it is overdetermined).
inline rtmotion::QpProblem random_equality_problem(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_dist(1, 5), l_dist(4, 6);
  std::uniform_real_distribution<double> dur(0.2, 1.0), pos(-1.0, 1.0), vel(-0.5, 0.5), acc(-1.0, 1.0);
  int n = 0, degree = 0;
  do {
    n = n_dist(rng);
    degree = l_dist(rng);
  } while (n == 1 && degree == 4);
  std::vector<rtmotion::JointTarget> w;
  for (int i = 0; i < n; ++i) {
    const double d = dur(rng);
    w.push_back({pos(rng), d});
  }
  const rtmotion::InitialState s0{pos(rng), vel(rng), acc(rng)};
  return rtmotion::assemble_equality_qp(w, s0, degree, 100.0);
}

/// Equality-constrained minimizer via a complete orthogonal decomposition of
/// the KKT matrix, kept apart from the library's own direct solver.
inline Eigen::VectorXd kkt_oracle(const rtmotion::QpProblem& p) {
  const Eigen::Index n = p.num_variables(), m = p.n_eq;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + m, n + m);
  const double s = p.Q.diagonal().maxCoeff();
  K.topLeftCorner(n, n) = 2.0 * p.Q / s;
  K.topRightCorner(n, m) = p.A_eq().transpose();
  K.bottomLeftCorner(m, n) = p.A_eq();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
  rhs.tail(m) = p.b_eq();
  return K.completeOrthogonalDecomposition().solve(rhs).head(n);
}

}  // namespace testsupport
