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

#include "rtmotion/qpbuild.hpp"

#include <cmath>

#include "rtmotion/errors.hpp"
#include "rtmotion/poly.hpp"

namespace rtmotion {

namespace {

void check_degree(int degree) {
  if (degree < kMinDegree) throw ValidationError("qp: polynomial degree must be >= 4");
}

void check_durations(const std::vector<double>& durations) {
  for (double d : durations) {
    if (!(d > 0.0) || !std::isfinite(d)) throw ValidationError("qp: segment duration must be > 0");
  }
}

std::vector<double> durations_of(const std::vector<JointTarget>& waypoints) {
  std::vector<double> out;
  out.reserve(waypoints.size());
  for (const auto& w : waypoints) out.push_back(w.duration);
  return out;
}

// Row of the k-th time derivative at normalized time u of a segment.
Eigen::RowVectorXd scaled_row(int degree, double u, int k, double duration) {
  return basis_row(degree, u, k) * std::pow(duration, -k);
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = j[r].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ValidationError("qp: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

}  // namespace

int samples_per_segment(double duration, double control_frequency) {
  if (!(duration > 0.0)) throw ValidationError("qp: segment duration must be > 0");
  if (!(control_frequency > 0.0)) throw ValidationError("qp: control frequency must be > 0");
  return std::max(2, static_cast<int>(std::lround(control_frequency * duration)));
}

std::vector<double> sample_grid(double duration, double control_frequency) {
  const int n = samples_per_segment(duration, control_frequency);
  std::vector<double> u(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) u[static_cast<std::size_t>(j)] = static_cast<double>(j) / (n - 1);
  u.back() = 1.0;
  return u;
}

Eigen::MatrixXd jerk_cost_matrix(int degree, double duration, const std::vector<double>& u_samples) {
  check_degree(degree);
  if (!(duration > 0.0)) throw ValidationError("qp: segment duration must be > 0");
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(degree + 1, degree + 1);
  for (double u : u_samples) {
    const Eigen::RowVectorXd b = basis_row(degree, u, 3);
    q.noalias() += b.transpose() * b;
  }
  return q * std::pow(duration, -6);
}

Eigen::MatrixXd jerk_cost_matrix(int degree, double duration, double control_frequency) {
  return jerk_cost_matrix(degree, duration, sample_grid(duration, control_frequency));
}

LinearConstraints build_equality(const std::vector<JointTarget>& waypoints, const InitialState& s0,
                                 int degree) {
  check_degree(degree);
  if (waypoints.empty()) throw ValidationError("qp: waypoint list is empty");
  check_durations(durations_of(waypoints));
  if (!std::isfinite(s0.q) || !std::isfinite(s0.qd) || !std::isfinite(s0.qdd)) {
    throw ValidationError("qp: initial state is not finite");
  }
  for (const auto& w : waypoints) {
    if (!std::isfinite(w.position)) throw ValidationError("qp: waypoint position is not finite");
  }

  const auto n = static_cast<int>(waypoints.size());
  const int width = degree + 1;
  const int rows = 4 * n + 2;
  LinearConstraints c{Eigen::MatrixXd::Zero(rows, width * n), Eigen::VectorXd::Zero(rows),
                      Eigen::VectorXd::Zero(rows)};
  int r = 0;
  const double s0_values[3] = {s0.q, s0.qd, s0.qdd};
  for (int k = 0; k < 3; ++k, ++r) {
    c.A.block(r, 0, 1, width) = scaled_row(degree, 0.0, k, waypoints.front().duration);
    c.lower[r] = s0_values[k];
  }
  const int last = (n - 1) * width;
  for (int k = 0; k < 3; ++k, ++r) {
    c.A.block(r, last, 1, width) = scaled_row(degree, 1.0, k, waypoints.back().duration);
    c.lower[r] = k == 0 ? waypoints.back().position : 0.0;
  }
  for (int i = 0; i + 1 < n; ++i) {
    const auto& left = waypoints[static_cast<std::size_t>(i)];
    const auto& right = waypoints[static_cast<std::size_t>(i + 1)];
    c.A.block(r, i * width, 1, width) = scaled_row(degree, 1.0, 0, left.duration);
    c.lower[r] = left.position;
    ++r;
    for (int k = 0; k < 3; ++k, ++r) {
      c.A.block(r, i * width, 1, width) = scaled_row(degree, 1.0, k, left.duration);
      c.A.block(r, (i + 1) * width, 1, width) = -scaled_row(degree, 0.0, k, right.duration);
    }
  }
  c.upper = c.lower;
  return c;
}

LinearConstraints build_inequality(int degree, const std::vector<double>& durations,
                                   double control_frequency, double v_max, double a_max) {
  check_degree(degree);
  check_durations(durations);
  if (!(v_max > 0.0) || !(a_max > 0.0)) throw ValidationError("qp: velocity and acceleration limits must be > 0");
  const int width = degree + 1;
  int rows = 0;
  for (double d : durations) rows += 2 * samples_per_segment(d, control_frequency);
  LinearConstraints c{Eigen::MatrixXd::Zero(rows, width * static_cast<int>(durations.size())),
                      Eigen::VectorXd::Zero(rows), Eigen::VectorXd::Zero(rows)};
  int r = 0;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    const int col = static_cast<int>(i) * width;
    for (double u : sample_grid(durations[i], control_frequency)) {
      c.A.block(r, col, 1, width) = scaled_row(degree, u, 1, durations[i]);
      c.lower[r] = -v_max;
      c.upper[r] = v_max;
      ++r;
      c.A.block(r, col, 1, width) = scaled_row(degree, u, 2, durations[i]);
      c.lower[r] = -a_max;
      c.upper[r] = a_max;
      ++r;
    }
  }
  return c;
}

namespace {

QpProblem assemble(const std::vector<JointTarget>& waypoints, const InitialState& s0, int degree,
                   double control_frequency, const JointLimits* limits) {
  const LinearConstraints eq = build_equality(waypoints, s0, degree);
  const std::vector<double> durations = durations_of(waypoints);
  const auto n = static_cast<int>(waypoints.size());
  const int width = degree + 1;

  // Full row rank of the equality block, checked on row-normalized rows.
  {
    Eigen::MatrixXd normalized = eq.A;
    for (Eigen::Index r = 0; r < normalized.rows(); ++r) normalized.row(r).normalize();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(normalized);
    qr.setThreshold(1e-10);
    if (qr.rank() < normalized.rows()) {
      throw ValidationError("qp: equality constraints are rank deficient (" + std::to_string(qr.rank()) + " of " +
                            std::to_string(normalized.rows()) + " rows independent; raise the degree)");
    }
  }

  QpProblem p;
  p.degree = degree;
  p.durations = durations;
  p.n_eq = static_cast<int>(eq.A.rows());
  p.Q = Eigen::MatrixXd::Zero(width * n, width * n);
  for (int i = 0; i < n; ++i) {
    p.Q.block(i * width, i * width, width, width) =
        jerk_cost_matrix(degree, durations[static_cast<std::size_t>(i)], control_frequency);
  }
  p.Q.diagonal().array() += kCostRegularization;

  if (limits == nullptr) {
    p.A = eq.A;
    p.lower = eq.lower;
    p.upper = eq.upper;
    return p;
  }
  const LinearConstraints in = build_inequality(degree, durations, control_frequency, limits->v_max, limits->a_max);
  p.A.resize(eq.A.rows() + in.A.rows(), width * n);
  p.A << eq.A, in.A;
  p.lower.resize(p.A.rows());
  p.lower << eq.lower, in.lower;
  p.upper.resize(p.A.rows());
  p.upper << eq.upper, in.upper;
  return p;
}

}  // namespace

QpProblem assemble_qp(const std::vector<JointTarget>& waypoints, const InitialState& s0, int degree,
                      double control_frequency, const JointLimits& limits) {
  return assemble(waypoints, s0, degree, control_frequency, &limits);
}

QpProblem assemble_equality_qp(const std::vector<JointTarget>& waypoints, const InitialState& s0, int degree,
                               double control_frequency) {
  return assemble(waypoints, s0, degree, control_frequency, nullptr);
}

nlohmann::json qp_to_json(const QpProblem& p) {
  return {{"degree", p.degree},
          {"durations", p.durations},
          {"n_eq", p.n_eq},
          {"Q", matrix_to_json(p.Q)},
          {"A", matrix_to_json(p.A)},
          {"lower", std::vector<double>(p.lower.data(), p.lower.data() + p.lower.size())},
          {"upper", std::vector<double>(p.upper.data(), p.upper.data() + p.upper.size())}};
}

QpProblem qp_from_json(const nlohmann::json& j) {
  QpProblem p;
  try {
    p.degree = j.at("degree").get<int>();
    p.durations = j.at("durations").get<std::vector<double>>();
    p.n_eq = j.at("n_eq").get<int>();
    const auto n = static_cast<Eigen::Index>((p.degree + 1) * static_cast<int>(p.durations.size()));
    p.Q = matrix_from_json(j.at("Q"), n);
    p.A = matrix_from_json(j.at("A"), n);
    const auto lower = j.at("lower").get<std::vector<double>>();
    const auto upper = j.at("upper").get<std::vector<double>>();
    p.lower = Eigen::Map<const Eigen::VectorXd>(lower.data(), static_cast<Eigen::Index>(lower.size()));
    p.upper = Eigen::Map<const Eigen::VectorXd>(upper.data(), static_cast<Eigen::Index>(upper.size()));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("qp: ") + e.what());
  }
  if (p.Q.rows() != p.Q.cols() || p.lower.size() != p.A.rows() || p.upper.size() != p.A.rows()) {
    throw ValidationError("qp: inconsistent dimensions");
  }
  return p;
}

}  // namespace rtmotion
