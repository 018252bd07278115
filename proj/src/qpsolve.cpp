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

#include "rtmotion/qpsolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rtmotion/errors.hpp"

namespace rtmotion {

namespace {

constexpr double kMinScale = 1e-4;
constexpr double kMaxScale = 1e4;
constexpr int kStallChecks = 10;
constexpr double kStallFactor = 1e3;
constexpr double kPolishDelta = 1e-9;
constexpr int kRefineSteps = 3;
constexpr double kRankTol = 1e-10;

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

double limit_scale(double norm) { return std::clamp(norm, kMinScale, kMaxScale); }

double col_inf_norm(const Eigen::MatrixXd& m, Eigen::Index j) {
  return m.rows() == 0 ? 0.0 : m.col(j).cwiseAbs().maxCoeff();
}

// Tight rows eliminated: p = p0 + N w with A_eq p0 = b_eq and A_eq N = 0.
// What remains is min 1/2 w'Pw + q'w  s.t.  lower <= A w <= upper.
struct ReducedProblem {
  Eigen::VectorXd p0;
  Eigen::MatrixXd N;
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::MatrixXd A_eq;  // unit-norm tight rows
  std::vector<Eigen::Index> eq_rows;
  std::vector<Eigen::Index> in_rows;
};

ReducedProblem reduce(const QpProblem& problem) {
  const auto n = problem.Q.rows();
  const auto m = problem.A.rows();
  ReducedProblem r;
  for (Eigen::Index i = 0; i < m; ++i) {
    (problem.lower[i] == problem.upper[i] ? r.eq_rows : r.in_rows).push_back(i);
  }
  const auto m_eq = static_cast<Eigen::Index>(r.eq_rows.size());
  const auto m_in = static_cast<Eigen::Index>(r.in_rows.size());
  if (m_eq > n) throw ValidationError("solver: more tight rows than variables");

  r.A_eq.resize(m_eq, n);
  Eigen::VectorXd b_eq(m_eq);
  for (Eigen::Index k = 0; k < m_eq; ++k) {
    const Eigen::Index i = r.eq_rows[static_cast<std::size_t>(k)];
    const double norm = problem.A.row(i).norm();
    if (norm == 0.0) throw ValidationError("solver: zero constraint row");
    r.A_eq.row(k) = problem.A.row(i) / norm;
    b_eq[k] = problem.lower[i] / norm;
  }

  if (m_eq == 0) {
    r.p0 = Eigen::VectorXd::Zero(n);
    r.N = Eigen::MatrixXd::Identity(n, n);
  } else {
    // A_eq' = [Q1 Q2] [R; 0]  =>  p0 = Q1 R^-T b_eq, null space spanned by Q2.
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(r.A_eq.transpose());
    const Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(m_eq, m_eq).triangularView<Eigen::Upper>();
    const Eigen::VectorXd diag = R.diagonal().cwiseAbs();
    if (diag.minCoeff() <= kRankTol * diag.maxCoeff()) {
      throw ValidationError("solver: tight constraint rows are rank deficient");
    }
    const Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd v = R.transpose().triangularView<Eigen::Lower>().solve(b_eq);
    r.p0 = basis.leftCols(m_eq) * v;
    r.N = basis.rightCols(n - m_eq);
  }

  const Eigen::MatrixXd QN = problem.Q * r.N;
  r.P = 2.0 * r.N.transpose() * QN;
  r.P = 0.5 * (r.P + r.P.transpose()).eval();
  // Shift p0 to the equality-constrained minimizer so the reduced linear
  // term vanishes; ADMM then only resolves the interval rows.
  const Eigen::LLT<Eigen::MatrixXd> p_factor(r.P);
  if (p_factor.info() != Eigen::Success) throw ValidationError("solver: cost not positive definite on feasible set");
  const Eigen::VectorXd w_star = p_factor.solve(-2.0 * QN.transpose() * r.p0);
  r.p0 += r.N * w_star;
  r.q = Eigen::VectorXd::Zero(r.P.rows());
  Eigen::MatrixXd a_in(m_in, n);
  Eigen::VectorXd l_in(m_in);
  Eigen::VectorXd u_in(m_in);
  for (Eigen::Index k = 0; k < m_in; ++k) {
    const Eigen::Index i = r.in_rows[static_cast<std::size_t>(k)];
    a_in.row(k) = problem.A.row(i);
    l_in[k] = problem.lower[i];
    u_in[k] = problem.upper[i];
  }
  const Eigen::VectorXd offset = a_in * r.p0;
  r.A = a_in * r.N;
  r.lower = l_in - offset;
  r.upper = u_in - offset;
  return r;
}

// Ruiz equilibration: P = c D P0 D, q = c D q0, A = E A0 D, bounds E l0, E u0.
struct ScaledProblem {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd D;
  Eigen::VectorXd E;
  double c = 1.0;
};

ScaledProblem equilibrate(const ReducedProblem& r, int passes) {
  ScaledProblem s;
  const auto n = r.P.rows();
  const auto m = r.A.rows();
  s.P = r.P;
  s.q = r.q;
  s.A = r.A;
  s.D = Eigen::VectorXd::Ones(n);
  s.E = Eigen::VectorXd::Ones(m);
  for (int pass = 0; pass < passes && n > 0; ++pass) {
    Eigen::VectorXd delta(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      delta[j] = 1.0 / std::sqrt(limit_scale(std::max(col_inf_norm(s.P, j), col_inf_norm(s.A, j))));
    }
    Eigen::VectorXd eps(m);
    for (Eigen::Index i = 0; i < m; ++i) eps[i] = 1.0 / std::sqrt(limit_scale(s.A.row(i).cwiseAbs().maxCoeff()));
    s.P = delta.asDiagonal() * s.P * delta.asDiagonal();
    s.q = delta.cwiseProduct(s.q);
    s.A = eps.asDiagonal() * s.A * delta.asDiagonal();
    s.D = s.D.cwiseProduct(delta);
    s.E = s.E.cwiseProduct(eps);

    double mean_col = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) mean_col += col_inf_norm(s.P, j);
    mean_col /= static_cast<double>(n);
    const double gamma = 1.0 / limit_scale(std::max(mean_col, inf_norm(s.q)));
    s.P *= gamma;
    s.q *= gamma;
    s.c *= gamma;
  }
  s.lower = s.E.cwiseProduct(r.lower);
  s.upper = s.E.cwiseProduct(r.upper);
  return s;
}

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double eps_primal = 0.0;
  double eps_dual = 0.0;

  bool converged() const { return primal <= eps_primal && dual <= eps_dual; }
  double score() const { return std::max(primal / eps_primal, dual / eps_dual); }
};

// Measured in unscaled reduced coordinates.
Residuals residuals(const ScaledProblem& s, const SolverSettings& settings, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  const Eigen::VectorXd e_inv = s.E.cwiseInverse();
  const Eigen::VectorXd d_inv = s.D.cwiseInverse();
  const Eigen::VectorXd ax = e_inv.cwiseProduct(s.A * x);
  const Eigen::VectorXd zu = e_inv.cwiseProduct(z);
  Residuals r;
  r.primal = inf_norm(ax - zu);
  r.eps_primal = settings.eps_abs + settings.eps_rel * std::max(inf_norm(ax), inf_norm(zu));
  const Eigen::VectorXd px = d_inv.cwiseProduct(s.P * x) / s.c;
  const Eigen::VectorXd aty = d_inv.cwiseProduct(s.A.transpose() * y) / s.c;
  const Eigen::VectorXd qu = d_inv.cwiseProduct(s.q) / s.c;
  r.dual = inf_norm(px + qu + aty);
  r.eps_dual = settings.eps_abs + settings.eps_rel * std::max({inf_norm(px), inf_norm(aty), inf_norm(qu)});
  return r;
}

double max_violation(const QpProblem& problem, const Eigen::VectorXd& p) {
  const Eigen::VectorXd ap = problem.A * p;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < ap.size(); ++i) {
    worst = std::max({worst, problem.lower[i] - ap[i], ap[i] - problem.upper[i]});
  }
  return worst;
}

struct Iterate {
  Eigen::VectorXd x;  // scaled reduced variables
  Eigen::VectorXd z;
  Eigen::VectorXd y;
};

// Full-space coefficients and multipliers of a scaled reduced iterate.
void expand(const QpProblem& problem, const ReducedProblem& r, const ScaledProblem& s, const Iterate& it,
            Solution& sol) {
  sol.p = r.p0 + r.N * s.D.cwiseProduct(it.x);
  sol.y = Eigen::VectorXd::Zero(problem.A.rows());
  const Eigen::VectorXd y_in = s.E.cwiseProduct(it.y) / s.c;
  Eigen::VectorXd stationarity = 2.0 * problem.Q * sol.p;
  for (std::size_t k = 0; k < r.in_rows.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    sol.y[r.in_rows[k]] = y_in[kk];
    stationarity += problem.A.row(r.in_rows[k]).transpose() * y_in[kk];
  }
  if (r.eq_rows.empty()) return;
  // Tight-row multipliers absorb the stationarity residual orthogonal to N.
  const Eigen::VectorXd y_eq = r.A_eq.transpose().colPivHouseholderQr().solve(-stationarity);
  for (std::size_t k = 0; k < r.eq_rows.size(); ++k) {
    const Eigen::Index i = r.eq_rows[k];
    sol.y[i] = y_eq[static_cast<Eigen::Index>(k)] / problem.A.row(i).norm();
  }
}

// Equality-constrained re-solve on the active set read off (z, y).
bool polish(const QpProblem& problem, const ReducedProblem& r, const ScaledProblem& s, const Iterate& it,
            Solution& sol) {
  const auto n = s.P.rows();
  const auto m = s.A.rows();
  std::vector<Eigen::Index> active;
  std::vector<double> targets;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (it.z[i] - s.lower[i] < -it.y[i]) {
      active.push_back(i);
      targets.push_back(s.lower[i]);
    } else if (s.upper[i] - it.z[i] < it.y[i]) {
      active.push_back(i);
      targets.push_back(s.upper[i]);
    }
  }
  const auto k = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
  kkt.topLeftCorner(n, n) = s.P;
  Eigen::VectorXd rhs(n + k);
  rhs.head(n) = -s.q;
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto row = s.A.row(active[static_cast<std::size_t>(j)]);
    kkt.block(n + j, 0, 1, n) = row;
    kkt.block(0, n + j, n, 1) = row.transpose();
    rhs[n + j] = targets[static_cast<std::size_t>(j)];
  }
  Eigen::MatrixXd kkt_reg = kkt;
  kkt_reg.topLeftCorner(n, n).diagonal().array() += kPolishDelta;
  kkt_reg.bottomRightCorner(k, k).diagonal().array() -= kPolishDelta;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt_reg);
  Eigen::VectorXd v = lu.solve(rhs);
  for (int step = 0; step < kRefineSteps; ++step) v += lu.solve(rhs - kkt * v);
  if (!v.allFinite()) return false;

  Iterate polished{v.head(n), s.A * v.head(n), Eigen::VectorXd::Zero(m)};
  for (Eigen::Index j = 0; j < k; ++j) polished.y[active[static_cast<std::size_t>(j)]] = v[n + j];
  Solution candidate;
  expand(problem, r, s, polished, candidate);

  const double violation = max_violation(problem, candidate.p);
  if (violation > std::max(max_violation(problem, sol.p), 1e-9)) return false;
  const double cost = quadratic_cost(problem.Q, candidate.p);
  const double admm_cost = quadratic_cost(problem.Q, sol.p);
  if (cost > admm_cost + 1e-4 * std::abs(admm_cost) + 1e-12) return false;

  sol.p = std::move(candidate.p);
  sol.y = std::move(candidate.y);
  sol.primal_residual = std::max(violation, 0.0);
  sol.dual_residual =
      inf_norm(s.D.cwiseInverse().cwiseProduct(s.P * polished.x + s.q + s.A.transpose() * polished.y)) / s.c;
  sol.polished = true;
  return true;
}

}  // namespace

void SolverSettings::validate() const {
  if (!(rho > 0.0) || !(sigma > 0.0) || !(eps_abs > 0.0) || !(eps_rel > 0.0) || max_iters <= 0 ||
      check_interval <= 0 || scaling_iters < 0) {
    throw ValidationError("solver: settings must be positive");
  }
  if (!(alpha > 0.0 && alpha < 2.0)) throw ValidationError("solver: alpha must lie in (0, 2)");
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::solved:
      return "solved";
    case SolveStatus::max_iters:
      return "max_iters";
    case SolveStatus::primal_infeasible:
      return "primal_infeasible";
  }
  return "unknown";
}

double quadratic_cost(const Eigen::MatrixXd& Q, const Eigen::VectorXd& p) { return p.dot(Q * p); }

Solution solve(const QpProblem& problem, const SolverSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  settings.validate();
  const auto n_full = problem.Q.rows();
  const auto m_full = problem.A.rows();
  if (problem.Q.cols() != n_full || problem.A.cols() != n_full || problem.lower.size() != m_full ||
      problem.upper.size() != m_full) {
    throw ValidationError("solver: inconsistent problem dimensions");
  }
  if (((problem.lower - problem.upper).array() > 0.0).any()) throw ValidationError("solver: lower > upper");

  const ReducedProblem reduced = reduce(problem);
  const ScaledProblem s = equilibrate(reduced, settings.scaling_iters);
  const auto n = s.P.rows();
  const auto m = s.A.rows();
  const double rho = settings.rho;
  const double sigma = settings.sigma;
  const double alpha = settings.alpha;

  Eigen::MatrixXd kkt = s.P;
  kkt.noalias() += rho * s.A.transpose() * s.A;
  kkt.diagonal().array() += sigma;
  const Eigen::LLT<Eigen::MatrixXd> factor(kkt);
  if (factor.info() != Eigen::Success) throw std::runtime_error("solver: factorization failed");

  Iterate cur{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m)};
  Eigen::VectorXd x_tilde(n);
  Eigen::VectorXd z_relaxed(m);

  Solution sol;
  Iterate best = cur;
  Residuals best_res = residuals(s, settings, cur.x, cur.z, cur.y);
  double best_score = std::numeric_limits<double>::infinity();
  double last_primal = std::numeric_limits<double>::infinity();
  int stalled = 0;

  int iter = 0;
  while (iter < settings.max_iters) {
    ++iter;
    x_tilde = factor.solve(sigma * cur.x - s.q + s.A.transpose() * (rho * cur.z - cur.y));
    cur.x = alpha * x_tilde + (1.0 - alpha) * cur.x;
    z_relaxed = alpha * (s.A * x_tilde) + (1.0 - alpha) * cur.z;
    cur.z = (z_relaxed + cur.y / rho).cwiseMax(s.lower).cwiseMin(s.upper);
    cur.y += rho * (z_relaxed - cur.z);

    if (iter % settings.check_interval != 0 && iter != settings.max_iters) continue;
    const Residuals r = residuals(s, settings, cur.x, cur.z, cur.y);
    if (r.converged() || r.score() < best_score) {
      best_score = r.score();
      best_res = r;
      best = cur;
    }
    if (r.converged()) {
      sol.status = SolveStatus::solved;
      break;
    }
    if (r.primal > kStallFactor * settings.eps_abs && r.primal >= 0.99 * last_primal) {
      if (++stalled >= kStallChecks) {
        sol.status = SolveStatus::primal_infeasible;
        break;
      }
    } else {
      stalled = 0;
    }
    last_primal = r.primal;
  }

  sol.iterations = iter;
  expand(problem, reduced, s, best, sol);
  sol.primal_residual = std::max(best_res.primal, max_violation(problem, sol.p));
  sol.dual_residual = best_res.dual;
  if (sol.status == SolveStatus::solved && settings.polish) polish(problem, reduced, s, best, sol);
  sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

Eigen::VectorXd solve_kkt_equality(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& A_eq,
                                   const Eigen::VectorXd& b_eq) {
  const auto n = Q.rows();
  const auto m = A_eq.rows();
  if (Q.cols() != n || A_eq.cols() != n || b_eq.size() != m) throw ValidationError("kkt: dimension mismatch");

  // Row normalization and cost scaling leave the minimizer unchanged.
  Eigen::VectorXd row_scale(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double norm = A_eq.row(i).norm();
    if (norm == 0.0) throw ValidationError("kkt: zero constraint row");
    row_scale[i] = 1.0 / norm;
  }
  const double q_norm = std::max(Q.cwiseAbs().maxCoeff(), 1e-300);

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
  kkt.topLeftCorner(n, n) = 2.0 * Q / q_norm;
  kkt.topRightCorner(n, m) = (row_scale.asDiagonal() * A_eq).transpose();
  kkt.bottomLeftCorner(m, n) = row_scale.asDiagonal() * A_eq;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
  rhs.tail(m) = row_scale.cwiseProduct(b_eq);

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) throw ValidationError("kkt: singular system (rank-deficient constraints)");
  Eigen::VectorXd sol = lu.solve(rhs);
  sol += lu.solve(rhs - kkt * sol);
  return sol.head(n);
}

}  // namespace rtmotion
