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
#include <random>

#include "rtmotion/chain.hpp"
#include "rtmotion/errors.hpp"
#include "support.hpp"

using namespace rtmotion;
using testsupport::planar2;
using testsupport::six_dof;

namespace {

constexpr double kPi = std::numbers::pi;

// Rz(yaw) Ry(pitch) Rx(roll) written out with AngleAxis, not the library helper.
Eigen::Matrix3d zyx(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Matrix3d pose_rotation(const Pose& p) { return zyx(p.rpy[0], p.rpy[1], p.rpy[2]); }

// Angle of R_a^T R_b.
double rotation_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return Eigen::AngleAxisd(a.transpose() * b).angle();
}

Matrix6X finite_difference_jacobian(const ChainConfig& c, const Eigen::VectorXd& q, double h) {
  Matrix6X J(6, c.dof());
  for (int j = 0; j < c.dof(); ++j) {
    Eigen::VectorXd qp = q, qm = q;
    qp[j] += h;
    qm[j] -= h;
    const Eigen::Isometry3d Tp = forward_kinematics_transform(c, qp);
    const Eigen::Isometry3d Tm = forward_kinematics_transform(c, qm);
    J.block<3, 1>(0, j) = (Tp.translation() - Tm.translation()) / (2 * h);
    const Eigen::AngleAxisd d(Tp.linear() * Tm.linear().transpose());
    J.block<3, 1>(3, j) = d.axis() * d.angle() / (2 * h);
  }
  return J;
}

}  // namespace

TEST_CASE("planar forward kinematics at hand-computed configurations") {
  const ChainConfig c = planar2();
  const Pose a = forward_kinematics(c, Eigen::Vector2d(0.0, 0.0));
  CHECK((a.translation - Eigen::Vector3d(2, 0, 0)).norm() < 1e-12);
  CHECK(a.rpy.norm() < 1e-12);

  const Pose b = forward_kinematics(c, Eigen::Vector2d(kPi / 2, 0.0));
  CHECK((b.translation - Eigen::Vector3d(0, 2, 0)).norm() < 1e-12);
  CHECK(b.rpy[2] == doctest::Approx(kPi / 2).epsilon(1e-12));

  // Closed form x = cos q1 + cos(q1 + q2), y = sin q1 + sin(q1 + q2).
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd q = testsupport::random_q(c, rng);
    const Pose p = forward_kinematics(c, q);
    CHECK(p.translation.x() == doctest::Approx(std::cos(q[0]) + std::cos(q[0] + q[1])).epsilon(1e-12));
    CHECK(p.translation.y() == doctest::Approx(std::sin(q[0]) + std::sin(q[0] + q[1])).epsilon(1e-12));
    CHECK(rotation_distance(pose_rotation(p), zyx(0, 0, q[0] + q[1])) < 1e-12);
  }
}

TEST_CASE("forward kinematics matches the frozen Rodrigues-product oracle") {
  const nlohmann::json entries = testsupport::read_json("tests/data/fk_oracle.json");
  const ChainConfig p2 = planar2(), s6 = six_dof();
  REQUIRE(entries.size() >= 20);
  for (const auto& e : entries) {
    const ChainConfig& c = e.at("chain") == "planar2" ? p2 : s6;
    const std::vector<double> qv = e.at("q");
    const std::vector<double> pv = e.at("pose");
    const Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(qv.data(), static_cast<Eigen::Index>(qv.size()));
    const Pose got = forward_kinematics(c, q);
    CHECK((got.translation - Eigen::Vector3d(pv[0], pv[1], pv[2])).norm() < 1e-12);
    CHECK(rotation_distance(pose_rotation(got), zyx(pv[3], pv[4], pv[5])) < 1e-9);
  }
}

TEST_CASE("planar Jacobian linear column at the zero configuration") {
  const Matrix6X J = jacobian(planar2(), Eigen::Vector2d::Zero());
  CHECK((J.block<3, 1>(0, 0) - Eigen::Vector3d(0, 2, 0)).norm() < 1e-12);
  CHECK((J.block<3, 1>(0, 1) - Eigen::Vector3d(0, 1, 0)).norm() < 1e-12);
  CHECK((J.block<3, 1>(3, 0) - Eigen::Vector3d::UnitZ()).norm() < 1e-12);
}

TEST_CASE("single revolute joint: angular Jacobian row equals the axis") {
  ChainConfig c;
  c.name = "one";
  Joint j;
  j.axis = Eigen::Vector3d(1, 2, 2).normalized();
  c.joints = {j};
  c.joint_limits = {{-3, 3}};
  c.v_max = Eigen::VectorXd::Constant(1, 1.0);
  c.a_max = Eigen::VectorXd::Constant(1, 1.0);
  c.ee_transform.translation() = Eigen::Vector3d(0.3, 0, 0);
  c.home = Eigen::VectorXd::Zero(1);
  c.validate();
  for (double q : {-1.0, 0.0, 0.7}) {
    const Matrix6X J = jacobian(c, Eigen::VectorXd::Constant(1, q));
    CHECK((J.block<3, 1>(3, 0) - j.axis).norm() < 1e-12);
  }
}

TEST_CASE("Jacobian agrees with central finite differences") {
  std::mt19937_64 rng(5);
  for (const ChainConfig& c : {planar2(), six_dof()}) {
    for (int i = 0; i < 50; ++i) {
      const Eigen::VectorXd q = testsupport::random_q(c, rng);
      const double err = (jacobian(c, q) - finite_difference_jacobian(c, q, 1e-6)).cwiseAbs().maxCoeff();
      CHECK(err <= 1e-5);
    }
  }
}

TEST_CASE("Euler angle conversions") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-kPi + 1e-3, kPi - 1e-3);
  std::uniform_real_distribution<double> pitch(-kPi / 2 + 1e-3, kPi / 2 - 1e-3);
  for (int i = 0; i < 100; ++i) {
    const double r = ang(rng), p = pitch(rng), y = ang(rng);
    CHECK((rotation_from_rpy(r, p, y) - zyx(r, p, y)).cwiseAbs().maxCoeff() < 1e-14);
    const Eigen::Vector3d back = rpy_from_rotation(zyx(r, p, y));
    CHECK(back[0] == doctest::Approx(r).epsilon(1e-9));
    CHECK(back[1] == doctest::Approx(p).epsilon(1e-9));
    CHECK(back[2] == doctest::Approx(y).epsilon(1e-9));
  }
  // At gimbal lock only the rotation is recoverable.
  const Eigen::Matrix3d g = zyx(0.4, kPi / 2, -0.2);
  const Eigen::Vector3d rpy = rpy_from_rotation(g);
  CHECK(rotation_distance(zyx(rpy[0], rpy[1], rpy[2]), g) < 1e-9);

  const Eigen::Vector3d w = Eigen::Vector3d(0.1, -0.4, 0.3);
  const Eigen::Vector3d lw = log_map(Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix());
  CHECK((lw - w).norm() < 1e-12);
}

TEST_CASE("planar IK recovers the cosine-law solution") {
  const ChainConfig c = planar2();
  // Target (1, 1): cos q2 = (x^2 + y^2 - 2) / 2 = 0, elbow-up q2 = pi/2,
  // q1 = atan2(y, x) - atan2(sin q2, 1 + cos q2) = 0.
  const double x = 1.0, y = 1.0;
  const double q2 = std::acos((x * x + y * y - 2.0) / 2.0);
  const double q1 = std::atan2(y, x) - std::atan2(std::sin(q2), 1.0 + std::cos(q2));
  Pose target;
  target.translation = Eigen::Vector3d(x, y, 0);
  target.rpy = Eigen::Vector3d(0, 0, q1 + q2);
  const IkResult r = solve_ik(c, target, Eigen::Vector2d(0.05, 1.2));
  CHECK(r.q[0] == doctest::Approx(q1).epsilon(1e-6));
  CHECK(r.q[1] == doctest::Approx(q2).epsilon(1e-6));
  CHECK(q1 == doctest::Approx(0.0));
  CHECK(q2 == doctest::Approx(kPi / 2));
}

TEST_CASE("IK from a seed that already solves the target returns the seed") {
  const ChainConfig c = six_dof();
  std::mt19937_64 rng(8);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd q = testsupport::random_q(c, rng);
    const IkResult r = solve_ik(c, forward_kinematics(c, q), q);
    CHECK(r.iterations == 0);
    CHECK((r.q - q).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("FK of IK round trip on random reachable targets") {
  const ChainConfig c = six_dof();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> nudge(-0.1, 0.1);
  int converged = 0;
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd q = testsupport::random_q(c, rng);
    Eigen::VectorXd seed = q;
    for (int j = 0; j < c.dof(); ++j) seed[j] += nudge(rng);
    const Pose target = forward_kinematics(c, q);
    const IkResult r = solve_ik(c, target, c.clamp(seed));
    const Pose got = forward_kinematics(c, r.q);
    CHECK(c.within_limits(r.q));
    if ((got.translation - target.translation).norm() <= 1e-4 &&
        rotation_distance(pose_rotation(got), pose_rotation(target)) <= 1e-3) {
      ++converged;
    }
  }
  CHECK(converged == 100);
}

TEST_CASE("IK failures") {
  const ChainConfig c = planar2();
  Pose far;
  far.translation = Eigen::Vector3d(5, 0, 0);
  CHECK_THROWS_AS(solve_ik(c, far, c.home), NoConvergence);

  // Limits clamp every iterate, so a target only reachable outside them fails.
  ChainConfig tight = c;
  tight.joint_limits = {{-0.1, 0.1}, {-0.1, 0.1}};
  tight.home = Eigen::Vector2d::Zero();
  const Pose up = forward_kinematics(c, Eigen::Vector2d(kPi / 2, 0));
  const Eigen::Vector2d seed(0.0, 0.0);
  try {
    const IkResult r = solve_ik(tight, up, seed);
    FAIL("expected NoConvergence, got q = " << r.q.transpose());
  } catch (const NoConvergence&) {
  }
}

TEST_CASE("IK is deterministic") {
  const ChainConfig c = six_dof();
  Pose t = forward_kinematics(c, c.home);
  t.translation += Eigen::Vector3d(0.02, -0.03, 0.01);
  const IkResult a = solve_ik(c, t, c.home), b = solve_ik(c, t, c.home);
  CHECK(a.iterations == b.iterations);
  CHECK((a.q - b.q).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("chain JSON round trip and validation") {
  const ChainConfig c = six_dof();
  const ChainConfig d = chain_from_json(chain_to_json(c));
  REQUIRE(d.dof() == c.dof());
  CHECK(d.name == c.name);
  CHECK((d.home - c.home).cwiseAbs().maxCoeff() == 0.0);
  CHECK((d.v_max - c.v_max).cwiseAbs().maxCoeff() == 0.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd q = testsupport::random_q(c, rng);
    CHECK((forward_kinematics_transform(c, q).matrix() - forward_kinematics_transform(d, q).matrix())
              .cwiseAbs()
              .maxCoeff() < 1e-15);
  }

  const nlohmann::json base = chain_to_json(c);
  auto broken = [&](auto&& edit) {
    nlohmann::json j = base;
    edit(j);
    return j;
  };
  CHECK_THROWS_AS(chain_from_json(broken([](auto& j) { j["joints"][0]["axis"] = {0, 0, 0}; })), ValidationError);
  CHECK_THROWS_AS(chain_from_json(broken([](auto& j) { j["joint_limits"][1] = {1.0, -1.0}; })), ValidationError);
  CHECK_THROWS_AS(chain_from_json(broken([](auto& j) { j["v_max"][2] = 0.0; })), ValidationError);
  CHECK_THROWS_AS(chain_from_json(broken([](auto& j) { j["a_max"] = {1.0, 2.0}; })), ValidationError);
  CHECK_THROWS_AS(chain_from_json(broken([](auto& j) { j["control_frequency"] = -5; })), ValidationError);
  CHECK_THROWS_AS(chain_from_json(broken([](auto& j) { j["home"][0] = 10.0; })), ValidationError);

  nlohmann::json no_home = base;
  no_home.erase("home");
  CHECK(chain_from_json(no_home).home.cwiseAbs().maxCoeff() == 0.0);
}
