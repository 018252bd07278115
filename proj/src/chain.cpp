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

#include "rtmotion/chain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "rtmotion/errors.hpp"

namespace rtmotion {

namespace {

constexpr double kMaxDamping = 1e8;
constexpr double kMinDamping = 1e-12;

void check_dims(const ChainConfig& config, const Eigen::VectorXd& q) {
  if (q.size() != config.dof()) {
    throw ValidationError("joint vector has " + std::to_string(q.size()) + " entries, chain has " +
                          std::to_string(config.dof()) + " joints");
  }
  if (!q.allFinite()) throw ValidationError("joint vector is not finite");
}

Eigen::Isometry3d transform_from_json(const nlohmann::json& j) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  if (j.is_null()) return t;
  if (j.contains("xyz")) {
    const auto xyz = j.at("xyz").get<std::array<double, 3>>();
    t.translation() = Eigen::Vector3d(xyz[0], xyz[1], xyz[2]);
  }
  if (j.contains("rpy")) {
    const auto rpy = j.at("rpy").get<std::array<double, 3>>();
    t.linear() = rotation_from_rpy(rpy[0], rpy[1], rpy[2]);
  }
  return t;
}

nlohmann::json transform_to_json(const Eigen::Isometry3d& t) {
  const Eigen::Vector3d xyz = t.translation();
  const Eigen::Vector3d rpy = rpy_from_rotation(t.linear());
  return {{"xyz", {xyz[0], xyz[1], xyz[2]}}, {"rpy", {rpy[0], rpy[1], rpy[2]}}};
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

bool is_rotation(const Eigen::Matrix3d& r) {
  return (r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9 &&
         std::abs(r.determinant() - 1.0) < 1e-9;
}

}  // namespace

Eigen::Matrix3d rotation_from_rpy(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Vector3d rpy_from_rotation(const Eigen::Matrix3d& r) {
  const double sp = std::clamp(-r(2, 0), -1.0, 1.0);
  const double pitch = std::asin(sp);
  if (std::abs(std::cos(pitch)) > 1e-9) {
    return {std::atan2(r(2, 1), r(2, 2)), pitch, std::atan2(r(1, 0), r(0, 0))};
  }
  // Gimbal lock: roll and yaw are coupled, put everything into yaw.
  return {0.0, pitch, std::atan2(-r(0, 1), r(1, 1))};
}

Eigen::Vector3d log_map(const Eigen::Matrix3d& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return aa.axis() * aa.angle();
}

Eigen::Isometry3d Pose::transform() const {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = rotation();
  t.translation() = translation;
  return t;
}

Pose Pose::from_transform(const Eigen::Isometry3d& transform) {
  return Pose{transform.translation(), rpy_from_rotation(transform.linear())};
}

Pose Pose::from_array(const std::array<double, 6>& v) {
  return Pose{Eigen::Vector3d(v[0], v[1], v[2]), Eigen::Vector3d(v[3], v[4], v[5])};
}

std::array<double, 6> Pose::to_array() const {
  return {translation[0], translation[1], translation[2], rpy[0], rpy[1], rpy[2]};
}

bool Pose::is_finite() const { return translation.allFinite() && rpy.allFinite(); }

void ChainConfig::validate() const {
  const auto n = static_cast<std::size_t>(dof());
  if (n < 1) throw ValidationError("chain: dof must be >= 1");
  if (joint_limits.size() != n) throw ValidationError("chain: joint_limits size != dof");
  if (static_cast<std::size_t>(v_max.size()) != n) throw ValidationError("chain: v_max size != dof");
  if (static_cast<std::size_t>(a_max.size()) != n) throw ValidationError("chain: a_max size != dof");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(joint_limits[i].min < joint_limits[i].max)) {
      throw ValidationError("chain: joint " + std::to_string(i) + " limits must satisfy min < max");
    }
    if (!(std::abs(joints[i].axis.norm() - 1.0) < 1e-9)) {
      throw ValidationError("chain: joint " + std::to_string(i) + " axis must be a unit vector");
    }
    if (!is_rotation(joints[i].parent_offset.linear())) {
      throw ValidationError("chain: joint " + std::to_string(i) + " offset rotation is not proper");
    }
  }
  if (!((v_max.array() > 0.0).all() && v_max.allFinite())) throw ValidationError("chain: v_max must be > 0");
  if (!((a_max.array() > 0.0).all() && a_max.allFinite())) throw ValidationError("chain: a_max must be > 0");
  if (!(control_frequency > 0.0) || !std::isfinite(control_frequency)) {
    throw ValidationError("chain: control_frequency must be > 0");
  }
  if (!is_rotation(ee_transform.linear())) throw ValidationError("chain: ee_offset rotation is not proper");
  if (home.size() != 0 && (home.size() != dof() || !within_limits(home))) {
    throw ValidationError("chain: home must have dof entries within joint limits");
  }
}

Eigen::VectorXd ChainConfig::clamp(const Eigen::VectorXd& q) const {
  Eigen::VectorXd out = q;
  for (int i = 0; i < dof(); ++i) {
    out[i] = std::clamp(q[i], joint_limits[i].min, joint_limits[i].max);
  }
  return out;
}

bool ChainConfig::within_limits(const Eigen::VectorXd& q, double slack) const {
  if (q.size() != dof()) return false;
  for (int i = 0; i < dof(); ++i) {
    if (q[i] < joint_limits[i].min - slack || q[i] > joint_limits[i].max + slack) return false;
  }
  return true;
}

ChainConfig chain_from_json(const nlohmann::json& j) {
  ChainConfig c;
  try {
    c.name = j.value("name", std::string{});
    const int dof = j.at("dof").get<int>();
    for (const auto& jj : j.at("joints")) {
      Joint joint;
      const auto axis = jj.at("axis").get<std::array<double, 3>>();
      joint.axis = Eigen::Vector3d(axis[0], axis[1], axis[2]);
      const double norm = joint.axis.norm();
      // Accept axes that are unit up to rounding in the file.
      if (std::abs(norm - 1.0) < 1e-6) joint.axis /= norm;
      joint.parent_offset = transform_from_json(jj.value("offset", nlohmann::json{}));
      c.joints.push_back(joint);
    }
    for (const auto& lim : j.at("joint_limits")) {
      if (lim.is_array()) {
        c.joint_limits.push_back({lim.at(0).get<double>(), lim.at(1).get<double>()});
      } else {
        c.joint_limits.push_back({lim.at("min").get<double>(), lim.at("max").get<double>()});
      }
    }
    c.v_max = vector_from_json(j.at("v_max"));
    c.a_max = vector_from_json(j.at("a_max"));
    c.control_frequency = j.at("control_frequency").get<double>();
    c.ee_transform = transform_from_json(j.value("ee_offset", nlohmann::json{}));
    if (dof != c.dof()) throw ValidationError("chain: dof does not match joints array");
    if (j.contains("home")) c.home = vector_from_json(j.at("home"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("chain: ") + e.what());
  }
  c.validate();
  if (c.home.size() == 0) c.home = c.clamp(Eigen::VectorXd::Zero(c.dof()));
  return c;
}

nlohmann::json chain_to_json(const ChainConfig& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["dof"] = c.dof();
  j["joints"] = nlohmann::json::array();
  for (const auto& joint : c.joints) {
    j["joints"].push_back({{"axis", {joint.axis[0], joint.axis[1], joint.axis[2]}},
                           {"offset", transform_to_json(joint.parent_offset)}});
  }
  j["joint_limits"] = nlohmann::json::array();
  for (const auto& lim : c.joint_limits) j["joint_limits"].push_back({lim.min, lim.max});
  j["v_max"] = std::vector<double>(c.v_max.data(), c.v_max.data() + c.v_max.size());
  j["a_max"] = std::vector<double>(c.a_max.data(), c.a_max.data() + c.a_max.size());
  j["control_frequency"] = c.control_frequency;
  j["ee_offset"] = transform_to_json(c.ee_transform);
  if (c.home.size() != 0) j["home"] = std::vector<double>(c.home.data(), c.home.data() + c.home.size());
  return j;
}

ChainConfig load_chain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("chain: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("chain: " + path + ": " + e.what());
  }
  return chain_from_json(j);
}

Eigen::Isometry3d forward_kinematics_transform(const ChainConfig& config, const Eigen::VectorXd& q) {
  check_dims(config, q);
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (int i = 0; i < config.dof(); ++i) {
    const auto& joint = config.joints[static_cast<std::size_t>(i)];
    t = t * joint.parent_offset;
    t.rotate(Eigen::AngleAxisd(q[i], joint.axis));
  }
  return t * config.ee_transform;
}

Pose forward_kinematics(const ChainConfig& config, const Eigen::VectorXd& q) {
  return Pose::from_transform(forward_kinematics_transform(config, q));
}

Matrix6X jacobian(const ChainConfig& config, const Eigen::VectorXd& q) {
  check_dims(config, q);
  const int n = config.dof();
  std::vector<Eigen::Vector3d> origins(static_cast<std::size_t>(n));
  std::vector<Eigen::Vector3d> axes(static_cast<std::size_t>(n));
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (int i = 0; i < n; ++i) {
    const auto& joint = config.joints[static_cast<std::size_t>(i)];
    t = t * joint.parent_offset;
    origins[static_cast<std::size_t>(i)] = t.translation();
    axes[static_cast<std::size_t>(i)] = t.linear() * joint.axis;
    t.rotate(Eigen::AngleAxisd(q[i], joint.axis));
  }
  const Eigen::Vector3d ee = (t * config.ee_transform).translation();
  Matrix6X jac(6, n);
  for (int i = 0; i < n; ++i) {
    const auto& a = axes[static_cast<std::size_t>(i)];
    jac.block<3, 1>(0, i) = a.cross(ee - origins[static_cast<std::size_t>(i)]);
    jac.block<3, 1>(3, i) = a;
  }
  return jac;
}

Vector6 pose_error(const Eigen::Isometry3d& target, const Eigen::Isometry3d& current) {
  Vector6 e;
  e.head<3>() = target.translation() - current.translation();
  e.tail<3>() = log_map(target.linear() * current.linear().transpose());
  return e;
}

IkResult solve_ik(const ChainConfig& config, const Pose& target, const Eigen::VectorXd& seed,
                  const IkSettings& settings) {
  check_dims(config, seed);
  if (!target.is_finite()) throw ValidationError("ik: target pose is not finite");
  const Eigen::Isometry3d goal = target.transform();
  const int n = config.dof();

  IkResult result;
  result.q = config.clamp(seed);
  Vector6 err = pose_error(goal, forward_kinematics_transform(config, result.q));
  double cost = err.squaredNorm();
  auto done = [&](const Vector6& e) {
    return e.head<3>().norm() <= settings.position_goal && e.tail<3>().norm() <= settings.orientation_goal;
  };

  double lambda = settings.damping;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  while (!done(err) && result.iterations < settings.max_iters) {
    ++result.iterations;
    const Matrix6X jac = jacobian(config, result.q);
    const Eigen::MatrixXd normal = jac.transpose() * jac + lambda * eye;
    const Eigen::VectorXd step = normal.ldlt().solve(jac.transpose() * err);
    const Eigen::VectorXd candidate = config.clamp(result.q + step);
    const Vector6 cand_err = pose_error(goal, forward_kinematics_transform(config, candidate));
    const double cand_cost = cand_err.squaredNorm();
    if (cand_cost < cost) {
      const double moved = (candidate - result.q).norm();
      result.q = candidate;
      err = cand_err;
      cost = cand_cost;
      lambda = std::max(lambda / settings.damping_factor, kMinDamping);
      if (moved < 1e-15) break;
    } else {
      lambda *= settings.damping_factor;
      if (lambda > kMaxDamping) break;
    }
  }

  result.position_error = err.head<3>().norm();
  result.orientation_error = err.tail<3>().norm();
  if (result.position_error > settings.position_tol || result.orientation_error > settings.orientation_tol) {
    throw NoConvergence("ik: no convergence after " + std::to_string(result.iterations) +
                        " iterations (position error " + std::to_string(result.position_error) +
                        " m, orientation error " + std::to_string(result.orientation_error) + " rad)");
  }
  return result;
}

Eigen::VectorXd inverse_kinematics(const ChainConfig& config, const Pose& target,
                                   const Eigen::VectorXd& seed, const IkSettings& settings) {
  return solve_ik(config, target, seed, settings).q;
}

}  // namespace rtmotion
