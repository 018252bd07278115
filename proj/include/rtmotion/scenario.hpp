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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtmotion/runtime.hpp"

namespace rtmotion {

/// A rejected request the script required, a failed assert, or a bad script.
class ScenarioFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioEvent {
  double t = 0.0;
  std::string action;  // send_request | move_target | assert
  nlohmann::json body;
};

/// Scripted 1 Hz-style pursuit: observe the target every `period`, send one
/// waypoint at target + offset, stop once the target moved less than the
/// grasp threshold between consecutive observations.
struct ChaseSpec {
  double start = 0.0;
  double period = 1.0;
  double duration = 1.5;
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  Eigen::Vector3d rpy = Eigen::Vector3d::Zero();
  double grasp_threshold = 0.002;
};

/// Master pose log replayed as buffered requests: at master row k, the last
/// `buffer` rows are sent with `segment` seconds each.
struct TeleopSpec {
  std::vector<std::array<double, 7>> master;  // t, x, y, z, roll, pitch, yaw
  double rate = 25.0;
  int buffer = 5;
  double segment = 0.04;
  double jitter_ms = 0.0;
};

struct ScenarioScript {
  std::string name;
  ChainConfig chain;
  double fc = 100.0;
  double end_time = 0.0;
  Eigen::VectorXd initial_q;
  double tracking_lag = 0.0;
  double noise_std = 0.0;
  std::vector<ScenarioEvent> events;  // stable-sorted by t
  nlohmann::json ideal_path;          // null when absent
  Eigen::Vector3d target_position = Eigen::Vector3d::Zero();
  std::optional<ChaseSpec> chase;
  std::optional<TeleopSpec> teleop;
};

/// Relative paths in the script resolve against base_dir.
ScenarioScript scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
ScenarioScript load_scenario(const std::string& path);
std::vector<std::array<double, 7>> load_master_log(const std::string& path);

struct ScenarioOptions {
  std::uint64_t seed = 0;
  std::optional<double> jitter_ms;  // overrides the teleop block
  PlannerSettings planner;
};

struct RequestRecord {
  std::string id;
  double t_receipt = 0.0;
  bool accepted = false;
  std::string reason;
  std::string detail;
  bool preempted = false;       // an unfinished plan was replaced
  double qp_time = 0.0;
  int iterations = 0;
  double junction_jump = 0.0;   // new plan start vs old reference at receipt
  std::vector<std::array<double, 3>> targets;  // waypoint positions
  std::vector<double> target_times;            // absolute arrival times
};

struct ScenarioResult {
  std::vector<TelemetryRecord> log;
  std::vector<RequestRecord> requests;
  std::vector<std::pair<double, std::string>> events;
  nlohmann::json report;
};

/// Runs the script on a simulated clock at f_c. Throws ScenarioFailure.
ScenarioResult run_scenario(const ScenarioScript& script, const ScenarioOptions& options = {});

/// Lag in [0, max_lag] minimizing the mean squared distance between the
/// reference end-effector trace and the master trace shifted by the lag.
double fit_pipeline_delay(const std::vector<TelemetryRecord>& log, const std::vector<std::array<double, 7>>& master,
                          double max_lag = 0.5, double step = 1e-3);

/// Distance from p to the polyline through points.
double distance_to_polyline(const Eigen::Vector3d& p, const std::vector<Eigen::Vector3d>& points);

void write_log_csv(std::ostream& out, const std::vector<TelemetryRecord>& log);

}  // namespace rtmotion
