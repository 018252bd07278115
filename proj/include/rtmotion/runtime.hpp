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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rtmotion/planner.hpp"

namespace rtmotion {

/// A tick at a time earlier than the previous tick. The session stays failed.
class ClockRegression : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Kinematic stand-in for the driver plus encoder readback.
class SimArm {
 public:
  /// tracking_lag: first-order time constant in seconds, 0 = exact copy.
  /// noise_std: Gaussian noise added to the reported encoder q, radians.
  SimArm(ChainConfig chain, const RobotState& initial, double tracking_lag = 0.0, double noise_std = 0.0,
         std::uint64_t seed = 0);

  /// Advances the encoder toward `reference` over dt seconds and returns it.
  const RobotState& advance(const RobotState& reference, double dt);

  const RobotState& encoder_state() const { return encoder_; }
  const ChainConfig& chain() const { return chain_; }
  double tracking_lag() const { return lag_; }

 private:
  ChainConfig chain_;
  double lag_;
  double noise_std_;
  std::mt19937_64 rng_;
  RobotState filtered_;  // noise-free filter state
  RobotState encoder_;
};

struct TelemetryRecord {
  double t = 0.0;
  RobotState reference;
  RobotState encoder;
  Pose ee_pose_ref;
  Pose ee_pose_enc;
  std::string active_request_id;
};

struct SessionOptions {
  double tracking_lag = 0.0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  PlannerSettings planner;
  /// Keep every record in memory; the live service turns this off.
  bool keep_log = true;
};

/// One robot: an atomically replaceable plan handle read by the dispatcher
/// and written by request intake.
class Session {
 public:
  using Listener = std::function<void(const TelemetryRecord&)>;

  Session(ChainConfig chain, const RobotState& initial, SessionOptions options = {});

  /// Plans (idle) or preempts (active) at receipt time t_now. The new plan is
  /// installed only on success; on any exception the active plan is untouched.
  std::shared_ptr<const Plan> submit(const PlanRequest& request, double t_now);

  /// Reference at t from the current plan (or the initial rest state), advances
  /// the arm, records and returns the record. Throws ClockRegression.
  TelemetryRecord tick(double t);

  std::shared_ptr<const Plan> active_plan() const;
  /// Reference the dispatcher would produce at t without side effects.
  RobotState commanded(double t) const;

  void set_listener(Listener listener);
  std::vector<TelemetryRecord> log() const;
  const ChainConfig& chain() const { return chain_; }
  const SessionOptions& options() const { return options_; }

 private:
  std::shared_ptr<const Plan> plan_handle() const;
  RobotState reference_from(const std::shared_ptr<const Plan>& plan, double t) const;

  ChainConfig chain_;
  SessionOptions options_;
  RobotState initial_;

  mutable std::mutex plan_mutex_;
  std::shared_ptr<const Plan> plan_;

  std::mutex intake_mutex_;  // serializes submit()

  mutable std::mutex log_mutex_;
  std::vector<TelemetryRecord> log_;
  Listener listener_;

  SimArm arm_;
  std::optional<double> last_tick_;
  bool failed_ = false;
};

/// Wall-clock dispatch thread ticking a session at its control frequency.
class Dispatcher {
 public:
  explicit Dispatcher(Session& session);
  ~Dispatcher();
  Dispatcher(const Dispatcher&) = delete;
  Dispatcher& operator=(const Dispatcher&) = delete;

  void start();
  void stop();
  /// Seconds since start() on the dispatcher's clock.
  double now() const;
  /// Largest lateness of a tick behind its schedule, seconds.
  double max_jitter() const { return max_jitter_.load(); }
  std::uint64_t ticks() const { return ticks_.load(); }

 private:
  void run();

  Session& session_;
  std::thread thread_;
  std::atomic<bool> running_{false};
  std::atomic<double> max_jitter_{0.0};
  std::atomic<std::uint64_t> ticks_{0};
  std::chrono::steady_clock::time_point start_;
};

}  // namespace rtmotion
