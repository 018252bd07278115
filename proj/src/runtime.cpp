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

#include "rtmotion/runtime.hpp"

#include <algorithm>
#include <utility>

#include "rtmotion/errors.hpp"

namespace rtmotion {

SimArm::SimArm(ChainConfig chain, const RobotState& initial, double tracking_lag, double noise_std,
               std::uint64_t seed)
    : chain_(std::move(chain)), lag_(tracking_lag), noise_std_(noise_std), rng_(seed) {
  if (!(lag_ >= 0.0) || !(noise_std_ >= 0.0)) throw ValidationError("sim: lag and noise must be >= 0");
  const auto n = static_cast<Eigen::Index>(chain_.dof());
  if (initial.q.size() != n) throw ValidationError("sim: initial state dimension does not match chain");
  filtered_ = RobotState::at_rest(chain_.clamp(initial.q), initial.timestamp);
  encoder_ = filtered_;
}

const RobotState& SimArm::advance(const RobotState& reference, double dt) {
  if (lag_ == 0.0) {
    filtered_ = reference;
  } else if (dt > 0.0) {
    const double gain = std::min(1.0, dt / lag_);
    const Eigen::VectorXd q = filtered_.q + (reference.q - filtered_.q) * gain;
    const Eigen::VectorXd qd = (q - filtered_.q) / dt;
    filtered_.qdd = (qd - filtered_.qd) / dt;
    filtered_.qd = qd;
    filtered_.q = q;
  }
  filtered_.timestamp = reference.timestamp;
  encoder_ = filtered_;
  if (noise_std_ > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_std_);
    for (Eigen::Index j = 0; j < encoder_.q.size(); ++j) encoder_.q[j] += noise(rng_);
  }
  encoder_.q = chain_.clamp(encoder_.q);
  return encoder_;
}

Session::Session(ChainConfig chain, const RobotState& initial, SessionOptions options)
    : chain_(std::move(chain)),
      options_(std::move(options)),
      initial_(RobotState::at_rest(initial.q, initial.timestamp)),
      arm_(chain_, initial, options_.tracking_lag, options_.noise_std, options_.seed) {
  chain_.validate();
  if (!chain_.within_limits(initial_.q)) throw ValidationError("session: initial state outside joint limits");
}

std::shared_ptr<const Plan> Session::plan_handle() const {
  const std::lock_guard lock(plan_mutex_);
  return plan_;
}

std::shared_ptr<const Plan> Session::active_plan() const { return plan_handle(); }

RobotState Session::reference_from(const std::shared_ptr<const Plan>& plan, double t) const {
  if (!plan) {
    RobotState s = initial_;
    s.timestamp = t;
    return s;
  }
  // A live tick can read the clock a hair before a fresh plan's receipt time.
  RobotState s = reference_state(*plan, std::max(t, plan->epoch));
  s.timestamp = t;
  return s;
}

RobotState Session::commanded(double t) const { return reference_from(plan_handle(), t); }

std::shared_ptr<const Plan> Session::submit(const PlanRequest& request, double t_now) {
  const std::lock_guard intake(intake_mutex_);
  const std::shared_ptr<const Plan> active = plan_handle();
  std::shared_ptr<const Plan> next;
  if (active) {
    next = std::make_shared<const Plan>(
        preempt(*active, std::max(t_now, active->epoch), request, chain_, options_.planner));
  } else {
    next = std::make_shared<const Plan>(plan(request, chain_, reference_from(nullptr, t_now), options_.planner));
  }
  {
    const std::lock_guard lock(plan_mutex_);
    plan_ = next;
  }
  return next;
}

TelemetryRecord Session::tick(double t) {
  if (failed_) throw ClockRegression("session: failed after an earlier clock regression");
  if (last_tick_ && t < *last_tick_) {
    failed_ = true;
    throw ClockRegression("session: tick at " + std::to_string(t) + " s precedes previous tick at " +
                          std::to_string(*last_tick_) + " s");
  }
  const double dt = last_tick_ ? t - *last_tick_ : 0.0;
  last_tick_ = t;

  // One handle per tick: a record never mixes two plans.
  const std::shared_ptr<const Plan> plan = plan_handle();
  TelemetryRecord rec;
  rec.t = t;
  rec.reference = reference_from(plan, t);
  rec.encoder = arm_.advance(rec.reference, dt);
  rec.ee_pose_ref = forward_kinematics(chain_, rec.reference.q);
  rec.ee_pose_enc = forward_kinematics(chain_, rec.encoder.q);
  if (plan) rec.active_request_id = plan->request_id;

  Listener listener;
  {
    const std::lock_guard lock(log_mutex_);
    if (options_.keep_log) log_.push_back(rec);
    listener = listener_;
  }
  if (listener) listener(rec);
  return rec;
}

void Session::set_listener(Listener listener) {
  const std::lock_guard lock(log_mutex_);
  listener_ = std::move(listener);
}

std::vector<TelemetryRecord> Session::log() const {
  const std::lock_guard lock(log_mutex_);
  return log_;
}

Dispatcher::Dispatcher(Session& session) : session_(session) {}

Dispatcher::~Dispatcher() { stop(); }

void Dispatcher::start() {
  if (running_.exchange(true)) return;
  start_ = std::chrono::steady_clock::now();
  thread_ = std::thread([this] { run(); });
}

void Dispatcher::stop() {
  running_ = false;
  if (thread_.joinable()) thread_.join();
}

double Dispatcher::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

void Dispatcher::run() {
  const double period = 1.0 / session_.chain().control_frequency;
  for (std::uint64_t k = 0; running_; ++k) {
    const double scheduled = static_cast<double>(k) * period;
    const auto deadline = start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                       std::chrono::duration<double>(scheduled));
    std::this_thread::sleep_until(deadline);
    const double late = now() - scheduled;
    if (late > max_jitter_.load()) max_jitter_ = late;
    // Logical tick times stay on the 1/f_c grid; lateness is reported, never skipped.
    session_.tick(scheduled);
    ++ticks_;
  }
}

}  // namespace rtmotion
