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

#include "rtmotion/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "rtmotion/errors.hpp"
#include "rtmotion/wire.hpp"

namespace rtmotion {

namespace {

constexpr double kRestTol = 1e-6;
constexpr double kLimitTol = 1e-6;
constexpr double kTimeSlack = 1e-9;

Eigen::Vector3d vec3(const nlohmann::json& j) {
  const auto a = j.get<std::array<double, 3>>();
  return {a[0], a[1], a[2]};
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  return 0.5 * (hi + *std::max_element(v.begin(), mid));
}

double state_jump(const RobotState& a, const RobotState& b) {
  return std::max({(a.q - b.q).cwiseAbs().maxCoeff(), (a.qd - b.qd).cwiseAbs().maxCoeff(),
                   (a.qdd - b.qdd).cwiseAbs().maxCoeff()});
}

bool bit_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && std::equal(a.data(), a.data() + a.size(), b.data());
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(9) << v;
  return s.str();
}

enum class Kind { event, chase, teleop };

struct Action {
  double t = 0.0;
  std::size_t order = 0;
  Kind kind = Kind::event;
  std::size_t index = 0;  // event index, chase observation number, or master row
};

struct Target {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double since = 0.0;

  Eigen::Vector3d at(double t) const { return position + velocity * (t - since); }
};

class Runner {
 public:
  Runner(const ScenarioScript& script, const ScenarioOptions& options)
      : script_(script),
        options_(options),
        session_(script.chain, RobotState::at_rest(script.initial_q), session_options(script, options)) {
    target_.position = script.target_position;
  }

  ScenarioResult run() {
    const std::vector<Action> actions = schedule();
    const auto ticks = static_cast<long>(std::floor(script_.end_time * script_.fc + kTimeSlack));
    std::size_t next = 0;
    for (long k = 0; k <= ticks; ++k) {
      const double t = static_cast<double>(k) / script_.fc;
      while (next < actions.size() && actions[next].t <= t + kTimeSlack) perform(actions[next++]);
      session_.tick(t);
    }
    while (next < actions.size()) perform(actions[next++]);

    ScenarioResult result;
    result.log = session_.log();
    result.requests = requests_;
    result.events = events_;
    result.report = report(result.log);
    return result;
  }

 private:
  static SessionOptions session_options(const ScenarioScript& script, const ScenarioOptions& options) {
    SessionOptions s;
    s.tracking_lag = script.tracking_lag;
    s.noise_std = script.noise_std;
    s.seed = options.seed;
    s.planner = options.planner;
    return s;
  }

  std::vector<Action> schedule() {
    std::vector<Action> actions;
    std::size_t order = 0;
    for (std::size_t i = 0; i < script_.events.size(); ++i) {
      actions.push_back({script_.events[i].t, order++, Kind::event, i});
    }
    if (script_.chase) {
      const auto& c = *script_.chase;
      for (std::size_t m = 0;; ++m) {
        const double t = c.start + static_cast<double>(m) * c.period;
        if (t > script_.end_time + kTimeSlack) break;
        actions.push_back({t, order++, Kind::chase, m});
      }
    }
    if (script_.teleop) {
      const auto& tp = *script_.teleop;
      const double jitter = options_.jitter_ms.value_or(tp.jitter_ms) * 1e-3;
      std::mt19937_64 rng(options_.seed);
      std::uniform_real_distribution<double> delay(-jitter, jitter);
      for (std::size_t k = static_cast<std::size_t>(tp.buffer) - 1; k < tp.master.size(); ++k) {
        const double noise = jitter > 0.0 ? delay(rng) : 0.0;
        actions.push_back({std::max(0.0, tp.master[k][0] + noise), order++, Kind::teleop, k});
      }
    }
    std::stable_sort(actions.begin(), actions.end(), [](const Action& a, const Action& b) {
      return a.t < b.t || (a.t == b.t && a.order < b.order);
    });
    return actions;
  }

  void perform(const Action& a) {
    switch (a.kind) {
      case Kind::event:
        perform_event(script_.events[a.index], a.t);
        break;
      case Kind::chase:
        observe(a.index, a.t);
        break;
      case Kind::teleop:
        stream(a.index, a.t);
        break;
    }
  }

  void perform_event(const ScenarioEvent& e, double t) {
    if (e.action == "send_request") {
      PlanRequest r;
      r.request_id = e.body.value("id", "request@" + fmt(t));
      r.waypoints = wire::waypoints_from_json(e.body.at("waypoints"));
      const std::string expect = e.body.value("expect", std::string{});
      const RequestRecord& rec = submit(r, t);
      if (!expect.empty() && (expect == "accepted") != rec.accepted) {
        throw ScenarioFailure("scenario " + script_.name + ": request '" + r.request_id + "' at t=" + fmt(t) +
                              " expected " + expect + (rec.accepted ? ", was accepted" : ", rejected: " + rec.detail));
      }
    } else if (e.action == "move_target") {
      target_.position = target_.at(t);
      target_.velocity = vec3(e.body.at("velocity"));
      target_.since = t;
      events_.emplace_back(t, "target velocity " + e.body.at("velocity").dump());
    } else if (e.action == "assert") {
      check(e.body, t);
    } else {
      throw ScenarioFailure("scenario: unknown action '" + e.action + "'");
    }
  }

  void check(const nlohmann::json& body, double t) {
    const std::string what = body.at("check").get<std::string>();
    const RobotState s = session_.commanded(t);
    const Pose pose = forward_kinematics(script_.chain, s.q);
    std::string failure;
    if (what == "at_rest") {
      const double worst = std::max(s.qd.cwiseAbs().maxCoeff(), s.qdd.cwiseAbs().maxCoeff());
      if (worst > kRestTol) failure = "not at rest, max |qd|,|qdd| = " + fmt(worst);
    } else if (what == "ee_near" || what == "ee_near_target") {
      const Eigen::Vector3d goal = what == "ee_near" ? vec3(body.at("position"))
                                                     : Eigen::Vector3d(target_.at(t) + script_.chase.value().offset);
      const double err = (pose.translation - goal).norm();
      if (err > body.at("tol").get<double>()) failure = "end effector " + fmt(err) + " m from goal";
    } else {
      throw ScenarioFailure("scenario: unknown check '" + what + "'");
    }
    if (!failure.empty()) {
      throw ScenarioFailure("scenario " + script_.name + ": assert " + what + " at t=" + fmt(t) + ": " + failure);
    }
    events_.emplace_back(t, "assert " + what + " ok");
  }

  void observe(std::size_t m, double t) {
    const ChaseSpec& c = *script_.chase;
    if (grasped_) return;
    const Eigen::Vector3d seen = target_.at(t);
    if (last_seen_ && (seen - *last_seen_).norm() < c.grasp_threshold) {
      grasped_ = true;
      grasp_time_ = t;
      events_.emplace_back(t, "grasp");
      return;
    }
    last_seen_ = seen;
    const Eigen::Vector3d goal = seen + c.offset;
    PlanRequest r;
    r.request_id = "chase-" + std::to_string(m);
    r.waypoints.push_back({Pose{goal, c.rpy}, c.duration});
    const RequestRecord& rec = submit(r, t);
    if (!rec.accepted) {
      throw ScenarioFailure("scenario " + script_.name + ": chase request at t=" + fmt(t) + " rejected: " + rec.detail);
    }
  }

  void stream(std::size_t k, double t) {
    const TeleopSpec& tp = *script_.teleop;
    PlanRequest r;
    r.request_id = "teleop-" + std::to_string(k);
    for (std::size_t i = k + 1 - static_cast<std::size_t>(tp.buffer); i <= k; ++i) {
      const auto& row = tp.master[i];
      r.waypoints.push_back({Pose::from_array({row[1], row[2], row[3], row[4], row[5], row[6]}), tp.segment});
    }
    const RequestRecord& rec = submit(r, t);
    if (!rec.accepted) {
      throw ScenarioFailure("scenario " + script_.name + ": teleop request at t=" + fmt(t) + " rejected: " + rec.detail);
    }
  }

  const RequestRecord& submit(const PlanRequest& r, double t) {
    RequestRecord rec;
    rec.id = r.request_id;
    rec.t_receipt = t;
    double arrival = t;
    for (const auto& w : r.waypoints) {
      arrival += w.duration;
      rec.targets.push_back({w.pose.translation.x(), w.pose.translation.y(), w.pose.translation.z()});
      rec.target_times.push_back(arrival);
    }
    const std::shared_ptr<const Plan> old = session_.active_plan();
    const RobotState before = session_.commanded(t);
    try {
      const std::shared_ptr<const Plan> p = session_.submit(r, t);
      rec.accepted = true;
      rec.preempted = old && t < old->epoch + old->duration() - kTimeSlack;
      rec.qp_time = p->qp_time;
      rec.iterations = p->max_iterations;
      rec.junction_jump = state_jump(reference_state(*p, p->epoch), before);
      plans_.push_back(p);
    } catch (const std::exception& e) {
      rec.reason = wire::rejection_reason(e);
      rec.detail = e.what();
    }
    requests_.push_back(std::move(rec));
    return requests_.back();
  }

  nlohmann::json report(const std::vector<TelemetryRecord>& log) const {
    const ChainConfig& chain = script_.chain;
    const auto dof = static_cast<Eigen::Index>(chain.dof());
    nlohmann::json r;
    r["scenario"] = script_.name;
    r["fc"] = script_.fc;
    r["ticks"] = log.size();
    r["end_time"] = log.empty() ? 0.0 : log.back().t;

    std::size_t accepted = 0;
    std::size_t preemptions = 0;
    double max_jump = 0.0;
    std::vector<double> solve_times;
    int max_iterations = 0;
    for (const auto& q : requests_) {
      if (!q.accepted) continue;
      ++accepted;
      preemptions += q.preempted ? 1 : 0;
      max_jump = std::max(max_jump, q.junction_jump);
      solve_times.push_back(q.qp_time);
      max_iterations = std::max(max_iterations, q.iterations);
    }
    r["requests"] = {{"sent", requests_.size()},
                     {"accepted", accepted},
                     {"rejected", requests_.size() - accepted},
                     {"preemptions", preemptions}};

    double junction = 0.0;
    double terminal = 0.0;
    double pass_through = 0.0;
    for (const auto& p : plans_) {
      junction = std::max(junction, max_junction_discontinuity(*p));
      terminal = std::max(terminal, terminal_residual(*p));
      pass_through = std::max(pass_through, pass_through_residual(*p));
    }
    r["max_junction_discontinuity"] = std::max(junction, max_jump);
    r["max_preemption_jump"] = max_jump;
    r["max_terminal_residual"] = terminal;
    r["max_pass_through_residual"] = pass_through;
    r["max_iterations"] = max_iterations;
    r["solve_time_s"] = {
        {"median", median(solve_times)},
        {"max", solve_times.empty() ? 0.0 : *std::max_element(solve_times.begin(), solve_times.end())}};

    std::size_t violations = 0;
    double v_ratio = 0.0;
    double a_ratio = 0.0;
    double step_ratio = 0.0;
    bool encoder_exact = true;
    for (std::size_t k = 0; k < log.size(); ++k) {
      const RobotState& s = log[k].reference;
      for (Eigen::Index j = 0; j < dof; ++j) {
        if (std::abs(s.qd[j]) > chain.v_max[j] + kLimitTol || std::abs(s.qdd[j]) > chain.a_max[j] + kLimitTol) {
          ++violations;
        }
        v_ratio = std::max(v_ratio, std::abs(s.qd[j]) / chain.v_max[j]);
        a_ratio = std::max(a_ratio, std::abs(s.qdd[j]) / chain.a_max[j]);
        if (k > 0) {
          const double dq = std::abs(s.q[j] - log[k - 1].reference.q[j]);
          step_ratio = std::max(step_ratio, dq / (chain.v_max[j] / script_.fc));
        }
      }
      encoder_exact = encoder_exact && bit_equal(s.q, log[k].encoder.q) && bit_equal(s.qd, log[k].encoder.qd) &&
                      bit_equal(s.qdd, log[k].encoder.qdd);
    }
    r["limit_violations"] = violations;
    r["max_velocity_ratio"] = v_ratio;
    r["max_acceleration_ratio"] = a_ratio;
    r["max_step_ratio"] = step_ratio;
    r["encoder_matches_reference"] = encoder_exact;

    if (!log.empty()) {
      const RobotState& last = log.back().reference;
      const Eigen::Vector3d pos = log.back().ee_pose_ref.translation;
      r["final"] = {{"t", log.back().t},
                    {"max_abs_qd", last.qd.cwiseAbs().maxCoeff()},
                    {"max_abs_qdd", last.qdd.cwiseAbs().maxCoeff()},
                    {"position", {pos.x(), pos.y(), pos.z()}}};
    }

    if (!script_.ideal_path.is_null()) r["path_deviation_m"] = path_deviation(log);
    if (script_.chase) {
      r["grasp_time_s"] = grasp_time_ ? nlohmann::json(*grasp_time_) : nlohmann::json(nullptr);
      const Eigen::Vector3d goal = target_.at(script_.end_time) + script_.chase->offset;
      r["final_target_error_m"] = log.empty() ? 0.0 : (log.back().ee_pose_ref.translation - goal).norm();
    }
    if (script_.teleop) r["pipeline_delay_s"] = fit_pipeline_delay(log, script_.teleop->master);

    nlohmann::json ev = nlohmann::json::array();
    for (const auto& [t, what] : events_) ev.push_back({{"t", t}, {"event", what}});
    r["events"] = ev;
    return r;
  }

  double path_deviation(const std::vector<TelemetryRecord>& log) const {
    const nlohmann::json& path = script_.ideal_path;
    const std::string type = path.at("type").get<std::string>();
    double worst = 0.0;
    if (type == "polyline") {
      std::vector<Eigen::Vector3d> points;
      for (const auto& p : path.at("points")) points.push_back(vec3(p));
      for (const auto& rec : log) worst = std::max(worst, distance_to_polyline(rec.ee_pose_ref.translation, points));
    } else if (type == "circle") {
      const Eigen::Vector3d center = vec3(path.at("center"));
      const Eigen::Vector3d normal = vec3(path.at("normal")).normalized();
      const double radius = path.at("radius").get<double>();
      for (const auto& rec : log) {
        const Eigen::Vector3d d = rec.ee_pose_ref.translation - center;
        const double h = d.dot(normal);
        const double rho = (d - h * normal).norm();
        worst = std::max(worst, std::hypot(rho - radius, h));
      }
    } else {
      throw ScenarioFailure("scenario: unknown ideal_path type '" + type + "'");
    }
    return worst;
  }

  const ScenarioScript& script_;
  const ScenarioOptions& options_;
  Session session_;
  Target target_;
  std::optional<Eigen::Vector3d> last_seen_;
  bool grasped_ = false;
  std::optional<double> grasp_time_;
  std::vector<RequestRecord> requests_;
  std::vector<std::shared_ptr<const Plan>> plans_;
  std::vector<std::pair<double, std::string>> events_;
};

}  // namespace

std::vector<std::array<double, 7>> load_master_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioFailure("scenario: cannot open master log " + path);
  std::vector<std::array<double, 7>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 7> row{};
    std::istringstream fields(line);
    std::string cell;
    for (double& v : row) {
      if (!std::getline(fields, cell, ',')) throw ScenarioFailure("scenario: short row in " + path);
      v = std::stod(cell);
    }
    if (!rows.empty() && row[0] <= rows.back()[0]) {
      throw ScenarioFailure("scenario: master log timestamps must increase");
    }
    rows.push_back(row);
  }
  return rows;
}

ScenarioScript scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  ScenarioScript s;
  try {
    s.name = j.value("name", std::string("scenario"));
    s.chain = load_chain((base_dir / j.at("chain").get<std::string>()).string());
    s.fc = j.value("fc", s.chain.control_frequency);
    s.chain.control_frequency = s.fc;
    s.end_time = j.at("end_time").get<double>();
    s.initial_q = s.chain.home;
    if (j.contains("initial_q")) {
      const auto q = j.at("initial_q").get<std::vector<double>>();
      s.initial_q = Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size()));
    }
    s.tracking_lag = j.value("tracking_lag", 0.0);
    s.noise_std = j.value("noise_std", 0.0);
    for (const auto& e : j.value("events", nlohmann::json::array())) {
      s.events.push_back({e.at("t").get<double>(), e.at("action").get<std::string>(), e});
    }
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.t < b.t; });
    if (j.contains("ideal_path")) s.ideal_path = j.at("ideal_path");
    if (j.contains("target")) s.target_position = vec3(j.at("target").at("position"));
    if (j.contains("chase")) {
      const auto& c = j.at("chase");
      ChaseSpec spec;
      spec.start = c.value("start", 0.0);
      spec.period = c.at("period").get<double>();
      spec.duration = c.at("duration").get<double>();
      spec.offset = vec3(c.at("offset"));
      spec.rpy = vec3(c.at("rpy"));
      spec.grasp_threshold = c.value("grasp_threshold", spec.grasp_threshold);
      if (!(spec.period > 0.0)) throw ScenarioFailure("scenario: chase period must be > 0");
      s.chase = spec;
    }
    if (j.contains("teleop")) {
      const auto& t = j.at("teleop");
      TeleopSpec spec;
      spec.master = load_master_log((base_dir / t.at("master").get<std::string>()).string());
      spec.rate = t.value("rate", spec.rate);
      spec.buffer = t.value("buffer", spec.buffer);
      spec.segment = t.value("segment", spec.segment);
      spec.jitter_ms = t.value("jitter_ms", 0.0);
      if (spec.buffer < 1 || static_cast<std::size_t>(spec.buffer) > spec.master.size()) {
        throw ScenarioFailure("scenario: teleop buffer must be between 1 and the master log length");
      }
      s.teleop = std::move(spec);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioFailure(std::string("scenario: ") + e.what());
  }
  if (!(s.end_time >= 0.0) || !(s.fc > 0.0)) throw ScenarioFailure("scenario: end_time and fc must be positive");
  return s;
}

ScenarioScript load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioFailure("scenario: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioFailure("scenario: " + path + ": " + e.what());
  }
  return scenario_from_json(j, std::filesystem::path(path).parent_path());
}

ScenarioResult run_scenario(const ScenarioScript& script, const ScenarioOptions& options) {
  Runner runner(script, options);
  return runner.run();
}

double distance_to_polyline(const Eigen::Vector3d& p, const std::vector<Eigen::Vector3d>& points) {
  if (points.empty()) return std::numeric_limits<double>::infinity();
  double best = (p - points.front()).norm();
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const Eigen::Vector3d ab = points[i + 1] - points[i];
    const double len2 = ab.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((p - points[i]).dot(ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (p - (points[i] + s * ab)).norm());
  }
  return best;
}

double fit_pipeline_delay(const std::vector<TelemetryRecord>& log, const std::vector<std::array<double, 7>>& master,
                          double max_lag, double step) {
  if (master.size() < 2 || log.empty()) return 0.0;
  auto master_at = [&](double tau) {
    const auto it = std::upper_bound(master.begin(), master.end(), tau,
                                     [](double v, const std::array<double, 7>& row) { return v < row[0]; });
    const std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - master.begin()), 1, master.size() - 1);
    const auto& a = master[i - 1];
    const auto& b = master[i];
    const double w = (tau - a[0]) / (b[0] - a[0]);
    return Eigen::Vector3d((1 - w) * a[1] + w * b[1], (1 - w) * a[2] + w * b[2], (1 - w) * a[3] + w * b[3]);
  };
  // Skip the first buffer-fill interval; the master trace leaves rest there.
  const double lo = master.front()[0] + 0.2;
  const double hi = master.back()[0];
  double best_lag = 0.0;
  double best_err = std::numeric_limits<double>::infinity();
  for (double lag = 0.0; lag <= max_lag + 1e-12; lag += step) {
    double err = 0.0;
    std::size_t n = 0;
    for (const auto& rec : log) {
      const double tau = rec.t - lag;
      if (tau < lo || tau > hi) continue;
      err += (rec.ee_pose_ref.translation - master_at(tau)).squaredNorm();
      ++n;
    }
    if (n > 0 && err / static_cast<double>(n) < best_err) {
      best_err = err / static_cast<double>(n);
      best_lag = lag;
    }
  }
  return best_lag;
}

void write_log_csv(std::ostream& out, const std::vector<TelemetryRecord>& log) {
  if (log.empty()) return;
  const auto dof = log.front().reference.q.size();
  out << "t,request";
  for (const char* src : {"ref", "enc"}) {
    for (const char* what : {"q", "qd", "qdd"}) {
      for (Eigen::Index j = 0; j < dof; ++j) out << ',' << what << j << '_' << src;
    }
  }
  for (const char* src : {"ref", "enc"}) {
    for (const char* c : {"x", "y", "z", "roll", "pitch", "yaw"}) out << ",ee_" << c << '_' << src;
  }
  out << '\n' << std::setprecision(12);
  for (const auto& rec : log) {
    out << rec.t << ',' << rec.active_request_id;
    for (const RobotState* s : {&rec.reference, &rec.encoder}) {
      for (const Eigen::VectorXd* v : {&s->q, &s->qd, &s->qdd}) {
        for (Eigen::Index j = 0; j < dof; ++j) out << ',' << (*v)[j];
      }
    }
    for (const Pose* p : {&rec.ee_pose_ref, &rec.ee_pose_enc}) {
      for (double v : p->to_array()) out << ',' << v;
    }
    out << '\n';
  }
}

}  // namespace rtmotion
