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

#include "rtmotion/wire.hpp"

#include <fstream>

#include "rtmotion/errors.hpp"

namespace rtmotion::wire {

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

nlohmann::json pose_to_json(const Pose& pose) {
  const auto a = pose.to_array();
  return std::vector<double>(a.begin(), a.end());
}

Pose pose_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 6) throw ParseError("pose must be an array of 6 numbers");
  std::array<double, 6> a{};
  for (std::size_t i = 0; i < 6; ++i) {
    if (!j[i].is_number()) throw ParseError("pose must be an array of 6 numbers");
    a[i] = j[i].get<double>();
  }
  return Pose::from_array(a);
}

std::string string_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {};
  if (!j.at(key).is_string()) throw ParseError(std::string(key) + " must be a string");
  return j.at(key).get<std::string>();
}

}  // namespace

nlohmann::json waypoints_to_json(const std::vector<CartesianWaypoint>& waypoints) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& w : waypoints) out.push_back({{"pose", pose_to_json(w.pose)}, {"duration", w.duration}});
  return out;
}

std::vector<CartesianWaypoint> waypoints_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ParseError("waypoints must be an array");
  std::vector<CartesianWaypoint> out;
  out.reserve(j.size());
  for (const auto& w : j) {
    if (!w.is_object() || !w.contains("pose") || !w.contains("duration")) {
      throw ParseError("waypoint needs pose and duration");
    }
    if (!w.at("duration").is_number()) throw ParseError("duration must be a number");
    out.push_back({pose_from_json(w.at("pose")), w.at("duration").get<double>()});
  }
  return out;
}

std::vector<CartesianWaypoint> load_waypoints(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("waypoints: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return waypoints_from_json(j);
}

std::string serialize_request(const PlanRequest& request) {
  const nlohmann::json j = {{"id", request.request_id},
                            {"robot", request.robot_id},
                            {"type", request.request_type},
                            {"waypoints", waypoints_to_json(request.waypoints)}};
  return j.dump();
}

PlanRequest parse_request(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what());
  }
  if (!j.is_object()) throw ParseError("request must be a JSON object");
  PlanRequest r;
  r.request_id = string_field(j, "id");
  r.robot_id = string_field(j, "robot");
  r.request_type = j.contains("type") ? string_field(j, "type") : std::string(kMoveCartesian);
  if (!j.contains("waypoints")) throw ParseError("missing waypoints");
  r.waypoints = waypoints_from_json(j.at("waypoints"));
  return r;
}

std::string serialize_ack(const Ack& ack) {
  nlohmann::json j = {{"id", ack.id}, {"status", ack.accepted ? "accepted" : "rejected"}};
  if (!ack.accepted) j["reason"] = ack.reason;
  if (!ack.detail.empty()) j["detail"] = ack.detail;
  return j.dump();
}

Ack parse_ack(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  Ack a;
  a.id = j.value("id", std::string{});
  a.accepted = j.at("status").get<std::string>() == "accepted";
  a.reason = j.value("reason", std::string{});
  a.detail = j.value("detail", std::string{});
  return a;
}

nlohmann::json telemetry_to_json(const std::string& robot, const TelemetryRecord& record) {
  return {{"robot", robot},
          {"t", record.t},
          {"q", to_vector(record.reference.q)},
          {"qd", to_vector(record.reference.qd)},
          {"qdd", to_vector(record.reference.qdd)},
          {"pose", pose_to_json(record.ee_pose_ref)},
          {"request", record.active_request_id}};
}

std::string serialize_telemetry(const std::string& robot, const TelemetryRecord& record) {
  return telemetry_to_json(robot, record).dump();
}

std::string rejection_reason(const std::exception& error) {
  // Library errors lead with their stage: "duration: ...", "ik: ...".
  const std::string_view what = error.what();
  const auto colon = what.find(':');
  if (colon == std::string_view::npos || colon == 0) return "internal";
  const std::string_view stage = what.substr(0, colon);
  if (stage.find(' ') != std::string_view::npos) return "internal";
  return std::string(stage);
}

void Router::add_robot(const std::string& id, Session& session) { sessions_[id] = &session; }

Session* Router::find(const std::string& id) const {
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

Ack Router::handle_request(const PlanRequest& request, double t_now) {
  Ack ack;
  ack.id = request.request_id;
  Session* session = find(request.robot_id);
  if (session == nullptr) {
    ack.reason = "unknown robot";
    ack.detail = request.robot_id;
    return ack;
  }
  try {
    session->submit(request, t_now);
    ack.accepted = true;
  } catch (const std::exception& e) {
    ack.reason = rejection_reason(e);
    ack.detail = e.what();
  }
  return ack;
}

Ack Router::handle_line(std::string_view line, double t_now) {
  PlanRequest request;
  try {
    request = parse_request(line);
  } catch (const ParseError& e) {
    Ack ack;
    // Best effort: echo the id when the line is valid JSON.
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.is_object() && j.contains("id") && j.at("id").is_string()) ack.id = j.at("id").get<std::string>();
    } catch (const nlohmann::json::exception&) {
    }
    ack.reason = "parse";
    ack.detail = e.what();
    return ack;
  }
  return handle_request(request, t_now);
}

}  // namespace rtmotion::wire
