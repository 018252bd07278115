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

// Line-delimited JSON protocol. One object per LF-terminated line.
//   request:   {"id", "robot", "type", "waypoints":[{"pose":[x,y,z,roll,pitch,yaw], "duration"}]}
//   ack:       {"id", "status":"accepted"|"rejected", "reason"?, "detail"?}
//   telemetry: {"robot", "t", "q", "qd", "qdd", "pose", "request"}

#include <json.hpp>

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rtmotion/planner.hpp"
#include "rtmotion/runtime.hpp"

namespace rtmotion::wire {

/// Malformed line or schema violation; maps to reason "parse".
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Ack {
  std::string id;
  bool accepted = false;
  std::string reason;  // empty when accepted
  std::string detail;
};

nlohmann::json waypoints_to_json(const std::vector<CartesianWaypoint>& waypoints);
std::vector<CartesianWaypoint> waypoints_from_json(const nlohmann::json& j);
/// Waypoint list file: a JSON array in the request's waypoint schema.
std::vector<CartesianWaypoint> load_waypoints(const std::string& path);

std::string serialize_request(const PlanRequest& request);
PlanRequest parse_request(std::string_view line);

std::string serialize_ack(const Ack& ack);
Ack parse_ack(std::string_view line);

nlohmann::json telemetry_to_json(const std::string& robot, const TelemetryRecord& record);
std::string serialize_telemetry(const std::string& robot, const TelemetryRecord& record);

/// Rejection reason for a planning exception: the failing stage prefix
/// ("duration", "waypoints", "pose", "type", "ik", "qp", ...), or "internal".
/// The full message travels in the ack detail.
std::string rejection_reason(const std::exception& error);

/// Maps robot ids to sessions. Every call yields exactly one ack.
class Router {
 public:
  void add_robot(const std::string& id, Session& session);
  Ack handle_line(std::string_view line, double t_now);
  Ack handle_request(const PlanRequest& request, double t_now);
  Session* find(const std::string& id) const;

 private:
  std::map<std::string, Session*> sessions_;
};

}  // namespace rtmotion::wire
