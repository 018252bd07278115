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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rtmotion {

/// Malformed or out-of-contract input (dimensions, non-finite values, bad
/// durations, unknown fields).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical IK did not reach tolerance within its iteration budget.
class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// IK failed for one waypoint of a request; the whole request is rejected.
class IkFailure : public std::runtime_error {
 public:
  IkFailure(std::size_t waypoint, const std::string& what)
      : std::runtime_error("ik: waypoint " + std::to_string(waypoint) + ": " + what),
        waypoint_(waypoint) {}
  std::size_t waypoint() const { return waypoint_; }

 private:
  std::size_t waypoint_;
};

/// The per-joint QP did not reach a solved status.
class QpFailure : public std::runtime_error {
 public:
  QpFailure(std::size_t joint, const std::string& what)
      : std::runtime_error("qp: joint " + std::to_string(joint) + ": " + what), joint_(joint) {}
  std::size_t joint() const { return joint_; }

 private:
  std::size_t joint_;
};

}  // namespace rtmotion
