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

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace rtmotion {

inline constexpr int kDefaultDegree = 5;
inline constexpr int kMinDegree = 4;
inline constexpr int kMaxDerivative = 3;

/// k-th derivative of [1, u, u^2, ..., u^L] with respect to u.
Eigen::RowVectorXd basis_row(int degree, double u, int derivative);

/// One polynomial piece over normalized time u = (t - start_time) / duration.
struct Segment {
  Eigen::VectorXd coeffs;
  double start_time = 0.0;
  double duration = 1.0;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  double end_time() const { return start_time + duration; }
};

/// k-th time derivative of a segment at absolute time t (chain rule applied).
double eval_segment(const Segment& seg, double t, int derivative);

struct JointSample {
  double q = 0.0;
  double qd = 0.0;
  double qdd = 0.0;
};

/// Contiguous sequence of segments for one joint, holding the final
/// position with zero velocity and acceleration after the last segment.
class JointTrajectory {
 public:
  JointTrajectory() = default;
  explicit JointTrajectory(std::vector<Segment> segments);

  /// Builds segments from a stacked coefficient vector (L+1 per segment).
  static JointTrajectory from_coefficients(const Eigen::VectorXd& stacked, int degree,
                                           const std::vector<double>& durations);

  const std::vector<Segment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  double total_time() const;

  /// Index of the segment that owns time t; boundary times go to the later segment.
  std::size_t segment_index(double t) const;

  JointSample eval(double t) const;
  double jerk(double t) const;

 private:
  std::vector<Segment> segments_;
};

/// Samples trajectories at the control rate and writes
/// `t,q0,qd0,qdd0,q1,...` rows covering [0, total_time].
void write_trajectory_csv(std::ostream& out, const std::vector<JointTrajectory>& joints,
                          double control_frequency);

}  // namespace rtmotion
