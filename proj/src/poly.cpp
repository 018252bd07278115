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

#include "rtmotion/poly.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "rtmotion/errors.hpp"
#include "rtmotion/kernels.hpp"

namespace rtmotion {

namespace {
// Slack for times computed as sums of durations.
constexpr double kTimeSlack = 1e-9;
}  // namespace

Eigen::RowVectorXd basis_row(int degree, double u, int derivative) {
  if (degree < kMinDegree) throw ValidationError("basis: degree must be >= 4");
  if (!(u >= 0.0 && u <= 1.0)) throw ValidationError("basis: u must lie in [0, 1]");
  if (derivative < 0 || derivative > kMaxDerivative) throw ValidationError("basis: derivative order must be 0..3");
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(degree + 1);
  for (int n = derivative; n <= degree; ++n) {
    double falling = 1.0;  // n * (n-1) * ... * (n-k+1)
    for (int m = 0; m < derivative; ++m) falling *= static_cast<double>(n - m);
    row[n] = falling * std::pow(u, n - derivative);
  }
  return row;
}

double eval_segment(const Segment& seg, double t, int derivative) {
  const double end = seg.end_time();
  const double slack = kTimeSlack * std::max(1.0, std::abs(end));
  if (t < seg.start_time - slack || t > end + slack) throw ValidationError("segment: time outside segment");
  const double u = std::clamp((t - seg.start_time) / seg.duration, 0.0, 1.0);
  // Horner on the derivative coefficients.
  const int degree = seg.degree();
  double acc = 0.0;
  for (int n = degree; n >= derivative; --n) {
    double falling = 1.0;
    for (int m = 0; m < derivative; ++m) falling *= static_cast<double>(n - m);
    acc = acc * u + falling * seg.coeffs[n];
  }
  return acc * std::pow(seg.duration, -derivative);
}

JointTrajectory::JointTrajectory(std::vector<Segment> segments) : segments_(std::move(segments)) {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!(s.duration > 0.0)) throw ValidationError("trajectory: segment duration must be > 0");
    if (s.degree() < kMinDegree) throw ValidationError("trajectory: segment degree must be >= 4");
    if (i > 0 && std::abs(segments_[i - 1].end_time() - s.start_time) >
                     kTimeSlack * std::max(1.0, std::abs(s.start_time))) {
      throw ValidationError("trajectory: segments must be contiguous");
    }
  }
}

JointTrajectory JointTrajectory::from_coefficients(const Eigen::VectorXd& stacked, int degree,
                                                   const std::vector<double>& durations) {
  const auto width = static_cast<Eigen::Index>(degree + 1);
  if (stacked.size() != width * static_cast<Eigen::Index>(durations.size())) {
    throw ValidationError("trajectory: coefficient vector size mismatch");
  }
  std::vector<Segment> segments;
  segments.reserve(durations.size());
  double start = 0.0;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    segments.push_back({stacked.segment(static_cast<Eigen::Index>(i) * width, width), start, durations[i]});
    start += durations[i];
  }
  return JointTrajectory(std::move(segments));
}

double JointTrajectory::total_time() const {
  return segments_.empty() ? 0.0 : segments_.back().end_time();
}

std::size_t JointTrajectory::segment_index(double t) const {
  if (segments_.empty()) throw ValidationError("trajectory: empty");
  const auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                                   [](double value, const Segment& s) { return value < s.start_time; });
  return it == segments_.begin() ? 0 : static_cast<std::size_t>(it - segments_.begin()) - 1;
}

JointSample JointTrajectory::eval(double t) const {
  if (segments_.empty()) throw ValidationError("trajectory: empty");
  if (!(t >= 0.0)) throw ValidationError("trajectory: negative time");
  const Segment& last = segments_.back();
  if (t >= last.end_time()) {
    return {eval_segment(last, last.end_time(), 0), 0.0, 0.0};
  }
  const Segment& seg = segments_[segment_index(t)];
  return {eval_segment(seg, t, 0), eval_segment(seg, t, 1), eval_segment(seg, t, 2)};
}

double JointTrajectory::jerk(double t) const {
  if (segments_.empty()) throw ValidationError("trajectory: empty");
  if (t >= segments_.back().end_time()) return 0.0;
  return eval_segment(segments_[segment_index(t)], t, 3);
}

void write_trajectory_csv(std::ostream& out, const std::vector<JointTrajectory>& joints,
                          double control_frequency) {
  double horizon = 0.0;
  for (const auto& j : joints) horizon = std::max(horizon, j.total_time());
  const auto ticks = static_cast<std::size_t>(std::ceil(horizon * control_frequency - 1e-9)) + 1;
  std::vector<double> times(ticks);
  for (std::size_t k = 0; k < ticks; ++k) times[k] = static_cast<double>(k) / control_frequency;
  const auto samples = kernels::sample_trajectories(joints, times);

  out << "t";
  for (std::size_t j = 0; j < joints.size(); ++j) out << ",q" << j << ",qd" << j << ",qdd" << j;
  out << '\n' << std::setprecision(12);
  for (std::size_t k = 0; k < ticks; ++k) {
    out << times[k];
    for (std::size_t j = 0; j < joints.size(); ++j) {
      const auto& s = samples[k * joints.size() + j];
      out << ',' << s.q << ',' << s.qd << ',' << s.qdd;
    }
    out << '\n';
  }
}

}  // namespace rtmotion
