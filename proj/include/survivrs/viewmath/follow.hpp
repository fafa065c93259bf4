// Copyright 2026 The SURVIVRS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SURVIVRS_VIEWMATH_FOLLOW_HPP
#define SURVIVRS_VIEWMATH_FOLLOW_HPP

#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>

#include "survivrs/core/pose.hpp"

namespace survivrs::viewmath {

inline constexpr std::int64_t kFollowDelayUs = 500'000;
inline constexpr std::int64_t kDefaultFollowTauUs = 150'000;

/// Heads-up UI pose that trails the head pose by a fixed delay and then eases
/// toward it exponentially.
struct FollowState {
  struct Sample {
    std::int64_t t_us;
    ViewPose pose;
  };

  ViewPose ui_pose;
  std::deque<Sample> history;
  std::int64_t delay_us = kFollowDelayUs;
  std::int64_t tau_us = kDefaultFollowTauUs;
  /// Roll offset applied to the 360 view for horizon correction.
  double roll_offset = 0.0;

  static FollowState starting_at(ViewPose pose, std::int64_t tau_us = kDefaultFollowTauUs) {
    FollowState fs;
    fs.ui_pose = pose;
    if (tau_us <= 0) throw std::invalid_argument("tau_us must be positive");
    fs.tau_us = tau_us;
    return fs;
  }
};

namespace detail {

inline double lerp_angle(double a, double b, double f) {
  return a + f * shortest_arc(a, b);
}

inline ViewPose lerp_pose(const ViewPose& a, const ViewPose& b, double f) {
  return ViewPose(lerp_angle(a.yaw(), b.yaw(), f), a.pitch() + f * (b.pitch() - a.pitch()),
                  lerp_angle(a.roll(), b.roll(), f));
}

}  // namespace detail

/// Head pose at time t, linearly interpolated in the history (clamped to the
/// oldest / newest sample).
inline ViewPose pose_at(const std::deque<FollowState::Sample>& history, std::int64_t t) {
  if (history.empty()) return {};
  if (t <= history.front().t_us) return history.front().pose;
  if (t >= history.back().t_us) return history.back().pose;
  for (std::size_t i = 1; i < history.size(); ++i) {
    const auto& hi = history[i];
    if (hi.t_us < t) continue;
    const auto& lo = history[i - 1];
    if (hi.t_us == t) return hi.pose;
    double f = static_cast<double>(t - lo.t_us) / static_cast<double>(hi.t_us - lo.t_us);
    return detail::lerp_pose(lo.pose, hi.pose, f);
  }
  return history.back().pose;
}

/// Feeds the head pose observed at `t_us` (strictly after the previous
/// sample) and advances the UI pose.
inline FollowState follow_step(FollowState fs, const ViewPose& head, std::int64_t t_us) {
  if (!fs.history.empty() && t_us <= fs.history.back().t_us) {
    throw std::invalid_argument("follow_step: timestamps must increase");
  }
  std::int64_t dt = fs.history.empty() ? 0 : t_us - fs.history.back().t_us;
  fs.history.push_back({t_us, head});

  const std::int64_t target_t = t_us - fs.delay_us;
  // Keep one sample at or before the target time for interpolation.
  while (fs.history.size() > 2 && fs.history[1].t_us <= target_t) fs.history.pop_front();

  ViewPose target = pose_at(fs.history, target_t);
  double alpha = 1.0 - std::exp(-static_cast<double>(dt) / static_cast<double>(fs.tau_us));
  fs.ui_pose = detail::lerp_pose(fs.ui_pose, target, alpha);
  return fs;
}

}  // namespace survivrs::viewmath

#endif  // SURVIVRS_VIEWMATH_FOLLOW_HPP
