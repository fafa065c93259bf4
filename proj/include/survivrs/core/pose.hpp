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

#ifndef SURVIVRS_CORE_POSE_HPP
#define SURVIVRS_CORE_POSE_HPP

#include <algorithm>
#include <cmath>
#include <numbers>

namespace survivrs {

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) noexcept {
  constexpr double kPi = std::numbers::pi;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (!std::isfinite(a)) return 0.0;
  double r = std::fmod(a, kTwoPi);  // (-2pi, 2pi)
  if (r <= -kPi) r += kTwoPi;
  if (r > kPi) r -= kTwoPi;
  return r;
}

/// Signed shortest-arc difference to - from, in (-pi, pi].
inline double shortest_arc(double from, double to) noexcept { return wrap_angle(to - from); }

/// Head orientation of the guide. Always normalized: yaw and roll in
/// (-pi, pi], pitch in [-pi/2, pi/2].
class ViewPose {
 public:
  constexpr ViewPose() = default;
  ViewPose(double yaw, double pitch, double roll)
      : yaw_(wrap_angle(yaw)),
        pitch_(std::clamp(std::isfinite(pitch) ? pitch : 0.0, -std::numbers::pi / 2,
                          std::numbers::pi / 2)),
        roll_(wrap_angle(roll)) {}

  double yaw() const noexcept { return yaw_; }
  double pitch() const noexcept { return pitch_; }
  double roll() const noexcept { return roll_; }

  bool operator==(const ViewPose&) const = default;

 private:
  double yaw_ = 0.0;
  double pitch_ = 0.0;
  double roll_ = 0.0;
};

}  // namespace survivrs

#endif  // SURVIVRS_CORE_POSE_HPP
