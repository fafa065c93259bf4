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

#ifndef SURVIVRS_VIEWMATH_EQUIRECT_HPP
#define SURVIVRS_VIEWMATH_EQUIRECT_HPP

// Direction <-> equirectangular texture coordinates, and viewport rays.
//
// Convention: right-handed, +y up, -z forward. Yaw 0 / pitch 0 looks along
// -z; positive yaw turns toward +x, positive pitch looks up, positive roll
// tilts the image counter-clockwise as seen by the viewer.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "survivrs/core/pose.hpp"

namespace survivrs::viewmath {

struct Direction {
  double x = 0, y = 0, z = -1;

  double length() const { return std::sqrt(x * x + y * y + z * z); }
  Direction normalized() const {
    double n = length();
    return {x / n, y / n, z / n};
  }
};

struct UV {
  double u = 0.5, v = 0.5;
};

inline constexpr double kPoleEpsilon = 1e-12;

inline UV dir_to_uv(const Direction& d) {
  constexpr double kPi = std::numbers::pi;
  if (std::abs(d.y) >= 1.0 - kPoleEpsilon) {
    return {0.5, d.y > 0 ? 0.0 : 1.0};
  }
  double y = std::clamp(d.y, -1.0, 1.0);
  return {std::atan2(d.x, -d.z) / (2 * kPi) + 0.5, 0.5 - std::asin(y) / kPi};
}

inline Direction uv_to_dir(double u, double v) {
  constexpr double kPi = std::numbers::pi;
  double lon = (u - 0.5) * 2 * kPi;
  double lat = (0.5 - v) * kPi;
  double c = std::cos(lat);
  Direction d{c * std::sin(lon), std::sin(lat), -c * std::cos(lon)};
  return d.normalized();
}

inline Direction uv_to_dir(const UV& uv) { return uv_to_dir(uv.u, uv.v); }

/// Rotates a camera-space vector into world space: roll, then pitch, then yaw.
inline Direction rotate(const Direction& d, const ViewPose& pose) {
  double cr = std::cos(pose.roll()), sr = std::sin(pose.roll());
  double x1 = d.x * cr - d.y * sr;
  double y1 = d.x * sr + d.y * cr;
  double z1 = d.z;

  double cp = std::cos(pose.pitch()), sp = std::sin(pose.pitch());
  double y2 = y1 * cp - z1 * sp;
  double z2 = y1 * sp + z1 * cp;
  double x2 = x1;

  double cy = std::cos(pose.yaw()), sy = std::sin(pose.yaw());
  double x3 = x2 * cy - z2 * sy;
  double z3 = x2 * sy + z2 * cy;
  return {x3, y2, z3};
}

/// World-space ray through normalized device coords (px, py) in [-1, 1]^2
/// of a pinhole camera with vertical field of view `fov_deg`.
inline Direction viewport_ray(const ViewPose& pose, double fov_deg, double px, double py,
                              double aspect = 1.0) {
  double t = std::tan(fov_deg * std::numbers::pi / 360.0);
  Direction cam{px * t * aspect, py * t, -1.0};
  return rotate(cam.normalized(), pose).normalized();
}

}  // namespace survivrs::viewmath

#endif  // SURVIVRS_VIEWMATH_EQUIRECT_HPP
