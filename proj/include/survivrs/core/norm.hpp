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

#ifndef SURVIVRS_CORE_NORM_HPP
#define SURVIVRS_CORE_NORM_HPP

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>

namespace survivrs {

/// A normalized quantity in [0, 1] held as integer micro-units.
///
/// The canonical encoding prints these with exactly six decimals, so
/// storing micro-units keeps decode(encode(x)) == x bit-for-bit.
class Norm {
 public:
  static constexpr std::int32_t kScale = 1'000'000;

  constexpr Norm() = default;
  static constexpr Norm from_micros(std::int32_t micros) noexcept { return Norm(micros); }
  /// Rounds to the nearest micro-unit; no range check.
  static Norm from_double(double x) noexcept {
    return Norm(static_cast<std::int32_t>(std::llround(x * kScale)));
  }

  constexpr std::int32_t micros() const noexcept { return micros_; }
  constexpr double value() const noexcept { return static_cast<double>(micros_) / kScale; }
  constexpr bool in_unit_range() const noexcept { return micros_ >= 0 && micros_ <= kScale; }

  /// Six-decimal fixed form, e.g. "0.500000".
  std::string fixed6() const {
    char buf[32];
    std::int64_t m = micros_;
    const char* sign = m < 0 ? "-" : "";
    if (m < 0) m = -m;
    std::snprintf(buf, sizeof buf, "%s%lld.%06lld", sign,
                  static_cast<long long>(m / kScale), static_cast<long long>(m % kScale));
    return buf;
  }

  constexpr auto operator<=>(const Norm&) const = default;

 private:
  constexpr explicit Norm(std::int32_t micros) : micros_(micros) {}
  std::int32_t micros_ = 0;
};

/// (u, v) position relative to a 2D video frame; origin top-left.
struct Point {
  Norm u;
  Norm v;
  constexpr bool operator==(const Point&) const = default;
};

inline Point point_from(double u, double v) noexcept {
  return {Norm::from_double(u), Norm::from_double(v)};
}

}  // namespace survivrs

#endif  // SURVIVRS_CORE_NORM_HPP
