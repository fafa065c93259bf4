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

#ifndef SURVIVRS_CORE_CLOCK_HPP
#define SURVIVRS_CORE_CLOCK_HPP

#include <atomic>
#include <chrono>
#include <cstdint>

namespace survivrs {

/// Monotonic microseconds since session start. Wallclock only ever appears
/// in recording headers.
class SessionClock {
 public:
  SessionClock() : start_(std::chrono::steady_clock::now()) {}

  std::uint64_t now_us() const {
    auto d = std::chrono::steady_clock::now() - start_;
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::microseconds>(d).count());
  }

  std::chrono::steady_clock::time_point start() const { return start_; }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Microseconds on the host-wide steady clock; comparable across processes
/// on the same machine (CLOCK_MONOTONIC).
inline std::uint64_t steady_now_us() {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(
                                        std::chrono::steady_clock::now().time_since_epoch())
                                        .count());
}

inline std::uint64_t wallclock_now_us() {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(
                                        std::chrono::system_clock::now().time_since_epoch())
                                        .count());
}

/// Hand-advanced clock for deterministic tests.
class ManualClock {
 public:
  std::uint64_t now_us() const { return now_.load(); }
  void set(std::uint64_t t) { now_.store(t); }
  void advance(std::uint64_t dt) { now_.fetch_add(dt); }

 private:
  std::atomic<std::uint64_t> now_{0};
};

}  // namespace survivrs

#endif  // SURVIVRS_CORE_CLOCK_HPP
