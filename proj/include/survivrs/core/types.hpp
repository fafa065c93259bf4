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

#ifndef SURVIVRS_CORE_TYPES_HPP
#define SURVIVRS_CORE_TYPES_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace survivrs {

/// Opaque session identifier ("connection ID"): 1-64 chars of [A-Za-z0-9-].
class SessionId {
 public:
  static bool is_valid(std::string_view s) noexcept {
    if (s.empty() || s.size() > 64) return false;
    for (char c : s) {
      bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                (c >= '0' && c <= '9') || c == '-';
      if (!ok) return false;
    }
    return true;
  }

  static std::optional<SessionId> parse(std::string_view s) {
    if (!is_valid(s)) return std::nullopt;
    return SessionId(std::string(s));
  }

  explicit SessionId(std::string value) : value_(std::move(value)) {
    if (!is_valid(value_)) {
      throw std::invalid_argument("invalid session id: '" + value_ + "'");
    }
  }

  const std::string& str() const noexcept { return value_; }
  auto operator<=>(const SessionId&) const = default;

 private:
  std::string value_;
};

enum class PeerRole : std::uint8_t { RoomPublisher, RemoteGuide, ReplayViewer };

inline constexpr std::array<PeerRole, 3> kAllRoles = {
    PeerRole::RoomPublisher, PeerRole::RemoteGuide, PeerRole::ReplayViewer};

inline constexpr std::string_view to_string(PeerRole r) noexcept {
  switch (r) {
    case PeerRole::RoomPublisher: return "RoomPublisher";
    case PeerRole::RemoteGuide: return "RemoteGuide";
    case PeerRole::ReplayViewer: return "ReplayViewer";
  }
  return "?";
}

inline std::optional<PeerRole> parse_role(std::string_view s) noexcept {
  for (PeerRole r : kAllRoles) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

/// Wire codes are the enumerator values (0..4) and must not change.
enum class StreamKind : std::uint8_t {
  Surround360 = 0,
  Site = 1,
  Vitals = 2,
  GuideView = 3,
  Audio = 4,
};

inline constexpr std::size_t kStreamKindCount = 5;

inline constexpr std::array<StreamKind, kStreamKindCount> kAllStreamKinds = {
    StreamKind::Surround360, StreamKind::Site, StreamKind::Vitals,
    StreamKind::GuideView, StreamKind::Audio};

inline constexpr std::string_view to_string(StreamKind k) noexcept {
  switch (k) {
    case StreamKind::Surround360: return "Surround360";
    case StreamKind::Site: return "Site";
    case StreamKind::Vitals: return "Vitals";
    case StreamKind::GuideView: return "GuideView";
    case StreamKind::Audio: return "Audio";
  }
  return "?";
}

inline std::optional<StreamKind> parse_stream_kind(std::string_view s) noexcept {
  for (StreamKind k : kAllStreamKinds) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

inline std::optional<StreamKind> stream_kind_from_code(std::uint8_t code) noexcept {
  if (code >= kStreamKindCount) return std::nullopt;
  return static_cast<StreamKind>(code);
}

inline constexpr std::uint8_t code_of(StreamKind k) noexcept {
  return static_cast<std::uint8_t>(k);
}

/// Only the zoomable 2D spot streams carry annotations.
inline constexpr bool is_annotatable(StreamKind k) noexcept {
  return k == StreamKind::Site || k == StreamKind::Vitals;
}

/// Role matrix: which role may publish which stream.
inline constexpr bool may_publish(PeerRole role, StreamKind kind) noexcept {
  switch (kind) {
    case StreamKind::Surround360:
    case StreamKind::Site:
    case StreamKind::Vitals:
      return role == PeerRole::RoomPublisher;
    case StreamKind::GuideView:
      return role == PeerRole::RemoteGuide;
    case StreamKind::Audio:
      return role == PeerRole::RoomPublisher || role == PeerRole::RemoteGuide;
  }
  return false;
}

/// Small value set of stream kinds, iterated in wire-code order.
class StreamSet {
 public:
  constexpr StreamSet() = default;
  constexpr StreamSet(std::initializer_list<StreamKind> kinds) {
    for (StreamKind k : kinds) insert(k);
  }

  constexpr void insert(StreamKind k) noexcept { bits_ |= bit(k); }
  constexpr void erase(StreamKind k) noexcept { bits_ &= ~bit(k); }
  constexpr bool contains(StreamKind k) const noexcept { return bits_ & bit(k); }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr bool is_subset_of(StreamSet other) const noexcept {
    return (bits_ & ~other.bits_) == 0;
  }
  constexpr std::uint8_t bits() const noexcept { return bits_; }
  static constexpr StreamSet from_bits(std::uint8_t b) noexcept {
    StreamSet s;
    s.bits_ = b & 0x1F;
    return s;
  }

  template <typename F>
  void for_each(F&& f) const {
    for (StreamKind k : kAllStreamKinds) {
      if (contains(k)) f(k);
    }
  }

  constexpr bool operator==(const StreamSet&) const = default;

 private:
  static constexpr std::uint8_t bit(StreamKind k) noexcept {
    return static_cast<std::uint8_t>(1u << code_of(k));
  }
  std::uint8_t bits_ = 0;
};

inline constexpr std::uint32_t kProtoVersion = 1;

}  // namespace survivrs

#endif  // SURVIVRS_CORE_TYPES_HPP
