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

#ifndef SURVIVRS_CORE_EVENTS_HPP
#define SURVIVRS_CORE_EVENTS_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "survivrs/core/norm.hpp"
#include "survivrs/core/types.hpp"

namespace survivrs {

enum class Tool : std::uint8_t { Pencil, Oval, Rectangle, Arrow };

inline constexpr std::array<Tool, 4> kAllTools = {Tool::Pencil, Tool::Oval, Tool::Rectangle,
                                                  Tool::Arrow};

inline constexpr std::string_view to_string(Tool t) noexcept {
  switch (t) {
    case Tool::Pencil: return "Pencil";
    case Tool::Oval: return "Oval";
    case Tool::Rectangle: return "Rectangle";
    case Tool::Arrow: return "Arrow";
  }
  return "?";
}

inline std::optional<Tool> parse_tool(std::string_view s) noexcept {
  for (Tool t : kAllTools) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

struct Rgba {
  std::uint8_t r = 255, g = 0, b = 0, a = 255;
  constexpr bool operator==(const Rgba&) const = default;
};

/// Stroke width and eraser radius live in (0, 0.1].
inline constexpr std::int32_t kMaxWidthMicros = 100'000;

inline constexpr bool valid_width(Norm w) noexcept {
  return w.micros() > 0 && w.micros() <= kMaxWidthMicros;
}

// Annotation actions. `stream` is always Site or Vitals.
namespace act {
struct ZoomIn {
  StreamKind stream;
  bool operator==(const ZoomIn&) const = default;
};
struct ZoomOut {
  StreamKind stream;
  bool operator==(const ZoomOut&) const = default;
};
struct BeginShape {
  StreamKind stream;
  Tool tool;
  Point point;
  Rgba color;
  Norm width;
  bool operator==(const BeginShape&) const = default;
};
struct ExtendShape {
  StreamKind stream;
  Point point;
  bool operator==(const ExtendShape&) const = default;
};
struct EndShape {
  StreamKind stream;
  bool operator==(const EndShape&) const = default;
};
struct Erase {
  StreamKind stream;
  std::vector<Point> path;
  Norm radius;
  bool operator==(const Erase&) const = default;
};
struct Undo {
  StreamKind stream;
  bool operator==(const Undo&) const = default;
};
struct Redo {
  StreamKind stream;
  bool operator==(const Redo&) const = default;
};
struct PlayPauseScreenshot {
  StreamKind stream;
  bool operator==(const PlayPauseScreenshot&) const = default;
};
}  // namespace act

using AnnotationAction =
    std::variant<act::ZoomIn, act::ZoomOut, act::BeginShape, act::ExtendShape, act::EndShape,
                 act::Erase, act::Undo, act::Redo, act::PlayPauseScreenshot>;

inline StreamKind stream_of(const AnnotationAction& a) {
  return std::visit([](const auto& x) { return x.stream; }, a);
}

inline std::string_view type_name(const AnnotationAction& a) {
  struct V {
    std::string_view operator()(const act::ZoomIn&) const { return "ZoomIn"; }
    std::string_view operator()(const act::ZoomOut&) const { return "ZoomOut"; }
    std::string_view operator()(const act::BeginShape&) const { return "BeginShape"; }
    std::string_view operator()(const act::ExtendShape&) const { return "ExtendShape"; }
    std::string_view operator()(const act::EndShape&) const { return "EndShape"; }
    std::string_view operator()(const act::Erase&) const { return "Erase"; }
    std::string_view operator()(const act::Undo&) const { return "Undo"; }
    std::string_view operator()(const act::Redo&) const { return "Redo"; }
    std::string_view operator()(const act::PlayPauseScreenshot&) const {
      return "PlayPauseScreenshot";
    }
  };
  return std::visit(V{}, a);
}

/// A drawing/control event. Client proposals leave seq, ts_us and frame_seq
/// empty; the session authority stamps them before relaying.
struct AnnotationEvent {
  std::optional<std::uint64_t> seq;
  std::optional<std::uint64_t> ts_us;
  /// Latest relay seq on the event's stream when the authority ordered it.
  std::optional<std::uint64_t> frame_seq;
  AnnotationAction action;

  bool operator==(const AnnotationEvent&) const = default;
};

// Signaling handshake messages.
namespace sig {
struct Hello {
  SessionId session;
  PeerRole role;
  std::uint32_t proto_version = kProtoVersion;
  bool operator==(const Hello&) const = default;
};
struct StreamAdvertise {
  /// kind -> content type offered
  std::map<StreamKind, std::string> streams;
  StreamSet kinds() const {
    StreamSet s;
    for (const auto& [k, _] : streams) s.insert(k);
    return s;
  }
  bool operator==(const StreamAdvertise&) const = default;
};
struct StreamRequest {
  StreamSet streams;
  bool operator==(const StreamRequest&) const = default;
};
struct StreamAck {
  StreamSet streams;
  bool operator==(const StreamAck&) const = default;
};
struct Bye {
  std::string reason;
  bool operator==(const Bye&) const = default;
};
}  // namespace sig

using SignalMessage =
    std::variant<sig::Hello, sig::StreamAdvertise, sig::StreamRequest, sig::StreamAck, sig::Bye>;

inline std::string_view type_name(const SignalMessage& m) {
  struct V {
    std::string_view operator()(const sig::Hello&) const { return "Hello"; }
    std::string_view operator()(const sig::StreamAdvertise&) const { return "StreamAdvertise"; }
    std::string_view operator()(const sig::StreamRequest&) const { return "StreamRequest"; }
    std::string_view operator()(const sig::StreamAck&) const { return "StreamAck"; }
    std::string_view operator()(const sig::Bye&) const { return "Bye"; }
  };
  return std::visit(V{}, m);
}

/// Authority's answer to a proposal it refused. Not relayed to other peers
/// and never recorded.
struct Rejected {
  std::string code;
  std::string event;
  bool operator==(const Rejected&) const = default;
};

/// Everything that travels as a text message on the control channel.
using SessionEvent = std::variant<AnnotationEvent, SignalMessage, Rejected>;

}  // namespace survivrs

#endif  // SURVIVRS_CORE_EVENTS_HPP
