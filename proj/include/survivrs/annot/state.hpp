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

#ifndef SURVIVRS_ANNOT_STATE_HPP
#define SURVIVRS_ANNOT_STATE_HPP

// Annotation authority semantics: a pure fold from ordered events to the
// visible drawing state of the two zoomable streams.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "survivrs/annot/geometry.hpp"
#include "survivrs/core/events.hpp"

namespace survivrs::annot {

struct AddShape {
  Shape shape;
  bool operator==(const AddShape&) const = default;
};

/// Erased shapes with the index each held in the visible list, ascending.
struct EraseShapes {
  std::vector<std::pair<std::size_t, Shape>> removed;
  bool operator==(const EraseShapes&) const = default;
};

using ReversibleAction = std::variant<AddShape, EraseShapes>;

struct Playing {
  bool operator==(const Playing&) const = default;
};
/// The view is frozen on frame `at_seq` (empty if nothing had arrived yet).
struct Paused {
  std::optional<std::uint64_t> at_seq;
  bool operator==(const Paused&) const = default;
};
using Playback = std::variant<Playing, Paused>;

struct StreamAnnotations {
  std::vector<Shape> visible;
  std::vector<ReversibleAction> undo_stack;
  std::vector<ReversibleAction> redo_stack;
  std::optional<Shape> open_shape;
  Playback playback = Playing{};

  bool paused() const { return std::holds_alternative<Paused>(playback); }
  bool operator==(const StreamAnnotations&) const = default;
};

struct Screenshot {
  std::uint64_t id = 0;
  StreamKind stream = StreamKind::Site;
  std::optional<std::uint64_t> frame_seq;
  std::vector<Shape> shapes;
  std::uint64_t ts_us = 0;
  bool operator==(const Screenshot&) const = default;
};

struct AnnotationState {
  StreamAnnotations site;
  StreamAnnotations vitals;
  std::optional<StreamKind> zoomed;
  std::vector<Screenshot> screenshots;
  std::optional<std::uint64_t> last_seq;

  std::uint64_t next_seq() const { return last_seq ? *last_seq + 1 : 0; }

  StreamAnnotations& of(StreamKind k) { return k == StreamKind::Vitals ? vitals : site; }
  const StreamAnnotations& of(StreamKind k) const {
    return k == StreamKind::Vitals ? vitals : site;
  }

  bool operator==(const AnnotationState&) const = default;
};

namespace effect {
struct Pause {
  StreamKind stream;
  std::optional<std::uint64_t> at_seq;
  bool operator==(const Pause&) const = default;
};
struct Resume {
  StreamKind stream;
  bool operator==(const Resume&) const = default;
};
struct CaptureScreenshot {
  Screenshot shot;
  bool operator==(const CaptureScreenshot&) const = default;
};
}  // namespace effect

using DerivedEffect = std::variant<effect::Pause, effect::Resume, effect::CaptureScreenshot>;

enum class ApplyError : std::uint8_t { OutOfOrderEvent, InvalidInContext };

inline constexpr std::string_view to_string(ApplyError e) noexcept {
  return e == ApplyError::OutOfOrderEvent ? "OutOfOrderEvent" : "InvalidInContext";
}

struct ApplyResult {
  AnnotationState state;
  std::vector<DerivedEffect> effects;
  std::optional<ApplyError> error;
};

namespace detail {

// Every branch validates before it mutates, so a returned error leaves
// `s` untouched.
struct Applier {
  AnnotationState& s;
  const AnnotationEvent& e;
  std::vector<DerivedEffect>& fx;

  using R = std::optional<ApplyError>;
  static constexpr R kInvalid = ApplyError::InvalidInContext;

  bool zoomed_on(StreamKind k) const { return s.zoomed == k; }

  R operator()(const act::ZoomIn& a) {
    if (zoomed_on(a.stream)) return kInvalid;
    if (s.zoomed && s.of(*s.zoomed).open_shape) return kInvalid;
    s.zoomed = a.stream;
    return {};
  }

  R operator()(const act::ZoomOut& a) {
    if (!zoomed_on(a.stream) || s.of(a.stream).open_shape) return kInvalid;
    s.zoomed.reset();
    return {};
  }

  R operator()(const act::BeginShape& a) {
    StreamAnnotations& st = s.of(a.stream);
    if (!zoomed_on(a.stream) || st.open_shape) return kInvalid;
    if (!valid_width(a.width)) return kInvalid;
    if (!st.paused()) {
      st.playback = Paused{e.frame_seq};
      fx.push_back(effect::Pause{a.stream, e.frame_seq});
    }
    st.open_shape = Shape{*e.seq, a.tool, {a.point}, a.color, a.width};
    return {};
  }

  R operator()(const act::ExtendShape& a) {
    StreamAnnotations& st = s.of(a.stream);
    if (!zoomed_on(a.stream) || !st.open_shape) return kInvalid;
    Shape& sh = *st.open_shape;
    if (sh.tool == Tool::Pencil || sh.points.size() < 2) {
      sh.points.push_back(a.point);
    } else {
      sh.points[1] = a.point;
    }
    return {};
  }

  R operator()(const act::EndShape& a) {
    StreamAnnotations& st = s.of(a.stream);
    if (!zoomed_on(a.stream) || !st.open_shape || st.open_shape->points.size() < 2) {
      return kInvalid;
    }
    Shape sh = std::move(*st.open_shape);
    st.open_shape.reset();
    st.visible.push_back(sh);
    st.undo_stack.push_back(AddShape{std::move(sh)});
    st.redo_stack.clear();
    return {};
  }

  R operator()(const act::Erase& a) {
    StreamAnnotations& st = s.of(a.stream);
    if (!zoomed_on(a.stream) || st.open_shape || a.path.empty() || !valid_width(a.radius)) {
      return kInvalid;
    }
    std::vector<std::uint64_t> hits = hit_test_erase(st.visible, a.path, a.radius);
    if (hits.empty()) return kInvalid;
    EraseShapes action;
    std::vector<Shape> kept;
    for (std::size_t i = 0; i < st.visible.size(); ++i) {
      if (std::find(hits.begin(), hits.end(), st.visible[i].id) != hits.end()) {
        action.removed.emplace_back(i, st.visible[i]);
      } else {
        kept.push_back(st.visible[i]);
      }
    }
    st.visible = std::move(kept);
    st.undo_stack.push_back(std::move(action));
    st.redo_stack.clear();
    return {};
  }

  static void revert(StreamAnnotations& st, const ReversibleAction& act) {
    if (const auto* add = std::get_if<AddShape>(&act)) {
      std::erase_if(st.visible, [&](const Shape& x) { return x.id == add->shape.id; });
    } else {
      for (const auto& [idx, shape] : std::get<EraseShapes>(act).removed) {
        st.visible.insert(st.visible.begin() + static_cast<std::ptrdiff_t>(idx), shape);
      }
    }
  }

  static void reapply(StreamAnnotations& st, const ReversibleAction& act) {
    if (const auto* add = std::get_if<AddShape>(&act)) {
      st.visible.push_back(add->shape);
    } else {
      for (const auto& [idx, shape] : std::get<EraseShapes>(act).removed) {
        std::erase_if(st.visible, [&](const Shape& x) { return x.id == shape.id; });
      }
    }
  }

  R operator()(const act::Undo& a) {
    StreamAnnotations& st = s.of(a.stream);
    if (!zoomed_on(a.stream) || st.open_shape || st.undo_stack.empty()) return kInvalid;
    ReversibleAction act = std::move(st.undo_stack.back());
    st.undo_stack.pop_back();
    revert(st, act);
    st.redo_stack.push_back(std::move(act));
    return {};
  }

  R operator()(const act::Redo& a) {
    StreamAnnotations& st = s.of(a.stream);
    if (!zoomed_on(a.stream) || st.open_shape || st.redo_stack.empty()) return kInvalid;
    ReversibleAction act = std::move(st.redo_stack.back());
    st.redo_stack.pop_back();
    reapply(st, act);
    st.undo_stack.push_back(std::move(act));
    return {};
  }

  R operator()(const act::PlayPauseScreenshot& a) {
    StreamAnnotations& st = s.of(a.stream);
    if (!zoomed_on(a.stream) || st.open_shape) return kInvalid;
    std::optional<std::uint64_t> shown;
    if (const auto* p = std::get_if<Paused>(&st.playback)) {
      shown = p->at_seq;
      st.playback = Playing{};
      fx.push_back(effect::Resume{a.stream});
    } else {
      shown = e.frame_seq;
      st.playback = Paused{e.frame_seq};
      fx.push_back(effect::Pause{a.stream, e.frame_seq});
    }
    Screenshot shot{*e.seq, a.stream, shown, st.visible, e.ts_us.value_or(0)};
    s.screenshots.push_back(shot);
    fx.push_back(effect::CaptureScreenshot{std::move(shot)});
    return {};
  }
};

}  // namespace detail

/// Applies one authority-ordered event in place. On error the state is left
/// unchanged and no effects are produced.
inline std::optional<ApplyError> apply_in_place(AnnotationState& s, const AnnotationEvent& e,
                                                std::vector<DerivedEffect>& effects) {
  if (!e.seq || *e.seq != s.next_seq()) return ApplyError::OutOfOrderEvent;
  std::vector<DerivedEffect> fx;
  auto err = std::visit(detail::Applier{s, e, fx}, e.action);
  if (err) return err;
  s.last_seq = e.seq;
  effects.insert(effects.end(), std::make_move_iterator(fx.begin()),
                 std::make_move_iterator(fx.end()));
  return std::nullopt;
}

/// Pure transition: returns the next state and its derived effects.
inline ApplyResult apply(const AnnotationState& state, const AnnotationEvent& e) {
  ApplyResult r{state, {}, std::nullopt};
  r.error = apply_in_place(r.state, e, r.effects);
  return r;
}

class RebuildError : public std::runtime_error {
 public:
  RebuildError(std::uint64_t index, std::optional<std::uint64_t> seq, ApplyError err)
      : std::runtime_error("event " + std::to_string(index) + " (seq " +
                           (seq ? std::to_string(*seq) : std::string("none")) +
                           "): " + std::string(to_string(err))),
        index_(index),
        seq_(seq),
        error_(err) {}

  std::uint64_t index() const noexcept { return index_; }
  std::optional<std::uint64_t> seq() const noexcept { return seq_; }
  ApplyError error() const noexcept { return error_; }

 private:
  std::uint64_t index_;
  std::optional<std::uint64_t> seq_;
  ApplyError error_;
};

/// Folds apply over a gap-free event list from the empty state.
inline AnnotationState rebuild(std::span<const AnnotationEvent> events) {
  AnnotationState s;
  std::vector<DerivedEffect> scratch;
  for (std::size_t i = 0; i < events.size(); ++i) {
    scratch.clear();
    if (auto err = apply_in_place(s, events[i], scratch)) {
      throw RebuildError(i, events[i].seq, *err);
    }
  }
  return s;
}

}  // namespace survivrs::annot

#endif  // SURVIVRS_ANNOT_STATE_HPP
