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

#ifndef SURVIVRS_TESTS_SUPPORT_HPP
#define SURVIVRS_TESTS_SUPPORT_HPP

// Shared by the unit and acceptance binaries: scratch directories, random
// generators, and the independent oracles the implementation is checked
// against. Nothing here calls into the code under test except where noted.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "survivrs/annot/state.hpp"
#include "survivrs/core/canonical.hpp"
#include "survivrs/core/events.hpp"
#include "survivrs/record/format.hpp"

namespace survivrs::testing {

using Rng = std::mt19937_64;

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("survivrs-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Norm rand_norm(Rng& rng, std::int32_t lo = 0, std::int32_t hi = 1'000'000) {
  return Norm::from_micros(std::uniform_int_distribution<std::int32_t>(lo, hi)(rng));
}

inline Point rand_point(Rng& rng, std::int32_t lo = 0, std::int32_t hi = 1'000'000) {
  return {rand_norm(rng, lo, hi), rand_norm(rng, lo, hi)};
}

inline StreamKind rand_annot_stream(Rng& rng) {
  return rng() % 2 ? StreamKind::Site : StreamKind::Vitals;
}

inline StreamKind rand_stream(Rng& rng) { return kAllStreamKinds[rng() % kStreamKindCount]; }

inline Rgba rand_color(Rng& rng) {
  return {static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
          static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng())};
}

/// Any action, valid or not in the current context.
inline AnnotationAction rand_action(Rng& rng) {
  StreamKind s = rand_annot_stream(rng);
  switch (rng() % 12) {
    case 0: return act::ZoomIn{s};
    case 1: return act::ZoomOut{s};
    case 2:
    case 3:
      return act::BeginShape{s, kAllTools[rng() % 4], rand_point(rng), rand_color(rng),
                             rand_norm(rng, rng() % 20 == 0 ? 0 : 1, 100'000)};
    case 4:
    case 5:
    case 6: return act::ExtendShape{s, rand_point(rng)};
    case 7: return act::EndShape{s};
    case 8: {
      std::vector<Point> path;
      std::size_t n = rng() % 4;
      for (std::size_t i = 0; i < n; ++i) path.push_back(rand_point(rng));
      return act::Erase{s, path, rand_norm(rng, 1, 100'000)};
    }
    case 9: return act::Undo{s};
    case 10: return act::Redo{s};
    default: return act::PlayPauseScreenshot{s};
  }
}

/// Proposal-shaped event (no authority fields).
inline AnnotationEvent rand_proposal(Rng& rng) {
  return AnnotationEvent{std::nullopt, std::nullopt, std::nullopt, rand_action(rng)};
}

// ---------------------------------------------------------------------------
// Naive annotation oracle. One timeline of reversible actions per stream with
// a cursor instead of undo/redo stacks; the visible list is recomputed from
// the start of the timeline every time it is needed.

struct NaiveShape {
  std::uint64_t id;
  Tool tool;
  std::vector<Point> points;
  Rgba color;
  Norm width;
};

struct NaiveOp {
  bool add;
  NaiveShape shape;                // add
  std::vector<std::uint64_t> ids;  // erase
};

struct NaiveStream {
  std::vector<NaiveOp> timeline;
  std::size_t cursor = 0;
  std::optional<NaiveShape> open;
  bool paused = false;
  std::optional<std::uint64_t> paused_at;
};

struct NaiveShot {
  std::uint64_t id;
  StreamKind stream;
  std::optional<std::uint64_t> frame_seq;
  std::vector<std::uint64_t> shape_ids;
  std::uint64_t ts_us;
};

class NaiveAnnotations {
 public:
  std::vector<NaiveShape> visible(StreamKind s) const {
    const NaiveStream& st = of(s);
    std::vector<NaiveShape> out;
    for (std::size_t i = 0; i < st.cursor; ++i) {
      const NaiveOp& op = st.timeline[i];
      if (op.add) {
        out.push_back(op.shape);
      } else {
        std::vector<NaiveShape> kept;
        for (const auto& sh : out) {
          if (std::find(op.ids.begin(), op.ids.end(), sh.id) == op.ids.end()) kept.push_back(sh);
        }
        out = kept;
      }
    }
    return out;
  }

  /// Returns false (and changes nothing) if the event is refused.
  /// `erase_hits` decides which visible shapes an eraser path touches.
  template <typename HitTest>
  bool apply(const AnnotationEvent& e, HitTest&& erase_hits) {
    if (!e.seq || *e.seq != (last_seq_ ? *last_seq_ + 1 : 0)) return false;
    bool ok = std::visit([&](const auto& a) { return step(e, a, erase_hits); }, e.action);
    if (ok) last_seq_ = e.seq;
    return ok;
  }

  std::optional<StreamKind> zoomed() const { return zoomed_; }
  std::optional<std::uint64_t> last_seq() const { return last_seq_; }
  const std::vector<NaiveShot>& shots() const { return shots_; }
  const NaiveStream& of(StreamKind s) const { return s == StreamKind::Vitals ? vitals_ : site_; }

 private:
  NaiveStream& mut(StreamKind s) { return s == StreamKind::Vitals ? vitals_ : site_; }
  bool here(StreamKind s) const { return zoomed_ && *zoomed_ == s; }

  template <typename H>
  bool step(const AnnotationEvent&, const act::ZoomIn& a, H&) {
    if (here(a.stream)) return false;
    if (zoomed_ && of(*zoomed_).open) return false;
    zoomed_ = a.stream;
    return true;
  }
  template <typename H>
  bool step(const AnnotationEvent&, const act::ZoomOut& a, H&) {
    if (!here(a.stream) || of(a.stream).open) return false;
    zoomed_.reset();
    return true;
  }
  template <typename H>
  bool step(const AnnotationEvent& e, const act::BeginShape& a, H&) {
    NaiveStream& st = mut(a.stream);
    if (!here(a.stream) || st.open) return false;
    if (a.width.micros() <= 0 || a.width.micros() > 100'000) return false;
    if (!st.paused) {
      st.paused = true;
      st.paused_at = e.frame_seq;
    }
    st.open = NaiveShape{*e.seq, a.tool, {a.point}, a.color, a.width};
    return true;
  }
  template <typename H>
  bool step(const AnnotationEvent&, const act::ExtendShape& a, H&) {
    NaiveStream& st = mut(a.stream);
    if (!here(a.stream) || !st.open) return false;
    auto& pts = st.open->points;
    if (st.open->tool == Tool::Pencil) {
      pts.push_back(a.point);
    } else {
      // Two-point tools keep the anchor and the latest drag end.
      pts = {pts.front(), a.point};
    }
    return true;
  }
  template <typename H>
  bool step(const AnnotationEvent&, const act::EndShape& a, H&) {
    NaiveStream& st = mut(a.stream);
    if (!here(a.stream) || !st.open || st.open->points.size() < 2) return false;
    st.timeline.resize(st.cursor);
    st.timeline.push_back(NaiveOp{true, *st.open, {}});
    st.cursor = st.timeline.size();
    st.open.reset();
    return true;
  }
  template <typename H>
  bool step(const AnnotationEvent&, const act::Erase& a, H& hits_of) {
    NaiveStream& st = mut(a.stream);
    if (!here(a.stream) || st.open || a.path.empty()) return false;
    if (a.radius.micros() <= 0 || a.radius.micros() > 100'000) return false;
    std::vector<std::uint64_t> ids = hits_of(visible(a.stream), a.path, a.radius);
    if (ids.empty()) return false;
    st.timeline.resize(st.cursor);
    st.timeline.push_back(NaiveOp{false, {}, ids});
    st.cursor = st.timeline.size();
    return true;
  }
  template <typename H>
  bool step(const AnnotationEvent&, const act::Undo& a, H&) {
    NaiveStream& st = mut(a.stream);
    if (!here(a.stream) || st.open || st.cursor == 0) return false;
    --st.cursor;
    return true;
  }
  template <typename H>
  bool step(const AnnotationEvent&, const act::Redo& a, H&) {
    NaiveStream& st = mut(a.stream);
    if (!here(a.stream) || st.open || st.cursor == st.timeline.size()) return false;
    ++st.cursor;
    return true;
  }
  template <typename H>
  bool step(const AnnotationEvent& e, const act::PlayPauseScreenshot& a, H&) {
    NaiveStream& st = mut(a.stream);
    if (!here(a.stream) || st.open) return false;
    std::optional<std::uint64_t> shown;
    if (st.paused) {
      shown = st.paused_at;
      st.paused = false;
      st.paused_at.reset();
    } else {
      shown = e.frame_seq;
      st.paused = true;
      st.paused_at = e.frame_seq;
    }
    std::vector<std::uint64_t> ids;
    for (const auto& sh : visible(a.stream)) ids.push_back(sh.id);
    shots_.push_back({*e.seq, a.stream, shown, ids, e.ts_us.value_or(0)});
    return true;
  }

  NaiveStream site_, vitals_;
  std::optional<StreamKind> zoomed_;
  std::vector<NaiveShot> shots_;
  std::optional<std::uint64_t> last_seq_;
};

/// Empty string if the implementation state agrees with the oracle, else a
/// description of the first difference.
inline std::string compare_with_oracle(const annot::AnnotationState& s, const NaiveAnnotations& o) {
  if (s.zoomed != o.zoomed()) return "zoomed";
  if (s.last_seq != o.last_seq()) return "last_seq";
  for (StreamKind k : {StreamKind::Site, StreamKind::Vitals}) {
    const auto& st = s.of(k);
    const auto& ns = o.of(k);
    std::string where = std::string(to_string(k)) + ": ";
    auto vis = o.visible(k);
    if (st.visible.size() != vis.size()) return where + "visible count";
    for (std::size_t i = 0; i < vis.size(); ++i) {
      const auto& a = st.visible[i];
      const auto& b = vis[i];
      if (a.id != b.id || a.tool != b.tool || a.points != b.points || !(a.color == b.color) ||
          a.width != b.width) {
        return where + "visible[" + std::to_string(i) + "]";
      }
    }
    if (st.undo_stack.size() != ns.cursor) return where + "undo depth";
    if (st.redo_stack.size() != ns.timeline.size() - ns.cursor) return where + "redo depth";
    if (st.open_shape.has_value() != ns.open.has_value()) return where + "open shape";
    if (st.open_shape && (st.open_shape->id != ns.open->id || st.open_shape->points != ns.open->points)) {
      return where + "open shape contents";
    }
    if (st.paused() != ns.paused) return where + "playback";
    if (ns.paused && std::get<annot::Paused>(st.playback).at_seq != ns.paused_at) {
      return where + "paused at";
    }
  }
  if (s.screenshots.size() != o.shots().size()) return "screenshot count";
  for (std::size_t i = 0; i < s.screenshots.size(); ++i) {
    const auto& a = s.screenshots[i];
    const auto& b = o.shots()[i];
    std::vector<std::uint64_t> ids;
    for (const auto& sh : a.shapes) ids.push_back(sh.id);
    if (a.id != b.id || a.stream != b.stream || a.frame_seq != b.frame_seq || ids != b.shape_ids ||
        a.ts_us != b.ts_us) {
      return "screenshot " + std::to_string(i);
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Random valid sequences. Proposals are biased toward what the oracle says is
// legal right now; whatever the oracle accepts becomes the next event.

inline annot::Shape to_shape(const NaiveShape& n) {
  return annot::Shape{n.id, n.tool, n.points, n.color, n.width};
}

/// Eraser hit decision for the oracle, delegated to hit_test_erase (which is
/// checked separately against the dense-sampling oracle below).
inline std::vector<std::uint64_t> oracle_hits(const std::vector<NaiveShape>& visible,
                                              const std::vector<Point>& path, Norm radius) {
  std::vector<annot::Shape> shapes;
  for (const auto& n : visible) shapes.push_back(to_shape(n));
  return annot::hit_test_erase(shapes, path, radius);
}

inline Point jitter(Rng& rng, Point p, std::int32_t spread) {
  auto j = [&](Norm n) {
    std::int32_t v = n.micros() + std::uniform_int_distribution<std::int32_t>(-spread, spread)(rng);
    return Norm::from_micros(std::clamp(v, 0, 1'000'000));
  };
  return {j(p.u), j(p.v)};
}

inline AnnotationAction rand_plausible_action(Rng& rng, const NaiveAnnotations& o) {
  if (rng() % 10 == 0 || (!o.zoomed() && rng() % 5 == 0)) return rand_action(rng);
  if (!o.zoomed()) return act::ZoomIn{rand_annot_stream(rng)};
  StreamKind s = *o.zoomed();
  const NaiveStream& st = o.of(s);
  if (st.open) {
    if (rng() % 3) return act::ExtendShape{s, jitter(rng, st.open->points.back(), 50'000)};
    return act::EndShape{s};
  }
  auto roll = rng() % 100;
  if (roll < 35) {
    return act::BeginShape{s, kAllTools[rng() % 4], rand_point(rng), rand_color(rng),
                           rand_norm(rng, 1, 100'000)};
  }
  if (roll < 55) {
    auto vis = o.visible(s);
    std::vector<Point> path;
    Point start = vis.empty() ? rand_point(rng)
                              : vis[rng() % vis.size()].points[0];
    path.push_back(jitter(rng, start, 20'000));
    for (std::size_t n = rng() % 3; n > 0; --n) path.push_back(jitter(rng, path.back(), 30'000));
    return act::Erase{s, path, rand_norm(rng, 1'000, 30'000)};
  }
  if (roll < 72) return act::Undo{s};
  if (roll < 84) return act::Redo{s};
  if (roll < 92) return act::PlayPauseScreenshot{s};
  if (roll < 96) return act::ZoomOut{s};
  return act::ZoomIn{s == StreamKind::Site ? StreamKind::Vitals : StreamKind::Site};
}

/// Assigns authority fields the way the session does: next seq, a frame seq
/// that never goes backwards, a growing timestamp.
struct Stamper {
  std::uint64_t frame_seq = 0;
  std::uint64_t ts_us = 1'000;

  AnnotationEvent stamp(Rng& rng, AnnotationAction a, std::uint64_t seq) {
    frame_seq += rng() % 3;
    ts_us += 1 + rng() % 50'000;
    std::optional<std::uint64_t> fs;
    if (rng() % 10) fs = frame_seq;
    return AnnotationEvent{seq, ts_us, fs, std::move(a)};
  }
};

inline bool is_reversible(const AnnotationAction& a) {
  return std::holds_alternative<act::EndShape>(a) || std::holds_alternative<act::Erase>(a);
}

inline bool same_drawing(const annot::StreamAnnotations& a, const annot::StreamAnnotations& b) {
  return a.visible == b.visible && a.undo_stack == b.undo_stack && a.redo_stack == b.redo_stack;
}

/// Undo soundness and redo clearing for one accepted transition
/// `before --e--> after`. Empty string when both hold.
inline std::string check_transition(const annot::AnnotationState& before, const AnnotationEvent& e,
                                    const annot::AnnotationState& after) {
  StreamKind k = stream_of(e.action);
  auto next = [&](const annot::AnnotationState& s, AnnotationAction a) {
    return annot::apply(s, AnnotationEvent{s.next_seq(), e.ts_us, e.frame_seq, std::move(a)});
  };
  if (is_reversible(e.action)) {
    if (!after.of(k).redo_stack.empty()) return "redo stack not cleared";
    auto undone = next(after, act::Undo{k});
    if (undone.error) return "undo refused after reversible action";
    if (undone.state.of(k).visible != before.of(k).visible) return "undo did not restore visible";
    if (undone.state.of(k).undo_stack != before.of(k).undo_stack) return "undo stack mismatch";
    auto redone = next(undone.state, act::Redo{k});
    if (redone.error || !same_drawing(redone.state.of(k), after.of(k))) return "redo did not reapply";
  }
  for (StreamKind other : {StreamKind::Site, StreamKind::Vitals}) {
    if (other == k) continue;
    if (!same_drawing(before.of(other), after.of(other))) return "other stream changed";
  }
  if (std::holds_alternative<act::Undo>(e.action) || std::holds_alternative<act::Redo>(e.action)) {
    bool undo = std::holds_alternative<act::Undo>(e.action);
    auto back = next(after, undo ? AnnotationAction{act::Redo{k}} : AnnotationAction{act::Undo{k}});
    if (back.error || !same_drawing(back.state.of(k), before.of(k))) {
      return undo ? "redo does not invert undo" : "undo does not invert redo";
    }
  }
  return {};
}

struct SequenceRun {
  std::vector<AnnotationEvent> events;
  annot::AnnotationState live;
  std::string failure;
  std::size_t rejected = 0;
};

/// Grows a valid sequence of up to `len` events, checking the live fold
/// against the oracle and the transition properties at every step, then the
/// rebuild against the live fold.
inline SequenceRun run_random_sequence(Rng& rng, std::size_t len) {
  SequenceRun run;
  NaiveAnnotations oracle;
  Stamper stamper;
  auto fail = [&](std::string why) {
    run.failure = why + " at event " + std::to_string(run.events.size());
    return run;
  };
  for (std::size_t attempt = 0; run.events.size() < len && attempt < 20 * len; ++attempt) {
    AnnotationEvent e = stamper.stamp(rng, rand_plausible_action(rng, oracle), run.live.next_seq());
    bool oracle_ok = oracle.apply(e, oracle_hits);
    annot::ApplyResult r = annot::apply(run.live, e);
    if (r.error.has_value() == oracle_ok) return fail("accept/reject disagreement");
    if (r.error) {
      if (*r.error != annot::ApplyError::InvalidInContext) return fail("unexpected error kind");
      if (!(r.state == run.live) || !r.effects.empty()) return fail("rejected event changed state");
      ++run.rejected;
      continue;
    }
    if (auto why = check_transition(run.live, e, r.state); !why.empty()) return fail(why);
    if (auto why = compare_with_oracle(r.state, oracle); !why.empty()) return fail("oracle: " + why);
    run.live = std::move(r.state);
    run.events.push_back(std::move(e));
  }
  if (!(annot::rebuild(run.events) == run.live)) return fail("rebuild differs from live fold");
  return run;
}

// ---------------------------------------------------------------------------
// Dense-sampling eraser oracle: both geometries become point clouds at a fixed
// arc-length step and the closest pair is found through a uniform grid.

struct P2 {
  double x, y;
};

inline void sample_segment(P2 a, P2 b, double step, std::vector<P2>& out) {
  double len = std::hypot(b.x - a.x, b.y - a.y);
  auto n = static_cast<std::size_t>(std::ceil(len / step));
  if (n == 0) {
    out.push_back(a);
    return;
  }
  for (std::size_t i = 0; i <= n; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(n);
    out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
  }
}

inline P2 as_p2(const Point& p) { return {p.u.value(), p.v.value()}; }

/// Outline samples of a finished shape, built from the drawing rules:
/// pencil polyline, box-inscribed ellipse, axis-aligned rectangle, and an
/// arrow shaft with two 30-degree head strokes of length min(0.03, len/4).
inline std::vector<P2> sample_shape(const annot::Shape& s, double step) {
  std::vector<P2> out;
  if (s.points.empty()) return out;
  P2 p = as_p2(s.points.front()), q = as_p2(s.points.back());
  switch (s.tool) {
    case Tool::Pencil:
      if (s.points.size() == 1) out.push_back(p);
      for (std::size_t i = 1; i < s.points.size(); ++i) {
        sample_segment(as_p2(s.points[i - 1]), as_p2(s.points[i]), step, out);
      }
      break;
    case Tool::Rectangle:
      sample_segment(p, {q.x, p.y}, step, out);
      sample_segment({q.x, p.y}, q, step, out);
      sample_segment(q, {p.x, q.y}, step, out);
      sample_segment({p.x, q.y}, p, step, out);
      break;
    case Tool::Oval: {
      double cx = (p.x + q.x) / 2, cy = (p.y + q.y) / 2;
      double rx = std::abs(q.x - p.x) / 2, ry = std::abs(q.y - p.y) / 2;
      double r = std::max(rx, ry);
      if (r == 0) {
        out.push_back({cx, cy});
        break;
      }
      auto n = static_cast<std::size_t>(std::ceil(2 * std::numbers::pi * r / step));
      for (std::size_t i = 0; i < n; ++i) {
        double t = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        out.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
      }
      break;
    }
    case Tool::Arrow: {
      sample_segment(p, q, step, out);
      double len = std::hypot(q.x - p.x, q.y - p.y);
      if (len == 0) break;
      double head = std::min(0.03, len / 4);
      double back = std::atan2(p.y - q.y, p.x - q.x);
      for (double off : {std::numbers::pi / 6, -std::numbers::pi / 6}) {
        sample_segment(q, {q.x + head * std::cos(back + off), q.y + head * std::sin(back + off)},
                       step, out);
      }
      break;
    }
  }
  return out;
}

inline std::vector<P2> sample_path(const std::vector<Point>& path, double step) {
  std::vector<P2> out;
  if (path.size() == 1) out.push_back(as_p2(path[0]));
  for (std::size_t i = 1; i < path.size(); ++i) sample_segment(as_p2(path[i - 1]), as_p2(path[i]), step, out);
  return out;
}

/// Smallest pairwise distance between the clouds if it is at most `limit`,
/// else nullopt. Stops early once a pair at or below `good_enough` is seen.
inline std::optional<double> min_distance_within(const std::vector<P2>& a, const std::vector<P2>& b,
                                                 double limit, double good_enough = -1) {
  if (a.empty() || b.empty()) return std::nullopt;
  const double cell = std::max(limit, 1e-3);
  auto key = [&](double x, double y) {
    auto ix = static_cast<std::int64_t>(std::floor(x / cell));
    auto iy = static_cast<std::int64_t>(std::floor(y / cell));
    return std::pair{ix, iy};
  };
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<P2>> grid;
  for (const P2& p : b) grid[key(p.x, p.y)].push_back(p);
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<P2>> agrid;
  for (const P2& p : a) agrid[key(p.x, p.y)].push_back(p);
  double best2 = limit * limit;
  bool found = false;
  for (const auto& [k, pts] : agrid) {
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = grid.find({k.first + dx, k.second + dy});
        if (it == grid.end()) continue;
        for (const P2& p : pts) {
          for (const P2& q : it->second) {
            double d2 = (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y);
            if (d2 <= best2) {
              best2 = d2;
              found = true;
              if (d2 <= good_enough * good_enough && good_enough >= 0) return std::sqrt(d2);
            }
          }
        }
      }
    }
  }
  if (!found) return std::nullopt;
  return std::sqrt(best2);
}

// ---------------------------------------------------------------------------
// Randomized eraser cases and the dense-sampling verdict.

struct EraserCase {
  std::vector<annot::Shape> shapes;
  std::vector<Point> path;
  Norm radius;
};

inline EraserCase rand_eraser_case(Rng& rng) {
  EraserCase c;
  std::size_t n = 1 + rng() % 4;
  for (std::size_t i = 0; i < n; ++i) {
    annot::Shape s;
    s.id = i;
    s.tool = kAllTools[rng() % 4];
    s.points.push_back(rand_point(rng, 100'000, 900'000));
    std::size_t extra = s.tool == Tool::Pencil ? 1 + rng() % 5 : 1;
    for (std::size_t j = 0; j < extra; ++j) s.points.push_back(jitter(rng, s.points.back(), 150'000));
    c.shapes.push_back(std::move(s));
  }
  const annot::Shape& near = c.shapes[rng() % n];
  c.path.push_back(jitter(rng, near.points[rng() % near.points.size()], 80'000));
  for (std::size_t j = rng() % 4; j > 0; --j) c.path.push_back(jitter(rng, c.path.back(), 40'000));
  c.radius = rand_norm(rng, 1'000, 100'000);
  return c;
}

inline constexpr double kDenseStep = 1e-4;
inline constexpr double kBandBelow = 1e-6;
inline constexpr double kBandAbove = 2e-4;

/// Ids the dense sampler says are hit, or nullopt when some shape's sampled
/// distance falls in the band where sampling error could flip the verdict.
inline std::optional<std::vector<std::uint64_t>> dense_hits(const EraserCase& c) {
  const double r = c.radius.value();
  std::vector<P2> path = sample_path(c.path, kDenseStep);
  std::vector<std::uint64_t> hits;
  for (const annot::Shape& s : c.shapes) {
    auto d = min_distance_within(sample_shape(s, kDenseStep), path, r + kBandAbove, r - kBandBelow);
    if (!d) continue;
    if (*d > r - kBandBelow) return std::nullopt;
    hits.push_back(s.id);
  }
  return hits;
}

/// Bitwise CRC-64/XZ (reflected poly 0xC96C5795D7870F42), independent of the
/// table-driven one in the library.
inline std::uint64_t crc64_xz_bitwise(const void* data, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  std::uint64_t crc = ~0ULL;
  for (std::size_t i = 0; i < n; ++i) {
    crc ^= p[i];
    for (int b = 0; b < 8; ++b) crc = (crc >> 1) ^ (0xC96C5795D7870F42ULL & (0 - (crc & 1)));
  }
  return ~crc;
}

// ---------------------------------------------------------------------------
// Recording fixtures.

/// The single-record file from the format description, laid out byte by
/// byte: one Undo proposal on Site at offset 0, session "demo".
inline std::vector<std::uint8_t> hand_assembled_undo_file(std::uint64_t wallclock_us) {
  const std::string text = R"({"stream":"Site","type":"Undo"})";
  std::vector<std::uint8_t> out = {'S', 'V', 'R', 'S', 0x01, 0x00, 0x00, 0x00};
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(wallclock_us >> (8 * i)));
  out.push_back(4);
  for (char c : std::string("demo")) out.push_back(static_cast<std::uint8_t>(c));
  std::vector<std::uint8_t> rec = {0x02, 0, 0, 0, 0, 0, 0, 0, 0};
  rec.push_back(static_cast<std::uint8_t>(text.size()));
  rec.insert(rec.end(), {0, 0, 0});
  for (char c : text) rec.push_back(static_cast<std::uint8_t>(c));
  out.insert(out.end(), rec.begin(), rec.end());
  std::uint64_t crc = crc64_xz_bitwise(rec.data(), rec.size());
  out.push_back(0xFF);
  for (int i = 0; i < 8; ++i) out.push_back(i == 0 ? 1 : 0);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
  return out;
}

inline void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& b) {
  std::FILE* f = std::fopen(p.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot write " + p.string());
  std::fwrite(b.data(), 1, b.size(), f);
  std::fclose(f);
}

struct SynthesizedSession {
  std::vector<std::string> annotations;
  std::uint64_t frames = 0;
  std::uint64_t records = 0;
};

/// Writes a finalized recording shaped like a live session: handshake
/// signals, Surround360/Site/Vitals frames at `fps`, and at least
/// `min_events` valid annotation events spread over the run.
inline SynthesizedSession synthesize_session(const std::filesystem::path& path, Rng& rng,
                                             double seconds, double fps, std::size_t min_events) {
  SynthesizedSession out;
  std::vector<AnnotationEvent> events;
  while (events.size() < min_events) {
    auto run = run_random_sequence(rng, min_events);
    events = std::move(run.events);
  }
  const auto duration = static_cast<std::uint64_t>(seconds * 1e6);
  const auto interval = static_cast<std::uint64_t>(1e6 / fps);

  std::vector<record::Record> recs;
  const SessionId id("synth");
  const std::vector<SignalMessage> signals = {
      sig::Hello{id, PeerRole::RoomPublisher, kProtoVersion},
      sig::Hello{id, PeerRole::RemoteGuide, kProtoVersion},
      sig::StreamAck{{StreamKind::Surround360, StreamKind::Site, StreamKind::Vitals}},
      sig::StreamAck{{StreamKind::GuideView}},
  };
  for (std::size_t i = 0; i < signals.size(); ++i) {
    recs.push_back({i, record::SignalText{encode_signal(signals[i])}});
  }
  const StreamKind kinds[] = {StreamKind::Surround360, StreamKind::Site, StreamKind::Vitals};
  for (std::size_t k = 0; k < 3; ++k) {
    std::uint64_t seq = 0;
    for (std::uint64_t t = 1000 + 3000 * k; t < duration; t += interval) {
      MediaFrame f;
      f.stream = kinds[k];
      f.seq = seq++;
      f.ts_us = t;
      f.key = seq % 10 == 1;
      f.content_type = "image/jpeg";
      Bytes payload(16 + rng() % 48);
      for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
      f.payload = std::make_shared<const Bytes>(std::move(payload));
      recs.push_back({t, std::move(f)});
      ++out.frames;
    }
  }
  std::vector<std::uint64_t> times;
  for (std::size_t i = 0; i < events.size(); ++i) times.push_back(10'000 + rng() % (duration - 20'000));
  std::sort(times.begin(), times.end());
  for (std::size_t i = 0; i < events.size(); ++i) {
    AnnotationEvent e = events[i];
    e.ts_us = times[i];
    std::string text = encode_annotation(e);
    out.annotations.push_back(text);
    recs.push_back({times[i], record::AnnotationText{std::move(text)}});
  }
  std::stable_sort(recs.begin(), recs.end(),
                   [](const auto& a, const auto& b) { return a.offset_us < b.offset_us; });
  record::RecordingWriter w(path, record::Header{record::kFormatVersion, 1'700'000'000'000'000ULL, "synth"});
  for (const auto& r : recs) w.append(r);
  w.finalize();
  out.records = recs.size();
  return out;
}

}  // namespace survivrs::testing

#endif  // SURVIVRS_TESTS_SUPPORT_HPP
