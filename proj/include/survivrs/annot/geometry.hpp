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

#ifndef SURVIVRS_ANNOT_GEOMETRY_HPP
#define SURVIVRS_ANNOT_GEOMETRY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "survivrs/core/events.hpp"

namespace survivrs::annot {

struct Shape {
  std::uint64_t id = 0;
  Tool tool = Tool::Pencil;
  std::vector<Point> points;
  Rgba color;
  Norm width = Norm::from_micros(5000);
  bool operator==(const Shape&) const = default;
};

struct Vec2 {
  double x = 0, y = 0;
};

inline Vec2 to_vec(const Point& p) { return {p.u.value(), p.v.value()}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Segment {
  Vec2 a, b;
};

inline double point_segment_distance(Vec2 p, const Segment& s) {
  Vec2 d = s.b - s.a;
  double len2 = dot(d, d);
  if (len2 == 0.0) return norm(p - s.a);
  double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return norm(p - (s.a + t * d));
}

inline bool segments_intersect(const Segment& s, const Segment& t) {
  auto orient = [](Vec2 a, Vec2 b, Vec2 c) {
    double v = cross(b - a, c - a);
    return (v > 0) - (v < 0);
  };
  auto on_seg = [](Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
  };
  int o1 = orient(s.a, s.b, t.a), o2 = orient(s.a, s.b, t.b);
  int o3 = orient(t.a, t.b, s.a), o4 = orient(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_seg(s.a, s.b, t.a)) return true;
  if (o2 == 0 && on_seg(s.a, s.b, t.b)) return true;
  if (o3 == 0 && on_seg(t.a, t.b, s.a)) return true;
  if (o4 == 0 && on_seg(t.a, t.b, s.b)) return true;
  return false;
}

inline double segment_distance(const Segment& s, const Segment& t) {
  if (segments_intersect(s, t)) return 0.0;
  return std::min({point_segment_distance(s.a, t), point_segment_distance(s.b, t),
                   point_segment_distance(t.a, s), point_segment_distance(t.b, s)});
}

/// Axis-aligned ellipse inscribed in the box spanned by two corner points.
struct Ellipse {
  Vec2 center;
  double rx = 0, ry = 0;
  Vec2 at(double theta) const {
    return {center.x + rx * std::cos(theta), center.y + ry * std::sin(theta)};
  }
};

inline Ellipse ellipse_from_box(Vec2 p, Vec2 q) {
  return {{(p.x + q.x) / 2, (p.y + q.y) / 2}, std::abs(q.x - p.x) / 2, std::abs(q.y - p.y) / 2};
}

/// Minimum distance between a segment and an ellipse outline. Exact when the
/// segment crosses the outline; otherwise a sampled minimum refined by
/// golden-section search on each local minimum.
inline double segment_ellipse_distance(const Segment& s, const Ellipse& e) {
  if (e.rx == 0.0 || e.ry == 0.0) {
    Vec2 half{e.rx, e.ry};
    return segment_distance(s, {e.center - half, e.center + half});
  }
  // Crossing test: solve |(P(t) - c) / r|^2 = 1 for t in [0, 1].
  Vec2 a{(s.a.x - e.center.x) / e.rx, (s.a.y - e.center.y) / e.ry};
  Vec2 d{(s.b.x - s.a.x) / e.rx, (s.b.y - s.a.y) / e.ry};
  double qa = dot(d, d), qb = 2 * dot(a, d), qc = dot(a, a) - 1;
  if (qa == 0.0) {
    if (qc == 0.0) return 0.0;
  } else {
    double disc = qb * qb - 4 * qa * qc;
    if (disc >= 0) {
      double sq = std::sqrt(disc);
      for (double t : {(-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)}) {
        if (t >= 0.0 && t <= 1.0) return 0.0;
      }
    }
  }

  constexpr int kSamples = 1024;
  constexpr double kStep = 2 * std::numbers::pi / kSamples;
  auto f = [&](double th) { return point_segment_distance(e.at(th), s); };
  std::array<double, kSamples> val{};
  for (int i = 0; i < kSamples; ++i) val[i] = f(i * kStep);
  double best = *std::min_element(val.begin(), val.end());
  for (int i = 0; i < kSamples; ++i) {
    double prev = val[(i + kSamples - 1) % kSamples], next = val[(i + 1) % kSamples];
    if (val[i] > prev || val[i] > next) continue;
    double lo = (i - 1) * kStep, hi = (i + 1) * kStep;
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 60; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - kInvPhi * (hi - lo);
        f1 = f(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + kInvPhi * (hi - lo);
        f2 = f(x2);
      }
    }
    best = std::min({best, f1, f2});
  }
  return best;
}

/// Arrowhead barbs: length min(0.03, 0.25 * shaft) at +-30 degrees.
inline std::vector<Segment> arrow_segments(Vec2 tail, Vec2 tip) {
  std::vector<Segment> segs{{tail, tip}};
  Vec2 d = tail - tip;
  double len = norm(d);
  if (len == 0.0) return segs;
  double head = std::min(0.03, 0.25 * len);
  Vec2 u = (1.0 / len) * d;
  for (double ang : {std::numbers::pi / 6, -std::numbers::pi / 6}) {
    Vec2 r{u.x * std::cos(ang) - u.y * std::sin(ang), u.x * std::sin(ang) + u.y * std::cos(ang)};
    segs.push_back({tip, tip + head * r});
  }
  return segs;
}

/// Straight-segment outline of a shape. Ovals are handled separately.
inline std::vector<Segment> outline_segments(const Shape& s) {
  std::vector<Segment> out;
  if (s.points.empty()) return out;
  if (s.tool == Tool::Pencil) {
    if (s.points.size() == 1) {
      Vec2 p = to_vec(s.points[0]);
      out.push_back({p, p});
    }
    for (std::size_t i = 1; i < s.points.size(); ++i) {
      out.push_back({to_vec(s.points[i - 1]), to_vec(s.points[i])});
    }
    return out;
  }
  Vec2 p = to_vec(s.points.front());
  Vec2 q = to_vec(s.points.back());
  if (s.tool == Tool::Rectangle) {
    Vec2 c1{q.x, p.y}, c2{p.x, q.y};
    out = {{p, c1}, {c1, q}, {q, c2}, {c2, p}};
  } else if (s.tool == Tool::Arrow) {
    out = arrow_segments(p, q);
  }
  return out;
}

inline double shape_segment_distance(const Shape& s, const Segment& seg) {
  if (s.tool == Tool::Oval && !s.points.empty()) {
    return segment_ellipse_distance(seg,
                                    ellipse_from_box(to_vec(s.points.front()), to_vec(s.points.back())));
  }
  double best = INFINITY;
  for (const Segment& o : outline_segments(s)) best = std::min(best, segment_distance(seg, o));
  return best;
}

inline std::vector<Segment> path_segments(std::span<const Point> path) {
  std::vector<Segment> segs;
  if (path.size() == 1) {
    Vec2 p = to_vec(path[0]);
    segs.push_back({p, p});
  }
  for (std::size_t i = 1; i < path.size(); ++i) {
    segs.push_back({to_vec(path[i - 1]), to_vec(path[i])});
  }
  return segs;
}

/// Minimum distance between a shape's outline and an eraser path.
inline double shape_path_distance(const Shape& s, std::span<const Point> path) {
  double best = INFINITY;
  for (const Segment& seg : path_segments(path)) {
    best = std::min(best, shape_segment_distance(s, seg));
    if (best == 0.0) break;
  }
  return best;
}

/// Ids of shapes whose outline comes within `radius` of the eraser path,
/// in the order the shapes are given.
inline std::vector<std::uint64_t> hit_test_erase(std::span<const Shape> shapes,
                                                 std::span<const Point> path, Norm radius) {
  std::vector<std::uint64_t> hits;
  const double r = radius.value();
  for (const Shape& s : shapes) {
    if (shape_path_distance(s, path) <= r) hits.push_back(s.id);
  }
  return hits;
}

}  // namespace survivrs::annot

#endif  // SURVIVRS_ANNOT_GEOMETRY_HPP
