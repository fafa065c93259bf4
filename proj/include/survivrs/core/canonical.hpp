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

#ifndef SURVIVRS_CORE_CANONICAL_HPP
#define SURVIVRS_CORE_CANONICAL_HPP

// Canonical text encoding of control-channel events.
//
//   * JSON object, keys sorted ascending by code point, no whitespace
//   * normalized quantities (coordinates, width, radius) as fixed 6 decimals
//   * integers bare; strings UTF-8, escaped as JSON requires
//
// The same bytes go over the wire and into recordings, so encode_event must
// stay a pure function of the event value.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "survivrs/core/events.hpp"

namespace survivrs {

class MalformedEvent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string json_string(std::string_view s) {
  return nlohmann::json(std::string(s)).dump(-1, ' ', false,
                                              nlohmann::json::error_handler_t::strict);
}

/// Collects key/raw-value pairs and emits them key-sorted.
class CanonicalObject {
 public:
  CanonicalObject& raw(std::string key, std::string value) {
    fields_.emplace_back(std::move(key), std::move(value));
    return *this;
  }
  CanonicalObject& str(std::string key, std::string_view value) {
    return raw(std::move(key), json_string(value));
  }
  CanonicalObject& uint(std::string key, std::uint64_t v) {
    return raw(std::move(key), std::to_string(v));
  }
  CanonicalObject& opt_uint(std::string key, const std::optional<std::uint64_t>& v) {
    if (v) uint(std::move(key), *v);
    return *this;
  }
  CanonicalObject& norm(std::string key, Norm n) { return raw(std::move(key), n.fixed6()); }

  std::string finish() {
    std::sort(fields_.begin(), fields_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string out = "{";
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      if (i) out += ',';
      out += json_string(fields_[i].first);
      out += ':';
      out += fields_[i].second;
    }
    out += '}';
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

inline std::string point_json(const Point& p) {
  return "[" + p.u.fixed6() + "," + p.v.fixed6() + "]";
}

inline std::string stream_list_json(StreamSet s) {
  std::string out = "[";
  bool first = true;
  s.for_each([&](StreamKind k) {
    if (!first) out += ',';
    first = false;
    out += json_string(to_string(k));
  });
  return out + "]";
}

struct ActionEncoder {
  CanonicalObject& o;
  void common(std::string_view type, StreamKind s) {
    o.str("type", type).str("stream", to_string(s));
  }
  void operator()(const act::ZoomIn& a) { common("ZoomIn", a.stream); }
  void operator()(const act::ZoomOut& a) { common("ZoomOut", a.stream); }
  void operator()(const act::BeginShape& a) {
    common("BeginShape", a.stream);
    o.str("tool", to_string(a.tool))
        .raw("point", point_json(a.point))
        .raw("color", "[" + std::to_string(a.color.r) + "," + std::to_string(a.color.g) + "," +
                          std::to_string(a.color.b) + "," + std::to_string(a.color.a) + "]")
        .norm("width", a.width);
  }
  void operator()(const act::ExtendShape& a) {
    common("ExtendShape", a.stream);
    o.raw("point", point_json(a.point));
  }
  void operator()(const act::EndShape& a) { common("EndShape", a.stream); }
  void operator()(const act::Erase& a) {
    common("Erase", a.stream);
    std::string path = "[";
    for (std::size_t i = 0; i < a.path.size(); ++i) {
      if (i) path += ',';
      path += point_json(a.path[i]);
    }
    o.raw("path", path + "]").norm("radius", a.radius);
  }
  void operator()(const act::Undo& a) { common("Undo", a.stream); }
  void operator()(const act::Redo& a) { common("Redo", a.stream); }
  void operator()(const act::PlayPauseScreenshot& a) { common("PlayPauseScreenshot", a.stream); }
};

struct SignalEncoder {
  CanonicalObject& o;
  void operator()(const sig::Hello& m) {
    o.str("type", "Hello")
        .str("session", m.session.str())
        .str("role", to_string(m.role))
        .uint("proto_version", m.proto_version);
  }
  void operator()(const sig::StreamAdvertise& m) {
    std::string list = "[";
    bool first = true;
    for (const auto& [kind, ct] : m.streams) {
      if (!first) list += ',';
      first = false;
      list += CanonicalObject().str("kind", to_string(kind)).str("content_type", ct).finish();
    }
    o.str("type", "StreamAdvertise").raw("streams", list + "]");
  }
  void operator()(const sig::StreamRequest& m) {
    o.str("type", "StreamRequest").raw("streams", stream_list_json(m.streams));
  }
  void operator()(const sig::StreamAck& m) {
    o.str("type", "StreamAck").raw("streams", stream_list_json(m.streams));
  }
  void operator()(const sig::Bye& m) { o.str("type", "Bye").str("reason", m.reason); }
};

}  // namespace detail

inline std::string encode_annotation(const AnnotationEvent& e) {
  detail::CanonicalObject o;
  std::visit(detail::ActionEncoder{o}, e.action);
  o.opt_uint("seq", e.seq).opt_uint("ts_us", e.ts_us).opt_uint("frame_seq", e.frame_seq);
  return o.finish();
}

inline std::string encode_signal(const SignalMessage& m) {
  detail::CanonicalObject o;
  std::visit(detail::SignalEncoder{o}, m);
  return o.finish();
}

inline std::string encode_rejected(const Rejected& r) {
  return detail::CanonicalObject().str("type", "Rejected").str("code", r.code).str("event", r.event).finish();
}

/// Canonical encoding; deterministic and platform independent.
inline std::string encode_event(const SessionEvent& e) {
  struct V {
    std::string operator()(const AnnotationEvent& a) const { return encode_annotation(a); }
    std::string operator()(const SignalMessage& s) const { return encode_signal(s); }
    std::string operator()(const Rejected& r) const { return encode_rejected(r); }
  };
  return std::visit(V{}, e);
}

namespace detail {

using nlohmann::json;

[[noreturn]] inline void malformed(const std::string& why) { throw MalformedEvent(why); }

class FieldReader {
 public:
  FieldReader(const json& obj, std::string_view type) : obj_(obj), type_(type) {}

  /// Rejects keys outside the declared set.
  void only(std::initializer_list<std::string_view> allowed) const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
        malformed(std::string(type_) + ": unexpected key '" + it.key() + "'");
      }
    }
  }

  const json& need(std::string_view key) const {
    auto it = obj_.find(std::string(key));
    if (it == obj_.end()) malformed(std::string(type_) + ": missing '" + std::string(key) + "'");
    return *it;
  }

  bool has(std::string_view key) const { return obj_.contains(std::string(key)); }

  std::string string(std::string_view key) const {
    const json& v = need(key);
    if (!v.is_string()) malformed(std::string(key) + " must be a string");
    return v.get<std::string>();
  }

  std::uint64_t uint(std::string_view key) const { return as_uint(need(key), key); }

  std::optional<std::uint64_t> opt_uint(std::string_view key) const {
    if (!has(key)) return std::nullopt;
    return uint(key);
  }

  static std::uint64_t as_uint(const json& v, std::string_view what) {
    if (!v.is_number_unsigned()) malformed(std::string(what) + " must be an unsigned integer");
    return v.get<std::uint64_t>();
  }

  static Norm as_unit(const json& v, std::string_view what) {
    if (!v.is_number()) malformed(std::string(what) + " must be a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) malformed(std::string(what) + " not finite");
    Norm n = Norm::from_double(d);
    if (!n.in_unit_range()) malformed(std::string(what) + " out of [0,1]");
    return n;
  }

  static Point as_point(const json& v, std::string_view what) {
    if (!v.is_array() || v.size() != 2) malformed(std::string(what) + " must be [u,v]");
    return {as_unit(v[0], what), as_unit(v[1], what)};
  }

  Point point(std::string_view key) const { return as_point(need(key), key); }

  Norm width(std::string_view key) const {
    Norm n = as_unit(need(key), key);
    if (!valid_width(n)) malformed(std::string(key) + " out of (0,0.1]");
    return n;
  }

  StreamKind annot_stream() const {
    auto k = parse_stream_kind(string("stream"));
    if (!k || !is_annotatable(*k)) malformed("stream must be Site or Vitals");
    return *k;
  }

  StreamSet stream_list(std::string_view key) const {
    const json& v = need(key);
    if (!v.is_array()) malformed(std::string(key) + " must be an array");
    StreamSet s;
    for (const auto& item : v) {
      if (!item.is_string()) malformed("stream names must be strings");
      auto k = parse_stream_kind(item.get<std::string>());
      if (!k) malformed("unknown stream kind");
      if (s.contains(*k)) malformed("duplicate stream kind");
      s.insert(*k);
    }
    return s;
  }

 private:
  const json& obj_;
  std::string_view type_;
};

inline AnnotationEvent decode_annotation_object(const FieldReader& f, std::string_view type) {
  AnnotationEvent e;
  auto basic = [&](auto tag) {
    f.only({"type", "stream", "seq", "ts_us", "frame_seq"});
    using T = decltype(tag);
    return AnnotationAction{T{f.annot_stream()}};
  };
  if (type == "ZoomIn") {
    e.action = basic(act::ZoomIn{});
  } else if (type == "ZoomOut") {
    e.action = basic(act::ZoomOut{});
  } else if (type == "EndShape") {
    e.action = basic(act::EndShape{});
  } else if (type == "Undo") {
    e.action = basic(act::Undo{});
  } else if (type == "Redo") {
    e.action = basic(act::Redo{});
  } else if (type == "PlayPauseScreenshot") {
    e.action = basic(act::PlayPauseScreenshot{});
  } else if (type == "BeginShape") {
    f.only({"type", "stream", "tool", "point", "color", "width", "seq", "ts_us", "frame_seq"});
    act::BeginShape b;
    b.stream = f.annot_stream();
    auto tool = parse_tool(f.string("tool"));
    if (!tool) malformed("unknown tool");
    b.tool = *tool;
    b.point = f.point("point");
    const json& c = f.need("color");
    if (!c.is_array() || c.size() != 4) malformed("color must be [r,g,b,a]");
    std::uint8_t ch[4];
    for (int i = 0; i < 4; ++i) {
      std::uint64_t x = FieldReader::as_uint(c[i], "color");
      if (x > 255) malformed("color channel > 255");
      ch[i] = static_cast<std::uint8_t>(x);
    }
    b.color = {ch[0], ch[1], ch[2], ch[3]};
    b.width = f.width("width");
    e.action = b;
  } else if (type == "ExtendShape") {
    f.only({"type", "stream", "point", "seq", "ts_us", "frame_seq"});
    e.action = act::ExtendShape{f.annot_stream(), f.point("point")};
  } else if (type == "Erase") {
    f.only({"type", "stream", "path", "radius", "seq", "ts_us", "frame_seq"});
    act::Erase er;
    er.stream = f.annot_stream();
    const json& p = f.need("path");
    if (!p.is_array() || p.empty()) malformed("path must be a non-empty array");
    for (const auto& pt : p) er.path.push_back(FieldReader::as_point(pt, "path"));
    er.radius = f.width("radius");
    e.action = std::move(er);
  } else {
    malformed("unknown event type '" + std::string(type) + "'");
  }
  e.seq = f.opt_uint("seq");
  e.ts_us = f.opt_uint("ts_us");
  e.frame_seq = f.opt_uint("frame_seq");
  return e;
}

inline SignalMessage decode_signal_object(const FieldReader& f, std::string_view type) {
  if (type == "Hello") {
    f.only({"type", "session", "role", "proto_version"});
    auto id = SessionId::parse(f.string("session"));
    if (!id) malformed("invalid session id");
    auto role = parse_role(f.string("role"));
    if (!role) malformed("unknown role");
    std::uint64_t v = f.uint("proto_version");
    if (v > 0xFFFFFFFFu) malformed("proto_version out of range");
    return sig::Hello{*id, *role, static_cast<std::uint32_t>(v)};
  }
  if (type == "StreamAdvertise") {
    f.only({"type", "streams"});
    const json& list = f.need("streams");
    if (!list.is_array()) malformed("streams must be an array");
    sig::StreamAdvertise adv;
    for (const auto& item : list) {
      if (!item.is_object()) malformed("stream offer must be an object");
      FieldReader o(item, "offer");
      o.only({"kind", "content_type"});
      auto k = parse_stream_kind(o.string("kind"));
      if (!k) malformed("unknown stream kind");
      if (adv.streams.count(*k)) malformed("duplicate stream kind");
      adv.streams.emplace(*k, o.string("content_type"));
    }
    return adv;
  }
  if (type == "StreamRequest") {
    f.only({"type", "streams"});
    return sig::StreamRequest{f.stream_list("streams")};
  }
  if (type == "StreamAck") {
    f.only({"type", "streams"});
    return sig::StreamAck{f.stream_list("streams")};
  }
  f.only({"type", "reason"});
  return sig::Bye{f.string("reason")};
}

inline bool is_signal_type(std::string_view t) {
  return t == "Hello" || t == "StreamAdvertise" || t == "StreamRequest" || t == "StreamAck" ||
         t == "Bye";
}

}  // namespace detail

/// Inverse of encode_event. Throws MalformedEvent on bad syntax, unknown
/// types or keys, and out-of-range values.
inline SessionEvent decode_event(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw MalformedEvent(std::string("bad JSON: ") + e.what());
  }
  if (!doc.is_object()) throw MalformedEvent("event must be a JSON object");
  auto t = doc.find("type");
  if (t == doc.end() || !t->is_string()) throw MalformedEvent("missing string 'type'");
  std::string type = t->get<std::string>();
  detail::FieldReader f(doc, type);
  try {
    if (detail::is_signal_type(type)) return detail::decode_signal_object(f, type);
    if (type == "Rejected") {
      f.only({"type", "code", "event"});
      return Rejected{f.string("code"), f.string("event")};
    }
    return detail::decode_annotation_object(f, type);
  } catch (const json::exception& e) {
    throw MalformedEvent(std::string("bad field: ") + e.what());
  }
}

inline AnnotationEvent decode_annotation(std::string_view text) {
  SessionEvent e = decode_event(text);
  if (auto* a = std::get_if<AnnotationEvent>(&e)) return std::move(*a);
  throw MalformedEvent("not an annotation event");
}

inline SignalMessage decode_signal(std::string_view text) {
  SessionEvent e = decode_event(text);
  if (auto* s = std::get_if<SignalMessage>(&e)) return std::move(*s);
  throw MalformedEvent("not a signal message");
}

}  // namespace survivrs

#endif  // SURVIVRS_CORE_CANONICAL_HPP
