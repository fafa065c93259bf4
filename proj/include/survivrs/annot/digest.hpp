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

#ifndef SURVIVRS_ANNOT_DIGEST_HPP
#define SURVIVRS_ANNOT_DIGEST_HPP

// Stable text form and hash of an AnnotationState, so two processes can
// compare their folds without shipping the whole state.

#include <cstdint>
#include <cstdio>
#include <string>

#include <boost/crc.hpp>

#include "survivrs/annot/state.hpp"

namespace survivrs::annot {

namespace detail {

inline void describe_shape(std::string& out, const Shape& s) {
  out += "shape " + std::to_string(s.id) + ' ' + std::string(to_string(s.tool)) + ' ';
  out += std::to_string(s.color.r) + ',' + std::to_string(s.color.g) + ',' +
         std::to_string(s.color.b) + ',' + std::to_string(s.color.a) + ' ';
  out += std::to_string(s.width.micros());
  for (const Point& p : s.points) {
    out += ' ' + std::to_string(p.u.micros()) + ':' + std::to_string(p.v.micros());
  }
  out += '\n';
}

inline void describe_action(std::string& out, const ReversibleAction& a) {
  if (const auto* add = std::get_if<AddShape>(&a)) {
    out += "add ";
    describe_shape(out, add->shape);
    return;
  }
  const auto& er = std::get<EraseShapes>(a);
  out += "erase " + std::to_string(er.removed.size()) + '\n';
  for (const auto& [idx, shape] : er.removed) {
    out += "@" + std::to_string(idx) + ' ';
    describe_shape(out, shape);
  }
}

inline void describe_stream(std::string& out, const char* name, const StreamAnnotations& s) {
  out += std::string("[") + name + "]\n";
  for (const Shape& sh : s.visible) describe_shape(out, sh);
  out += "undo " + std::to_string(s.undo_stack.size()) + '\n';
  for (const auto& a : s.undo_stack) describe_action(out, a);
  out += "redo " + std::to_string(s.redo_stack.size()) + '\n';
  for (const auto& a : s.redo_stack) describe_action(out, a);
  if (s.open_shape) {
    out += "open ";
    describe_shape(out, *s.open_shape);
  }
  if (const auto* p = std::get_if<Paused>(&s.playback)) {
    out += "paused " + (p->at_seq ? std::to_string(*p->at_seq) : std::string("-")) + '\n';
  } else {
    out += "playing\n";
  }
}

}  // namespace detail

/// Line-oriented dump covering every field of the state.
inline std::string describe(const AnnotationState& s) {
  std::string out;
  out += "last_seq " + (s.last_seq ? std::to_string(*s.last_seq) : std::string("-")) + '\n';
  out += "zoomed " + (s.zoomed ? std::string(to_string(*s.zoomed)) : std::string("-")) + '\n';
  detail::describe_stream(out, "Site", s.site);
  detail::describe_stream(out, "Vitals", s.vitals);
  for (const Screenshot& shot : s.screenshots) {
    out += "screenshot " + std::to_string(shot.id) + ' ' + std::string(to_string(shot.stream)) +
           ' ' + (shot.frame_seq ? std::to_string(*shot.frame_seq) : std::string("-")) + ' ' +
           std::to_string(shot.ts_us) + '\n';
    for (const Shape& sh : shot.shapes) detail::describe_shape(out, sh);
  }
  return out;
}

/// CRC-64/XZ of describe(s).
inline std::uint64_t state_hash(const AnnotationState& s) {
  boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, 0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL,
                     true, true>
      crc;
  std::string text = describe(s);
  crc.process_bytes(text.data(), text.size());
  return crc.checksum();
}

inline std::string state_hash_hex(const AnnotationState& s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_hash(s)));
  return buf;
}

}  // namespace survivrs::annot

#endif  // SURVIVRS_ANNOT_DIGEST_HPP
