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

#ifndef SURVIVRS_CORE_FRAME_HPP
#define SURVIVRS_CORE_FRAME_HPP

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include "survivrs/core/bytes.hpp"
#include "survivrs/core/types.hpp"

namespace survivrs {

inline constexpr std::size_t kMaxPayloadBytes = 8u * 1024u * 1024u;
inline constexpr std::uint8_t kFrameRecordType = 0x01;

/// Opaque media unit moved by the relay. The payload is shared and immutable
/// so fan-out to many subscribers does not copy it.
struct MediaFrame {
  StreamKind stream = StreamKind::Surround360;
  std::uint64_t seq = 0;
  std::uint64_t ts_us = 0;
  bool key = true;
  std::string content_type;
  std::shared_ptr<const Bytes> payload = std::make_shared<const Bytes>();

  const Bytes& bytes() const noexcept { return *payload; }

  bool operator==(const MediaFrame& o) const {
    return stream == o.stream && seq == o.seq && ts_us == o.ts_us && key == o.key &&
           content_type == o.content_type && *payload == *o.payload;
  }
};

/// What a publisher hands to the relay before it is stamped.
struct FrameData {
  std::string content_type;
  std::shared_ptr<const Bytes> payload;
  bool key = true;

  static FrameData of(std::string content_type, Bytes payload, bool key = true) {
    return {std::move(content_type), std::make_shared<const Bytes>(std::move(payload)), key};
  }
};

class FrameFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Frame fields after the leading record-type byte; shared by the wire
/// message and the SVRS frame record.
inline void write_frame_body(ByteWriter& w, const MediaFrame& f) {
  if (f.content_type.size() > 0xFFFF) throw FrameFormatError("content_type too long");
  if (f.payload->size() > kMaxPayloadBytes) throw FrameFormatError("payload too large");
  w.u8(code_of(f.stream));
  w.u64(f.seq);
  w.u64(f.ts_us);
  w.u8(f.key ? 1 : 0);
  w.u16(static_cast<std::uint16_t>(f.content_type.size()));
  w.raw(f.content_type);
  w.u32(static_cast<std::uint32_t>(f.payload->size()));
  w.raw(*f.payload);
}

inline MediaFrame read_frame_body(ByteReader& r) {
  auto fail = [](const char* what) -> MediaFrame { throw FrameFormatError(what); };
  MediaFrame f;
  auto code = r.u8();
  if (!code) return fail("truncated frame: stream");
  auto kind = stream_kind_from_code(*code);
  if (!kind) return fail("unknown stream kind code");
  f.stream = *kind;
  auto seq = r.u64();
  auto ts = r.u64();
  auto key = r.u8();
  if (!seq || !ts || !key) return fail("truncated frame header");
  if (*key > 1) return fail("bad key flag");
  f.seq = *seq;
  f.ts_us = *ts;
  f.key = *key == 1;
  auto ct_len = r.u16();
  if (!ct_len) return fail("truncated frame: content_type length");
  auto ct = r.take(*ct_len);
  if (!ct) return fail("truncated frame: content_type");
  f.content_type.assign(as_chars(*ct));
  auto len = r.u32();
  if (!len) return fail("truncated frame: payload length");
  if (*len > kMaxPayloadBytes) return fail("payload too large");
  auto body = r.take(*len);
  if (!body) return fail("truncated frame: payload");
  f.payload = std::make_shared<const Bytes>(body->begin(), body->end());
  return f;
}

/// Binary WebSocket message for one frame.
inline Bytes encode_frame_message(const MediaFrame& f) {
  Bytes out;
  out.reserve(1 + 1 + 8 + 8 + 1 + 2 + f.content_type.size() + 4 + f.payload->size());
  ByteWriter w(out);
  w.u8(kFrameRecordType);
  write_frame_body(w, f);
  return out;
}

inline MediaFrame decode_frame_message(ByteView msg) {
  ByteReader r(msg);
  auto type = r.u8();
  if (!type || *type != kFrameRecordType) throw FrameFormatError("not a frame message");
  MediaFrame f = read_frame_body(r);
  if (!r.at_end()) throw FrameFormatError("trailing bytes after frame");
  return f;
}

}  // namespace survivrs

#endif  // SURVIVRS_CORE_FRAME_HPP
