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

#ifndef SURVIVRS_RECORD_FORMAT_HPP
#define SURVIVRS_RECORD_FORMAT_HPP

// SVRS session recording, version 1. All integers little-endian.
//
//   header   "SVRS" | u16 version=1 | u16 ext_len=0 | u64 wallclock_start_us
//            | u8 id_len | id bytes
//   record   u8 type | u64 offset_us | body
//              0x01 frame:  u8 stream | u64 seq | u64 ts_us | u8 key
//                           | u16 ct_len | ct | u32 len | payload
//              0x02 annotation, 0x03 signal:  u32 len | canonical text
//   trailer  0xFF | u64 record_count | u64 crc64_xz(all record bytes)
//
// A frame record body is the relay wire message minus its leading 0x01.

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/crc.hpp>

#include "survivrs/core/bytes.hpp"
#include "survivrs/core/frame.hpp"

namespace survivrs::record {

inline constexpr std::uint8_t kMagic[4] = {0x53, 0x56, 0x52, 0x53};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::uint8_t kTrailerMarker = 0xFF;

enum class RecordType : std::uint8_t { Frame = 0x01, Annotation = 0x02, Signal = 0x03 };

inline constexpr std::string_view to_string(RecordType t) noexcept {
  switch (t) {
    case RecordType::Frame: return "frame";
    case RecordType::Annotation: return "annotation";
    case RecordType::Signal: return "signal";
  }
  return "?";
}

enum class ErrorCode : std::uint8_t {
  FileNotFound,
  BadMagic,
  UnsupportedVersion,
  MalformedRecord,
  OffsetRegression,
  CountMismatch,
  ChecksumMismatch,
  TrailingBytes,
  StorageFull,
  IoError,
  AlreadyFinalized,
};

inline constexpr std::string_view to_string(ErrorCode c) noexcept {
  switch (c) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::OffsetRegression: return "OffsetRegression";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::TrailingBytes: return "TrailingBytes";
    case ErrorCode::StorageFull: return "StorageFull";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::AlreadyFinalized: return "AlreadyFinalized";
  }
  return "?";
}

class RecordError : public std::runtime_error {
 public:
  RecordError(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + (detail.empty() ? "" : ": " + detail)),
        code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// CRC-64/XZ (ECMA-182 polynomial, reflected, init and xorout all ones).
using Crc64 = boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, 0xFFFFFFFFFFFFFFFFULL,
                                 0xFFFFFFFFFFFFFFFFULL, true, true>;

inline std::uint64_t crc64_xz(ByteView data) {
  Crc64 c;
  c.process_bytes(data.data(), data.size());
  return c.checksum();
}

struct AnnotationText {
  std::string text;
  bool operator==(const AnnotationText&) const = default;
};
struct SignalText {
  std::string text;
  bool operator==(const SignalText&) const = default;
};

using RecordItem = std::variant<MediaFrame, AnnotationText, SignalText>;

struct Record {
  std::uint64_t offset_us = 0;
  RecordItem item;

  RecordType type() const {
    if (std::holds_alternative<MediaFrame>(item)) return RecordType::Frame;
    if (std::holds_alternative<AnnotationText>(item)) return RecordType::Annotation;
    return RecordType::Signal;
  }
  bool operator==(const Record&) const = default;
};

struct Header {
  std::uint16_t version = kFormatVersion;
  std::uint64_t wallclock_start_us = 0;
  std::string session_id;
  bool operator==(const Header&) const = default;
};

struct Trailer {
  std::uint64_t count = 0;
  std::uint64_t checksum = 0;
  bool operator==(const Trailer&) const = default;
};

inline Bytes encode_header(const Header& h) {
  if (h.session_id.size() > 0xFF) throw RecordError(ErrorCode::MalformedRecord, "session id too long");
  Bytes out;
  ByteWriter w(out);
  w.raw(ByteView(kMagic, 4));
  w.u16(h.version);
  w.u16(0);
  w.u64(h.wallclock_start_us);
  w.u8(static_cast<std::uint8_t>(h.session_id.size()));
  w.raw(h.session_id);
  return out;
}

inline void encode_record_into(Bytes& out, const Record& r) {
  ByteWriter w(out);
  w.u8(static_cast<std::uint8_t>(r.type()));
  w.u64(r.offset_us);
  if (const auto* f = std::get_if<MediaFrame>(&r.item)) {
    write_frame_body(w, *f);
    return;
  }
  const std::string& text = r.type() == RecordType::Annotation
                                ? std::get<AnnotationText>(r.item).text
                                : std::get<SignalText>(r.item).text;
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.raw(text);
}

inline Bytes encode_record(const Record& r) {
  Bytes out;
  encode_record_into(out, r);
  return out;
}

inline Bytes encode_trailer(const Trailer& t) {
  Bytes out;
  ByteWriter w(out);
  w.u8(kTrailerMarker);
  w.u64(t.count);
  w.u64(t.checksum);
  return out;
}

/// What finalize() hands back.
struct RecordingFile {
  std::filesystem::path path;
  Header header;
  Trailer trailer;
};

/// Single-writer append-only recording. Offsets must be non-decreasing.
class RecordingWriter {
 public:
  RecordingWriter(std::filesystem::path path, Header header)
      : path_(std::move(path)), header_(std::move(header)) {
    file_.reset(std::fopen(path_.c_str(), "wb"));
    if (!file_) {
      throw RecordError(errno == ENOSPC ? ErrorCode::StorageFull : ErrorCode::IoError,
                        path_.string() + ": " + std::strerror(errno));
    }
    write(encode_header(header_));
  }

  RecordingWriter(const RecordingWriter&) = delete;
  RecordingWriter& operator=(const RecordingWriter&) = delete;

  void append(const Record& r) {
    if (finalized_) throw RecordError(ErrorCode::AlreadyFinalized, path_.string());
    if (last_offset_ && r.offset_us < *last_offset_) {
      throw RecordError(ErrorCode::OffsetRegression,
                        std::to_string(r.offset_us) + " < " + std::to_string(*last_offset_));
    }
    scratch_.clear();
    encode_record_into(scratch_, r);
    write(scratch_);
    crc_.process_bytes(scratch_.data(), scratch_.size());
    last_offset_ = r.offset_us;
    ++count_;
  }

  void append_frame(const MediaFrame& f, std::uint64_t offset_us) { append({offset_us, f}); }
  void append_annotation(std::string text, std::uint64_t offset_us) {
    append({offset_us, AnnotationText{std::move(text)}});
  }
  void append_signal(std::string text, std::uint64_t offset_us) {
    append({offset_us, SignalText{std::move(text)}});
  }

  /// Pushes buffered bytes to the OS; surfaces StorageFull.
  void flush() {
    if (!file_) return;
    if (std::fflush(file_.get()) != 0) fail_io();
  }

  /// Writes the trailer and closes the file. Idempotent.
  const RecordingFile& finalize() {
    if (finalized_) return *result_;
    write(encode_trailer({count_, crc_.checksum()}));
    flush();
    if (std::fclose(file_.release()) != 0) fail_io();
    finalized_ = true;
    result_ = RecordingFile{path_, header_, {count_, crc_.checksum()}};
    return *result_;
  }

  bool finalized() const noexcept { return finalized_; }
  std::uint64_t count() const noexcept { return count_; }
  std::optional<std::uint64_t> last_offset() const noexcept { return last_offset_; }
  const std::filesystem::path& path() const noexcept { return path_; }
  const Header& header() const noexcept { return header_; }

 private:
  struct FileCloser {
    void operator()(std::FILE* f) const {
      if (f) std::fclose(f);
    }
  };

  [[noreturn]] void fail_io() {
    int err = errno;
    throw RecordError(err == ENOSPC ? ErrorCode::StorageFull : ErrorCode::IoError,
                      path_.string() + ": " + std::strerror(err));
  }

  void write(const Bytes& b) {
    if (b.empty()) return;
    if (std::fwrite(b.data(), 1, b.size(), file_.get()) != b.size()) fail_io();
  }

  std::filesystem::path path_;
  Header header_;
  std::unique_ptr<std::FILE, FileCloser> file_;
  Crc64 crc_;
  Bytes scratch_;
  std::uint64_t count_ = 0;
  std::optional<std::uint64_t> last_offset_;
  bool finalized_ = false;
  std::optional<RecordingFile> result_;
};

/// Streaming parser over any byte stream.
class RecordingReader {
 public:
  explicit RecordingReader(std::istream& in) : in_(in) { read_header(); }

  const Header& header() const noexcept { return header_; }

  /// Next record, or nullopt once the trailer has been read. Throws
  /// RecordError(ChecksumMismatch) if the stream ends without a trailer.
  std::optional<Record> next() {
    if (trailer_) return std::nullopt;
    raw_.clear();
    auto type = read_u8_or_eof();
    if (!type) throw RecordError(ErrorCode::ChecksumMismatch, "missing trailer");
    if (*type == kTrailerMarker) {
      Bytes t = read_exact(16, "trailer");
      ByteReader r(t);
      trailer_ = Trailer{*r.u64(), *r.u64()};
      return std::nullopt;
    }
    if (*type < 0x01 || *type > 0x03) {
      throw RecordError(ErrorCode::MalformedRecord, "unknown record type " + std::to_string(*type));
    }
    raw_.push_back(*type);
    append_exact(8, "offset");
    Record rec;
    if (*type == static_cast<std::uint8_t>(RecordType::Frame)) {
      append_exact(1 + 8 + 8 + 1 + 2, "frame header");
      std::uint16_t ct_len = static_cast<std::uint16_t>(raw_[raw_.size() - 2] |
                                                        (raw_[raw_.size() - 1] << 8));
      append_exact(ct_len, "content type");
      append_exact(4, "payload length");
      ByteReader lr(ByteView(raw_).subspan(raw_.size() - 4));
      std::uint32_t len = *lr.u32();
      if (len > kMaxPayloadBytes) throw RecordError(ErrorCode::MalformedRecord, "payload too large");
      append_exact(len, "payload");
      ByteReader r(raw_);
      r.u8();
      rec.offset_us = *r.u64();
      try {
        rec.item = read_frame_body(r);
      } catch (const FrameFormatError& e) {
        throw RecordError(ErrorCode::MalformedRecord, e.what());
      }
    } else {
      append_exact(4, "event length");
      ByteReader lr(ByteView(raw_).subspan(raw_.size() - 4));
      std::uint32_t len = *lr.u32();
      if (len > kMaxPayloadBytes) throw RecordError(ErrorCode::MalformedRecord, "event too large");
      append_exact(len, "event text");
      ByteReader r(raw_);
      r.u8();
      rec.offset_us = *r.u64();
      std::string text(as_chars(ByteView(raw_).subspan(1 + 8 + 4)));
      if (*type == static_cast<std::uint8_t>(RecordType::Annotation)) {
        rec.item = AnnotationText{std::move(text)};
      } else {
        rec.item = SignalText{std::move(text)};
      }
    }
    crc_.process_bytes(raw_.data(), raw_.size());
    ++count_;
    return rec;
  }

  /// Raw bytes of the record last returned by next().
  const Bytes& last_raw() const noexcept { return raw_; }
  const std::optional<Trailer>& trailer() const noexcept { return trailer_; }
  std::uint64_t records_read() const noexcept { return count_; }
  std::uint64_t running_checksum() const { return crc_.checksum(); }
  bool at_eof() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  void read_header() {
    Bytes fixed = read_exact(4 + 2 + 2 + 8 + 1, "header", ErrorCode::BadMagic);
    if (std::memcmp(fixed.data(), kMagic, 4) != 0) throw RecordError(ErrorCode::BadMagic, "");
    ByteReader r(fixed);
    r.take(4);
    header_.version = *r.u16();
    std::uint16_t ext = *r.u16();
    header_.wallclock_start_us = *r.u64();
    std::uint8_t id_len = *r.u8();
    if (header_.version != kFormatVersion) {
      throw RecordError(ErrorCode::UnsupportedVersion, std::to_string(header_.version));
    }
    Bytes id = read_exact(id_len, "session id", ErrorCode::BadMagic);
    header_.session_id.assign(id.begin(), id.end());
    if (ext) read_exact(ext, "header extension", ErrorCode::BadMagic);
  }

  std::optional<std::uint8_t> read_u8_or_eof() {
    char c;
    if (!in_.get(c)) return std::nullopt;
    return static_cast<std::uint8_t>(c);
  }

  Bytes read_exact(std::size_t n, const char* what,
                   ErrorCode code = ErrorCode::ChecksumMismatch) {
    Bytes b(n);
    if (n && !in_.read(reinterpret_cast<char*>(b.data()), static_cast<std::streamsize>(n))) {
      throw RecordError(code, std::string("truncated ") + what);
    }
    return b;
  }

  void append_exact(std::size_t n, const char* what) {
    std::size_t at = raw_.size();
    raw_.resize(at + n);
    if (n && !in_.read(reinterpret_cast<char*>(raw_.data() + at), static_cast<std::streamsize>(n))) {
      throw RecordError(ErrorCode::ChecksumMismatch, std::string("truncated ") + what);
    }
  }

  std::istream& in_;
  Header header_;
  Bytes raw_;
  Crc64 crc_;
  std::uint64_t count_ = 0;
  std::optional<Trailer> trailer_;
};

struct VerifyReport {
  Header header;
  Trailer trailer;
  std::map<RecordType, std::uint64_t> counts;
  std::optional<std::uint64_t> first_offset;
  std::optional<std::uint64_t> last_offset;
};

/// Full audit: structure, offset order, trailer count, checksum, no
/// trailing bytes.
inline VerifyReport verify_stream(std::istream& in) {
  RecordingReader reader(in);
  VerifyReport rep;
  rep.header = reader.header();
  while (auto rec = reader.next()) {
    if (rep.last_offset && rec->offset_us < *rep.last_offset) {
      throw RecordError(ErrorCode::OffsetRegression, std::to_string(rec->offset_us));
    }
    if (!rep.first_offset) rep.first_offset = rec->offset_us;
    rep.last_offset = rec->offset_us;
    ++rep.counts[rec->type()];
  }
  rep.trailer = *reader.trailer();
  if (rep.trailer.count != reader.records_read()) {
    throw RecordError(ErrorCode::CountMismatch, std::to_string(rep.trailer.count) + " vs " +
                                                    std::to_string(reader.records_read()));
  }
  if (rep.trailer.checksum != reader.running_checksum()) {
    throw RecordError(ErrorCode::ChecksumMismatch, "body checksum differs");
  }
  if (!reader.at_eof()) throw RecordError(ErrorCode::TrailingBytes, "");
  return rep;
}

inline std::ifstream open_input(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw RecordError(ErrorCode::FileNotFound, p.string());
  return in;
}

inline VerifyReport verify(const std::filesystem::path& p) {
  auto in = open_input(p);
  return verify_stream(in);
}

inline VerifyReport verify_bytes(ByteView bytes) {
  std::istringstream in(std::string(as_chars(bytes)), std::ios::binary);
  return verify_stream(in);
}

inline Bytes read_file(const std::filesystem::path& p) {
  auto in = open_input(p);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct RecoveryReport {
  std::uint64_t records_kept = 0;
  bool had_trailer = false;
};

/// Salvages the longest prefix of well-formed, offset-ordered records and
/// re-terminates it with a fresh trailer. The header must be intact.
inline RecoveryReport recover_stream(std::istream& in, Bytes& out) {
  RecordingReader reader(in);
  out = encode_header(reader.header());
  RecoveryReport rep;
  Crc64 crc;
  std::optional<std::uint64_t> last;
  try {
    while (auto rec = reader.next()) {
      if (last && rec->offset_us < *last) break;
      last = rec->offset_us;
      const Bytes& raw = reader.last_raw();
      out.insert(out.end(), raw.begin(), raw.end());
      crc.process_bytes(raw.data(), raw.size());
      ++rep.records_kept;
    }
    rep.had_trailer = reader.trailer().has_value();
  } catch (const RecordError&) {
  }
  Bytes t = encode_trailer({rep.records_kept, crc.checksum()});
  out.insert(out.end(), t.begin(), t.end());
  return rep;
}

inline Bytes recover_truncated(ByteView damaged, RecoveryReport* report = nullptr) {
  std::istringstream in(std::string(as_chars(damaged)), std::ios::binary);
  Bytes out;
  RecoveryReport rep = recover_stream(in, out);
  if (report) *report = rep;
  return out;
}

inline RecoveryReport recover_truncated(const std::filesystem::path& damaged,
                                        const std::filesystem::path& out_path) {
  auto in = open_input(damaged);
  Bytes out;
  RecoveryReport rep = recover_stream(in, out);
  std::ofstream o(out_path, std::ios::binary | std::ios::trunc);
  o.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!o) throw RecordError(ErrorCode::IoError, out_path.string());
  return rep;
}

/// Reads every record of a verified recording.
inline std::vector<Record> read_all(std::istream& in, Header* header = nullptr) {
  RecordingReader reader(in);
  if (header) *header = reader.header();
  std::vector<Record> out;
  while (auto rec = reader.next()) out.push_back(std::move(*rec));
  return out;
}

inline std::vector<Record> read_all(const std::filesystem::path& p, Header* header = nullptr) {
  auto in = open_input(p);
  return read_all(in, header);
}

/// Body bytes (everything between header and trailer).
inline Bytes body_bytes(ByteView file) {
  std::istringstream in(std::string(as_chars(file)), std::ios::binary);
  RecordingReader reader(in);
  Bytes out;
  while (reader.next()) out.insert(out.end(), reader.last_raw().begin(), reader.last_raw().end());
  return out;
}

/// Human-readable dump, one line per record.
inline void inspect(std::istream& in, std::ostream& out) {
  RecordingReader reader(in);
  const Header& h = reader.header();
  out << "SVRS v" << h.version << " session=" << h.session_id
      << " wallclock_start_us=" << h.wallclock_start_us << "\n";
  std::uint64_t i = 0;
  while (auto rec = reader.next()) {
    out << "#" << i++ << " offset_us=" << rec->offset_us << " " << to_string(rec->type());
    if (const auto* f = std::get_if<MediaFrame>(&rec->item)) {
      out << " stream=" << to_string(f->stream) << " seq=" << f->seq << " ts_us=" << f->ts_us
          << " key=" << (f->key ? 1 : 0) << " content_type=" << f->content_type
          << " bytes=" << f->payload->size();
    } else if (const auto* a = std::get_if<AnnotationText>(&rec->item)) {
      out << " " << a->text;
    } else {
      out << " " << std::get<SignalText>(rec->item).text;
    }
    out << "\n";
  }
  const Trailer& t = *reader.trailer();
  out << "trailer count=" << t.count << " crc64=0x" << std::hex << t.checksum << std::dec
      << (t.checksum == reader.running_checksum() ? " (ok)" : " (MISMATCH)") << "\n";
}

}  // namespace survivrs::record

#endif  // SURVIVRS_RECORD_FORMAT_HPP
