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

#ifndef SURVIVRS_SERVER_MEDIA_HPP
#define SURVIVRS_SERVER_MEDIA_HPP

// RGB images, JPEG coding (libjpeg), and the self-describing test pattern the
// headless clients use for end-to-end checks: a strip of 16x16 black/white
// cells carrying the frame seq and the publisher's steady-clock send time.

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <jpeglib.h>

#include <boost/crc.hpp>

#include "survivrs/core/bytes.hpp"
#include "survivrs/core/types.hpp"

namespace survivrs::server {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  Image() = default;
  Image(int w, int h, Rgb fill = {}) : width(w), height(h), rgb(std::size_t(w) * h * 3) {
    for (int i = 0; i < w * h; ++i) {
      rgb[3 * i] = fill.r;
      rgb[3 * i + 1] = fill.g;
      rgb[3 * i + 2] = fill.b;
    }
  }

  bool empty() const noexcept { return width == 0 || height == 0; }

  Rgb at(int x, int y) const {
    const std::uint8_t* p = &rgb[(std::size_t(y) * width + x) * 3];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    std::uint8_t* p = &rgb[(std::size_t(y) * width + x) * 3];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  void fill_rect(int x0, int y0, int w, int h, Rgb c) {
    for (int y = y0; y < y0 + h; ++y) {
      for (int x = x0; x < x0 + w; ++x) set(x, y, c);
    }
  }
};

class JpegError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

inline void jpeg_silent(j_common_ptr, int) {}

}  // namespace detail

inline Bytes encode_jpeg(const Image& img, int quality = 90) {
  if (img.empty()) throw JpegError("encode_jpeg: empty image");
  jpeg_compress_struct cinfo;
  detail::JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = detail::jpeg_error_exit;
  unsigned char* buf = nullptr;
  unsigned long size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buf);
    throw JpegError(std::string("encode_jpeg: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buf, &size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(&img.rgb[std::size_t(cinfo.next_scanline) * img.width * 3]);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  Bytes out(buf, buf + size);
  jpeg_destroy_compress(&cinfo);
  std::free(buf);
  return out;
}

inline Image decode_jpeg(ByteView data) {
  jpeg_decompress_struct cinfo;
  detail::JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = detail::jpeg_error_exit;
  err.pub.emit_message = detail::jpeg_silent;
  Image img;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw JpegError(std::string("decode_jpeg: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data.data(), static_cast<unsigned long>(data.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  img = Image(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = &img.rgb[std::size_t(cinfo.output_scanline) * img.width * 3];
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

// ---- test pattern ---------------------------------------------------------

inline constexpr int kCell = 16;
inline constexpr int kStampBits = 64 + 32 + 16;

struct PatternStamp {
  std::uint64_t seq = 0;  // low 32 bits are carried
  std::uint64_t sent_us = 0;
  bool operator==(const PatternStamp&) const = default;
};

namespace detail {

inline std::uint16_t stamp_check(std::uint32_t seq, std::uint64_t sent) {
  boost::crc_ccitt_type crc;
  std::uint8_t buf[12];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<std::uint8_t>(sent >> (8 * i));
  for (int i = 0; i < 4; ++i) buf[8 + i] = static_cast<std::uint8_t>(seq >> (8 * i));
  crc.process_bytes(buf, sizeof buf);
  return crc.checksum();
}

inline bool stamp_bit(const PatternStamp& s, int i) {
  auto seq = static_cast<std::uint32_t>(s.seq);
  if (i < 64) return (s.sent_us >> i) & 1;
  if (i < 96) return (seq >> (i - 64)) & 1;
  return (stamp_check(seq, s.sent_us) >> (i - 96)) & 1;
}

inline Rgb stream_tint(StreamKind k) {
  switch (k) {
    case StreamKind::Surround360: return {60, 110, 160};
    case StreamKind::Site: return {150, 70, 60};
    case StreamKind::Vitals: return {40, 130, 70};
    case StreamKind::GuideView: return {110, 90, 150};
    case StreamKind::Audio: return {0, 0, 0};
  }
  return {};
}

}  // namespace detail

inline int stamp_rows(int width) {
  int per_row = width / kCell;
  return (kStampBits + per_row - 1) / per_row;
}

/// Draws the stamp into the top rows of `img` (width >= 128).
inline void draw_stamp(Image& img, const PatternStamp& s) {
  int per_row = img.width / kCell;
  for (int i = 0; i < kStampBits; ++i) {
    int cx = (i % per_row) * kCell, cy = (i / per_row) * kCell;
    std::uint8_t v = detail::stamp_bit(s, i) ? 235 : 20;
    img.fill_rect(cx, cy, kCell, kCell, {v, v, v});
  }
}

/// Reads a stamp back; empty if the check bits disagree.
inline std::optional<PatternStamp> read_stamp(const Image& img) {
  if (img.width < 128 || img.height < stamp_rows(img.width) * kCell) return std::nullopt;
  int per_row = img.width / kCell;
  std::uint64_t sent = 0;
  std::uint32_t seq = 0;
  std::uint16_t check = 0;
  for (int i = 0; i < kStampBits; ++i) {
    int cx = (i % per_row) * kCell, cy = (i / per_row) * kCell;
    int sum = 0;
    for (int y = cy + 4; y < cy + 12; ++y) {
      for (int x = cx + 4; x < cx + 12; ++x) {
        Rgb c = img.at(x, y);
        sum += c.r + c.g + c.b;
      }
    }
    bool bit = sum > 64 * 3 * 128;
    if (!bit) continue;
    if (i < 64) sent |= std::uint64_t{1} << i;
    else if (i < 96) seq |= std::uint32_t{1} << (i - 64);
    else check |= static_cast<std::uint16_t>(1u << (i - 96));
  }
  if (check != detail::stamp_check(seq, sent)) return std::nullopt;
  return PatternStamp{seq, sent};
}

inline std::pair<int, int> pattern_size(StreamKind k) {
  return k == StreamKind::Surround360 ? std::pair{512, 256} : std::pair{256, 128};
}

/// Test frame for `k`: stamp on top, stream-tinted body. The Surround360
/// body is a longitude/latitude grid so projections of it are recognizable.
inline Image test_pattern(StreamKind k, const PatternStamp& s) {
  auto [w, h] = pattern_size(k);
  Image img(w, h, detail::stream_tint(k));
  int top = stamp_rows(w) * kCell;
  for (int y = top; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (k == StreamKind::Surround360) {
        auto r = static_cast<std::uint8_t>(255 * x / w);
        auto g = static_cast<std::uint8_t>(255 * y / h);
        bool grid = (x % 32 == 0) || (y % 32 == 0);
        img.set(x, y, grid ? Rgb{255, 255, 255} : Rgb{r, g, 128});
      } else {
        bool band = ((x + static_cast<int>(s.seq * 4)) / 32) % 2 == 0;
        Rgb t = detail::stream_tint(k);
        img.set(x, y, band ? t : Rgb{static_cast<std::uint8_t>(t.r / 2),
                                     static_cast<std::uint8_t>(t.g / 2),
                                     static_cast<std::uint8_t>(t.b / 2)});
      }
    }
  }
  draw_stamp(img, s);
  return img;
}

/// Bresenham line with a square brush of side `thick`.
inline void draw_line(Image& img, int x0, int y0, int x1, int y1, Rgb c, int thick = 1) {
  int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  int half = thick / 2;
  for (;;) {
    img.fill_rect(x0 - half, y0 - half, thick, thick, c);
    if (x0 == x1 && y0 == y1) break;
    int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace survivrs::server

#endif  // SURVIVRS_SERVER_MEDIA_HPP
