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

#ifndef SURVIVRS_SERVER_HEADLESS_HPP
#define SURVIVRS_SERVER_HEADLESS_HPP

// Scripted stand-ins for the two browser pages: a room that publishes test
// pattern (or image directory) streams, and a guide that consumes them, runs
// an annotation script and sends back a composited GuideView stream.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "survivrs/annot/state.hpp"
#include "survivrs/core/canonical.hpp"
#include "survivrs/core/clock.hpp"
#include "survivrs/server/client.hpp"
#include "survivrs/server/media.hpp"
#include "survivrs/viewmath/equirect.hpp"
#include "survivrs/viewmath/follow.hpp"

namespace survivrs::server {

inline constexpr const char* kJpeg = "image/jpeg";
inline constexpr const char* kPcm = "audio/pcm;rate=16000";
/// 20 ms of 16-bit mono PCM at 16 kHz.
inline constexpr std::size_t kAudioFrameBytes = 640;

using Transcript = std::vector<std::string>;

inline void write_transcript(const std::filesystem::path& p, const Transcript& lines) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write transcript " + p.string());
  for (const auto& l : lines) out << l << "\n";
}

inline Transcript read_transcript(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read transcript " + p.string());
  Transcript out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

/// The authoritative annotation events of a transcript (rejections dropped).
inline Transcript annotation_lines(const Transcript& t) {
  Transcript out;
  for (const auto& l : t) {
    try {
      if (std::holds_alternative<AnnotationEvent>(decode_event(l))) out.push_back(l);
    } catch (const MalformedEvent&) {
    }
  }
  return out;
}

// ---- room -----------------------------------------------------------------

struct RoomOptions {
  PeerOptions peer;
  std::map<StreamKind, double> fps = {
      {StreamKind::Surround360, 10}, {StreamKind::Site, 10}, {StreamKind::Vitals, 10}};
  /// JPEG files cycled on every video stream instead of test patterns.
  std::optional<std::filesystem::path> image_dir;
  bool audio = false;
  double duration_s = 10;
  std::chrono::milliseconds handshake_timeout{30000};
  std::optional<std::filesystem::path> transcript;
};

struct RoomReport {
  std::map<StreamKind, std::uint64_t> published;
  std::uint64_t guideview_received = 0;
  Transcript transcript;
  std::optional<std::string> error;
};

inline std::vector<Bytes> load_image_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (e.is_regular_file() && (ext == ".jpg" || ext == ".jpeg")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Bytes> out;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    out.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  if (out.empty()) throw std::runtime_error("no .jpg images in " + dir.string());
  return out;
}

inline Bytes audio_frame(std::uint64_t seq) {
  Bytes out(kAudioFrameBytes);
  for (std::size_t i = 0; i < kAudioFrameBytes / 2; ++i) {
    double t = static_cast<double>(seq * (kAudioFrameBytes / 2) + i) / 16000.0;
    auto s = static_cast<std::int16_t>(8000 * std::sin(2 * std::numbers::pi * 440 * t));
    out[2 * i] = static_cast<std::uint8_t>(s & 0xFF);
    out[2 * i + 1] = static_cast<std::uint8_t>((s >> 8) & 0xFF);
  }
  return out;
}

/// Runs the room until the duration elapses, `stop` is set, or the session
/// ends. Handshake failures are reported in `error` (the ProtocolError code).
inline RoomReport run_room(RoomOptions opt, const std::atomic<bool>* stop = nullptr) {
  RoomReport rep;
  std::vector<Bytes> images;
  if (opt.image_dir) images = load_image_dir(*opt.image_dir);

  opt.peer.role = PeerRole::RoomPublisher;
  opt.peer.offer.clear();
  for (const auto& [k, fps] : opt.fps) {
    if (fps > 0) opt.peer.offer[k] = kJpeg;
  }
  if (opt.audio) opt.peer.offer[StreamKind::Audio] = kPcm;
  opt.peer.want = {StreamKind::GuideView};
  if (opt.audio) opt.peer.want.insert(StreamKind::Audio);

  std::mutex mu;
  PeerClient peer(opt.peer);
  peer.on_event([&](const AnnotationEvent&, const std::string& text) {
    std::lock_guard lock(mu);
    rep.transcript.push_back(text);
  });
  peer.on_frame([&](const MediaFrame& f, std::uint64_t) {
    std::lock_guard lock(mu);
    if (f.stream == StreamKind::GuideView) ++rep.guideview_received;
  });
  try {
    peer.start(opt.handshake_timeout);
  } catch (const HandshakeError& e) {
    rep.error = e.code();
    return rep;
  }

  struct Lane {
    StreamKind kind;
    std::chrono::microseconds period;
    std::chrono::steady_clock::time_point due;
  };
  std::vector<Lane> lanes;
  const auto t0 = std::chrono::steady_clock::now();
  StreamSet granted = peer.sending();
  for (const auto& [k, fps] : opt.fps) {
    if (fps > 0 && granted.contains(k)) {
      lanes.push_back({k, std::chrono::microseconds(static_cast<std::int64_t>(1e6 / fps)), t0});
    }
  }
  if (opt.audio && granted.contains(StreamKind::Audio)) {
    lanes.push_back({StreamKind::Audio, std::chrono::microseconds(20000), t0});
  }
  const auto end = t0 + std::chrono::microseconds(static_cast<std::int64_t>(opt.duration_s * 1e6));
  std::map<StreamKind, std::uint64_t> seq;
  while (!lanes.empty()) {
    auto next = std::min_element(lanes.begin(), lanes.end(),
                                 [](const Lane& a, const Lane& b) { return a.due < b.due; });
    if (next->due >= end) break;
    std::this_thread::sleep_until(next->due);
    if ((stop && stop->load()) || peer.closed()) break;
    StreamKind k = next->kind;
    std::uint64_t n = seq[k]++;
    if (k == StreamKind::Audio) {
      peer.publish(k, kPcm, audio_frame(n));
    } else if (!images.empty()) {
      peer.publish(k, kJpeg, images[n % images.size()]);
    } else {
      Image img = test_pattern(k, {n, steady_now_us()});
      peer.publish(k, kJpeg, encode_jpeg(img, 85));
    }
    ++rep.published[k];
    next->due += next->period;
  }
  peer.leave("room-done");
  std::lock_guard lock(mu);
  if (opt.transcript) write_transcript(*opt.transcript, rep.transcript);
  return rep;
}

// ---- guide ----------------------------------------------------------------

struct ScriptItem {
  std::int64_t t_ms = 0;
  std::variant<AnnotationEvent, ViewPose> what;
};

class ScriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON lines: {"t_ms":N,"event":{...proposal...}} or {"t_ms":N,"pose":[yaw,pitch,roll]}.
inline std::vector<ScriptItem> parse_script(std::istream& in) {
  std::vector<ScriptItem> out;
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    auto fail = [&](const std::string& why) {
      throw ScriptError("script line " + std::to_string(lineno) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(e.what());
    }
    if (!j.is_object() || !j.contains("t_ms") || !j["t_ms"].is_number_integer()) {
      fail("missing integer t_ms");
    }
    ScriptItem item;
    item.t_ms = j["t_ms"].get<std::int64_t>();
    if (j.contains("event")) {
      try {
        item.what = decode_annotation(j["event"].dump());
      } catch (const MalformedEvent& e) {
        fail(e.what());
      }
    } else if (j.contains("pose") && j["pose"].is_array() && j["pose"].size() == 3) {
      item.what = ViewPose(j["pose"][0].get<double>(), j["pose"][1].get<double>(),
                           j["pose"][2].get<double>());
    } else {
      fail("expected 'event' or 'pose'");
    }
    out.push_back(std::move(item));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ScriptItem& a, const ScriptItem& b) { return a.t_ms < b.t_ms; });
  return out;
}

inline std::vector<ScriptItem> parse_script_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ScriptError("cannot open script " + p.string());
  return parse_script(in);
}

inline std::string script_line(const ScriptItem& item) {
  nlohmann::json j;
  j["t_ms"] = item.t_ms;
  if (const auto* e = std::get_if<AnnotationEvent>(&item.what)) {
    j["event"] = nlohmann::json::parse(encode_annotation(*e));
  } else {
    const auto& p = std::get<ViewPose>(item.what);
    j["pose"] = {p.yaw(), p.pitch(), p.roll()};
  }
  return j.dump();
}

/// A context-valid annotation script of `events` proposals spread over
/// [start_ms, end_ms], interleaved with slow head turns. Validity is checked
/// by folding each candidate before keeping it.
inline std::vector<ScriptItem> demo_script(std::size_t events, std::int64_t start_ms,
                                           std::int64_t end_ms, std::uint32_t seed = 7) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> coord(100'000, 900'000);
  auto pt = [&] { return Point{Norm::from_micros(coord(rng)), Norm::from_micros(coord(rng))}; };
  annot::AnnotationState st;
  std::vector<AnnotationEvent> chosen;
  auto try_add = [&](AnnotationAction a) {
    AnnotationEvent e{st.next_seq(), 0, std::nullopt, std::move(a)};
    auto r = annot::apply(st, e);
    if (r.error) return false;
    st = std::move(r.state);
    chosen.push_back(AnnotationEvent{std::nullopt, std::nullopt, std::nullopt, e.action});
    return true;
  };
  StreamKind s = StreamKind::Site;
  std::size_t shape_no = 0;
  while (chosen.size() < events) {
    std::size_t left = events - chosen.size();
    const auto& sa = st.of(s);
    if (!st.zoomed) {
      try_add(act::ZoomIn{s});
      continue;
    }
    if (sa.open_shape) {
      if (sa.open_shape->points.size() < 3 && left > 1) {
        try_add(act::ExtendShape{s, pt()});
      } else {
        try_add(act::EndShape{s});
      }
      continue;
    }
    int pick = static_cast<int>(rng() % 10);
    if (left < 4 || pick < 5) {
      if (left >= 3) {
        Tool tool = kAllTools[shape_no++ % kAllTools.size()];
        try_add(act::BeginShape{s, tool, pt(), Rgba{255, 0, 0, 255}, Norm::from_micros(5000)});
        continue;
      }
      // Too few events left for a shape: toggle playback instead.
      try_add(act::PlayPauseScreenshot{s});
      continue;
    }
    if (pick == 5 && !sa.undo_stack.empty()) {
      try_add(act::Undo{s});
    } else if (pick == 6 && !sa.redo_stack.empty()) {
      try_add(act::Redo{s});
    } else if (pick == 7 && !sa.visible.empty()) {
      const annot::Shape& target = sa.visible.back();
      try_add(act::Erase{s, {target.points.front()}, Norm::from_micros(10000)});
    } else if (pick == 8) {
      try_add(act::PlayPauseScreenshot{s});
    } else if (pick == 9 && left > 6) {
      StreamKind other = s == StreamKind::Site ? StreamKind::Vitals : StreamKind::Site;
      if (try_add(act::ZoomIn{other})) s = other;
    }
  }
  std::vector<ScriptItem> out;
  const double step = events > 1 ? static_cast<double>(end_ms - start_ms) / (events - 1) : 0.0;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    std::int64_t t = start_ms + static_cast<std::int64_t>(std::llround(step * i));
    if (i % 5 == 0) {
      double yaw = std::sin(static_cast<double>(i) / 7.0) * std::numbers::pi / 2;
      out.push_back({t, ViewPose(yaw, 0.1 * std::cos(static_cast<double>(i)), 0.0)});
    }
    out.push_back({t, chosen[i]});
  }
  return out;
}

struct GuideViewInputs {
  const Image* surround = nullptr;
  const Image* site = nullptr;
  const Image* vitals = nullptr;
  ViewPose head;
  ViewPose ui;
  const annot::AnnotationState* annotations = nullptr;
  double fov_deg = 90;
};

/// Guide's-eye composite: the 360 view at the head pose, Site/Vitals
/// thumbnails in the upper corners trailing by the UI pose, and the zoomed
/// stream with its annotations in the middle.
inline Image compose_guide_view(const GuideViewInputs& in, int w = 256, int h = 128) {
  Image out(w, h, {16, 16, 16});
  const double aspect = static_cast<double>(w) / h;
  if (in.surround && !in.surround->empty()) {
    const Image& src = *in.surround;
    for (int y = 0; y < h; ++y) {
      double py = 1.0 - 2.0 * (y + 0.5) / h;
      for (int x = 0; x < w; ++x) {
        double px = 2.0 * (x + 0.5) / w - 1.0;
        auto uv = viewmath::dir_to_uv(viewmath::viewport_ray(in.head, in.fov_deg, px, py, aspect));
        int sx = std::clamp(static_cast<int>(uv.u * src.width), 0, src.width - 1);
        int sy = std::clamp(static_cast<int>(uv.v * src.height), 0, src.height - 1);
        out.set(x, y, src.at(sx, sy));
      }
    }
  }
  auto blit = [&](const Image& src, int x0, int y0, int bw, int bh) {
    for (int y = 0; y < bh; ++y) {
      for (int x = 0; x < bw; ++x) {
        out.set(x0 + x, y0 + y, src.at(x * src.width / bw, y * src.height / bh));
      }
    }
  };
  // Horizontal screen offset of the heads-up layer relative to the head.
  const double hfov = 2 * std::atan(std::tan(in.fov_deg * std::numbers::pi / 360) * aspect);
  const int shift = static_cast<int>(shortest_arc(in.head.yaw(), in.ui.yaw()) / hfov * w);
  const int tw = w / 4, th = h / 4;
  if (in.site && !in.site->empty()) blit(*in.site, 4 + shift, 4, tw, th);
  if (in.vitals && !in.vitals->empty()) blit(*in.vitals, w - tw - 4 + shift, 4, tw, th);

  if (in.annotations && in.annotations->zoomed) {
    StreamKind z = *in.annotations->zoomed;
    const Image* zi = z == StreamKind::Site ? in.site : in.vitals;
    const int zw = w / 2, zh = h / 2, zx = w / 4, zy = h / 3;
    if (zi && !zi->empty()) blit(*zi, zx, zy, zw, zh);
    auto to_px = [&](annot::Vec2 p) {
      return std::pair{zx + static_cast<int>(p.x * zw), zy + static_cast<int>(p.y * zh)};
    };
    const auto& sa = in.annotations->of(z);
    std::vector<annot::Shape> shapes = sa.visible;
    if (sa.open_shape) shapes.push_back(*sa.open_shape);
    for (const annot::Shape& s : shapes) {
      Rgb c{s.color.r, s.color.g, s.color.b};
      std::vector<annot::Segment> segs;
      if (s.tool == Tool::Oval && !s.points.empty()) {
        auto e = annot::ellipse_from_box(annot::to_vec(s.points.front()),
                                         annot::to_vec(s.points.back()));
        const int n = 48;
        for (int i = 0; i < n; ++i) {
          double a0 = 2 * std::numbers::pi * i / n, a1 = 2 * std::numbers::pi * (i + 1) / n;
          segs.push_back({e.at(a0), e.at(a1)});
        }
      } else {
        segs = annot::outline_segments(s);
      }
      for (const auto& seg : segs) {
        auto [x0, y0] = to_px(seg.a);
        auto [x1, y1] = to_px(seg.b);
        draw_line(out, x0, y0, x1, y1, c, 2);
      }
    }
  }
  return out;
}

struct GuideOptions {
  PeerOptions peer;
  std::vector<ScriptItem> script;
  double duration_s = 10;
  double guideview_fps = 10;
  bool audio = false;
  double fov_deg = 90;
  std::chrono::milliseconds handshake_timeout{30000};
  std::optional<std::filesystem::path> transcript;
};

struct GuideReport {
  std::map<StreamKind, std::uint64_t> received;
  /// publish -> deliver latency of stamped frames, microseconds.
  std::vector<std::int64_t> latencies_us;
  /// Stamped frames whose embedded seq disagreed with the relay seq.
  std::uint64_t stamp_mismatches = 0;
  /// Per-stream relay seq regressions observed.
  std::uint64_t seq_regressions = 0;
  std::uint64_t guideview_published = 0;
  std::uint64_t proposals_sent = 0;
  Transcript transcript;  // authoritative events and the Rejected answers
  std::vector<Rejected> rejected;
  annot::AnnotationState mirror;
  bool mirror_diverged = false;
  std::optional<std::string> error;
};

inline std::int64_t percentile(std::vector<std::int64_t> v, double p) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  auto idx = static_cast<std::size_t>(std::ceil(p / 100.0 * v.size())) - 1;
  return v[std::min(idx, v.size() - 1)];
}

inline GuideReport run_guide(GuideOptions opt, const std::atomic<bool>* stop = nullptr) {
  GuideReport rep;
  opt.peer.role = PeerRole::RemoteGuide;
  opt.peer.offer.clear();
  if (opt.guideview_fps > 0) opt.peer.offer[StreamKind::GuideView] = kJpeg;
  if (opt.audio) opt.peer.offer[StreamKind::Audio] = kPcm;
  opt.peer.want = {StreamKind::Surround360, StreamKind::Site, StreamKind::Vitals};
  if (opt.audio) opt.peer.want.insert(StreamKind::Audio);

  std::mutex mu;
  std::map<StreamKind, std::shared_ptr<const Image>> latest;
  std::map<StreamKind, std::uint64_t> last_seq;
  PeerClient peer(opt.peer);
  peer.on_frame([&](const MediaFrame& f, std::uint64_t recv_us) {
    std::optional<Image> img;
    std::optional<PatternStamp> stamp;
    if (f.content_type == kJpeg) {
      try {
        img = decode_jpeg(f.bytes());
        stamp = read_stamp(*img);
      } catch (const JpegError&) {
      }
    }
    std::lock_guard lock(mu);
    ++rep.received[f.stream];
    auto it = last_seq.find(f.stream);
    if (it != last_seq.end() && f.seq <= it->second) ++rep.seq_regressions;
    last_seq[f.stream] = f.seq;
    if (stamp) {
      rep.latencies_us.push_back(static_cast<std::int64_t>(recv_us) -
                                 static_cast<std::int64_t>(stamp->sent_us));
      if ((f.seq & 0xFFFFFFFFu) != stamp->seq) ++rep.stamp_mismatches;
    }
    if (img) latest[f.stream] = std::make_shared<const Image>(std::move(*img));
  });
  peer.on_event([&](const AnnotationEvent& e, const std::string& text) {
    std::lock_guard lock(mu);
    rep.transcript.push_back(text);
    std::vector<annot::DerivedEffect> fx;
    if (annot::apply_in_place(rep.mirror, e, fx)) rep.mirror_diverged = true;
  });
  peer.on_rejected([&](const Rejected& r) {
    std::lock_guard lock(mu);
    rep.rejected.push_back(r);
    rep.transcript.push_back(encode_rejected(r));
  });
  try {
    peer.start(opt.handshake_timeout);
  } catch (const HandshakeError& e) {
    rep.error = e.code();
    return rep;
  }

  const bool send_view = peer.sending().contains(StreamKind::GuideView) && opt.guideview_fps > 0;
  const auto t0 = std::chrono::steady_clock::now();
  const auto end = t0 + std::chrono::microseconds(static_cast<std::int64_t>(opt.duration_s * 1e6));
  const auto view_period =
      std::chrono::microseconds(static_cast<std::int64_t>(1e6 / std::max(opt.guideview_fps, 0.1)));
  auto next_view = t0 + view_period;
  std::size_t next_item = 0;
  ViewPose head;
  auto follow = viewmath::FollowState::starting_at(head);
  std::int64_t last_follow_t = -1;

  while (true) {
    auto now = std::chrono::steady_clock::now();
    if (now >= end || (stop && stop->load()) || peer.closed() || peer.bye_reason()) break;
    std::int64_t t_ms = std::chrono::duration_cast<std::chrono::milliseconds>(now - t0).count();
    while (next_item < opt.script.size() && opt.script[next_item].t_ms <= t_ms) {
      const auto& item = opt.script[next_item++];
      if (const auto* e = std::get_if<AnnotationEvent>(&item.what)) {
        peer.propose(*e);
        ++rep.proposals_sent;
      } else {
        head = std::get<ViewPose>(item.what);
      }
    }
    if (send_view && now >= next_view) {
      std::int64_t t_us = std::chrono::duration_cast<std::chrono::microseconds>(now - t0).count();
      if (t_us > last_follow_t) {
        follow = viewmath::follow_step(std::move(follow), head, t_us);
        last_follow_t = t_us;
      }
      // Snapshot under the lock, compose outside it so frame receipt never waits.
      std::map<StreamKind, std::shared_ptr<const Image>> frames;
      annot::AnnotationState mirror;
      {
        std::lock_guard lock(mu);
        frames = latest;
        mirror = rep.mirror;
      }
      auto get = [&](StreamKind k) -> const Image* {
        auto it = frames.find(k);
        return it == frames.end() ? nullptr : it->second.get();
      };
      GuideViewInputs in;
      in.surround = get(StreamKind::Surround360);
      in.site = get(StreamKind::Site);
      in.vitals = get(StreamKind::Vitals);
      in.head = head;
      in.ui = follow.ui_pose;
      in.annotations = &mirror;
      in.fov_deg = opt.fov_deg;
      Image view = compose_guide_view(in);
      peer.publish(StreamKind::GuideView, kJpeg, encode_jpeg(view, 80));
      ++rep.guideview_published;
      next_view += view_period;
    }
    auto wake = next_view;
    if (next_item < opt.script.size()) {
      wake = std::min(wake, t0 + std::chrono::milliseconds(opt.script[next_item].t_ms));
    }
    if (!send_view && next_item >= opt.script.size()) {
      wake = std::min(now + std::chrono::milliseconds(20), end);
    }
    std::this_thread::sleep_until(std::min({wake, end, now + std::chrono::milliseconds(20)}));
  }
  if (!peer.closed() && !peer.bye_reason()) {
    peer.leave("guide-done");
  } else {
    peer.wait_closed(std::chrono::seconds(5));
  }
  std::lock_guard lock(mu);
  if (opt.transcript) write_transcript(*opt.transcript, rep.transcript);
  return rep;
}

}  // namespace survivrs::server

#endif  // SURVIVRS_SERVER_HEADLESS_HPP
