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

// Acceptance suite: one pass/fail line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "support.hpp"
#include "survivrs/annot/digest.hpp"
#include "survivrs/annot/geometry.hpp"
#include "survivrs/record/format.hpp"
#include "survivrs/record/replay.hpp"
#include "survivrs/relay/hub.hpp"
#include "survivrs/server/client.hpp"
#include "survivrs/server/headless.hpp"
#include "survivrs/server/service.hpp"
#include "survivrs/signal/handshake.hpp"
#include "survivrs/viewmath/equirect.hpp"
#include "survivrs/viewmath/follow.hpp"

using namespace survivrs;
using namespace std::chrono_literals;
using survivrs::testing::Rng;

namespace {

struct Result {
  bool pass = true;
  std::string detail;
  std::string failure;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      failure = what;
    }
  }
};

// ---- signaling ------------------------------------------------------------

namespace sg = survivrs::signal;

const SessionId kSid("S");

std::string set_key(const StreamSet& s) { return encode_signal(sig::StreamRequest{s}); }

std::string side_key(const sg::SideState& s) {
  std::string k = s.role ? std::string(to_string(*s.role)) : "-";
  k += "|" + (s.advertised ? encode_signal(*s.advertised) : std::string("-"));
  k += "|" + (s.requested ? set_key(*s.requested) : std::string("-"));
  k += "|" + (s.acked ? set_key(*s.acked) : std::string("-"));
  return k;
}

std::string state_key(const sg::SignalState& s) {
  return std::string(to_string(s.phase)) + (s.kind == sg::SessionKind::Live ? "L" : "R") + "#" +
         side_key(s.publisher) + "#" + side_key(s.consumer);
}

sig::StreamAdvertise advertise(std::initializer_list<StreamKind> kinds) {
  sig::StreamAdvertise a;
  for (StreamKind k : kinds) a.streams[k] = "image/jpeg";
  return a;
}

std::vector<SignalMessage> alphabet() {
  using K = StreamKind;
  std::vector<SignalMessage> m;
  for (PeerRole r : {PeerRole::RoomPublisher, PeerRole::RemoteGuide, PeerRole::ReplayViewer}) {
    m.push_back(sig::Hello{kSid, r, kProtoVersion});
  }
  m.push_back(sig::Hello{kSid, PeerRole::RoomPublisher, kProtoVersion + 1});
  m.push_back(sig::Hello{SessionId("T"), PeerRole::RoomPublisher, kProtoVersion});
  m.push_back(advertise({K::Surround360, K::Site, K::Vitals, K::Audio}));
  m.push_back(advertise({K::GuideView}));
  m.push_back(advertise({}));
  for (StreamSet s : {StreamSet{}, StreamSet{K::Site}, StreamSet{K::Surround360, K::Site, K::Vitals},
                      StreamSet{K::GuideView}, StreamSet{K::Audio}}) {
    m.push_back(sig::StreamRequest{s});
  }
  for (StreamSet s : {StreamSet{}, StreamSet{K::Site}, StreamSet{K::GuideView},
                      StreamSet{K::Surround360, K::Site, K::Vitals}}) {
    m.push_back(sig::StreamAck{s});
  }
  m.push_back(sig::Bye{"x"});
  return m;
}

/// Checks one outcome against the contract; empty string if it holds.
std::string check_outcome(const sg::SignalState& before, const SignalMessage& msg,
                          const sg::SignalOutcome& out) {
  auto joined = [&](PeerRole r) {
    return out.state.publisher.role == r || out.state.consumer.role == r ||
           before.publisher.role == r || before.consumer.role == r;
  };
  for (const auto& o : out.outbound) {
    if (!joined(o.to)) return "message to a role that never joined";
  }
  if (!out.error) {
    if (!sg::is_legal_transition(before.phase, out.state.phase)) return "illegal transition";
    if (out.state.phase == sg::SessionPhase::Streaming && before.phase != out.state.phase &&
        !std::holds_alternative<sig::StreamAck>(msg)) {
      return "Streaming reached without an ack";
    }
    return {};
  }
  if (out.error->scope == sg::ErrorScope::Connection) {
    if (!(out.state == before)) return "connection error changed the session";
    if (!out.outbound.empty()) return "connection error sent messages";
    return {};
  }
  if (before.phase == sg::SessionPhase::Closed) return "session error after Closed";
  if (out.state.phase != sg::SessionPhase::Closing) return "session error did not close";
  for (const auto& o : out.outbound) {
    if (!std::holds_alternative<sig::Bye>(o.message)) return "session error sent a non-Bye";
  }
  return {};
}

struct HandshakeMsg {
  PeerRole from;
  SignalMessage msg;
};

Result criterion_signaling() {
  Result r;
  const auto msgs = alphabet();
  const std::vector<std::optional<PeerRole>> senders = {
      std::nullopt, PeerRole::RoomPublisher, PeerRole::RemoteGuide, PeerRole::ReplayViewer};

  std::vector<sg::SignalState> frontier = {sg::SignalState::fresh(kSid, sg::SessionKind::Live),
                                           sg::SignalState::fresh(kSid, sg::SessionKind::Replay)};
  std::set<std::string> seen;
  for (const auto& s : frontier) seen.insert(state_key(s));
  std::set<std::tuple<int, std::size_t, int>> cells;
  std::size_t inputs = 0;
  while (!frontier.empty() && r.pass) {
    std::vector<sg::SignalState> next;
    auto visit = [&](const sg::SignalState& s) {
      if (seen.insert(state_key(s)).second) next.push_back(s);
    };
    for (const auto& s : frontier) {
      for (std::size_t si = 0; si < senders.size(); ++si) {
        for (const auto& m : msgs) {
          ++inputs;
          std::optional<sg::SignalOutcome> result;
          try {
            result = sg::handle_signal(s, senders[si], m);
          } catch (const std::exception& e) {
            r.require(false, std::string("threw: ") + e.what());
            continue;
          }
          const sg::SignalOutcome& out = *result;
          cells.insert({static_cast<int>(s.phase), m.index(), static_cast<int>(si)});
          auto why = check_outcome(s, m, out);
          r.require(why.empty(), why + " in " + state_key(s) + " on " + encode_signal(m));
          visit(out.state);
        }
      }
      for (PeerRole role : {PeerRole::RoomPublisher, PeerRole::RemoteGuide, PeerRole::ReplayViewer}) {
        auto d = sg::on_disconnect(s, role);
        r.require(sg::is_legal_transition(s.phase, d.state.phase), "disconnect transition");
        visit(d.state);
      }
      auto c = sg::on_closed(s);
      r.require(c.error.has_value() != (s.phase == sg::SessionPhase::Closing), "on_closed contract");
      visit(c.state);
    }
    frontier = std::move(next);
  }
  const std::size_t all_cells = sg::kAllPhases.size() * std::variant_size_v<SignalMessage> * senders.size();
  r.require(cells.size() == all_cells, "not every phase x message x sender cell was reached");

  // Every ordering of the eight handshake messages.
  using K = StreamKind;
  const PeerRole RP = PeerRole::RoomPublisher, RG = PeerRole::RemoteGuide;
  const std::vector<HandshakeMsg> hs = {
      {RP, sig::Hello{kSid, RP, kProtoVersion}},
      {RG, sig::Hello{kSid, RG, kProtoVersion}},
      {RP, advertise({K::Surround360, K::Site, K::Vitals})},
      {RG, advertise({K::GuideView})},
      {RG, sig::StreamRequest{{K::Surround360, K::Site, K::Vitals}}},
      {RP, sig::StreamRequest{{K::GuideView}}},
      {RP, sig::StreamAck{{K::Surround360, K::Site, K::Vitals}}},
      {RG, sig::StreamAck{{K::GuideView}}},
  };
  // Causal order of real peers: a peer speaks after its Hello, advertises
  // once both joined, requests after the other side advertised and acks
  // after the other side requested.
  const std::vector<std::pair<int, int>> before = {{0, 2}, {1, 2}, {0, 3}, {1, 3},
                                                   {2, 4}, {3, 5}, {4, 6}, {5, 7}};
  std::vector<int> perm(8);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t perms = 0, legal = 0;
  do {
    ++perms;
    std::vector<int> pos(8);
    for (int i = 0; i < 8; ++i) pos[perm[i]] = i;
    bool is_legal = std::all_of(before.begin(), before.end(),
                                [&](auto p) { return pos[p.first] < pos[p.second]; });
    auto s = sg::SignalState::fresh(kSid);
    bool errored = false;
    for (int idx : perm) {
      const auto& h = hs[idx];
      std::optional<PeerRole> sender;
      if (!std::holds_alternative<sig::Hello>(h.msg)) sender = h.from;
      auto out = sg::handle_signal(s, sender, h.msg);
      auto why = check_outcome(s, h.msg, out);
      r.require(why.empty(), why + " in handshake permutation");
      if (out.error) errored = true;
      s = out.state;
    }
    if (is_legal) {
      ++legal;
      r.require(!errored && s.phase == sg::SessionPhase::Streaming, "legal interleaving did not stream");
    } else {
      r.require(errored && s.phase != sg::SessionPhase::Streaming, "illegal interleaving streamed");
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  r.detail = std::to_string(seen.size()) + " states, " + std::to_string(inputs) + " inputs, " +
             std::to_string(cells.size()) + "/" + std::to_string(all_cells) + " cells, " +
             std::to_string(legal) + "/" + std::to_string(perms) + " handshake orders legal";
  return r;
}

// ---- annotation -----------------------------------------------------------

Result criterion_annotation() {
  Result r;
  Rng rng(20260101);
  std::size_t events = 0, rejected = 0;
  const int runs = 10000;
  for (int i = 0; i < runs && r.pass; ++i) {
    auto run = survivrs::testing::run_random_sequence(rng, 1 + rng() % 50);
    r.require(run.failure.empty(), "sequence " + std::to_string(i) + ": " + run.failure);
    events += run.events.size();
    rejected += run.rejected;
  }
  r.detail = std::to_string(runs) + " sequences, " + std::to_string(events) + " events, " +
             std::to_string(rejected) + " refused proposals";
  return r;
}

// ---- eraser ---------------------------------------------------------------

Result criterion_eraser() {
  Result r;
  Rng rng(4242);
  int checked = 0, ambiguous = 0, mismatches = 0, with_hits = 0;
  while (checked < 1000) {
    auto c = survivrs::testing::rand_eraser_case(rng);
    auto expect = survivrs::testing::dense_hits(c);
    if (!expect) {
      ++ambiguous;
      continue;
    }
    ++checked;
    if (!expect->empty()) ++with_hits;
    if (annot::hit_test_erase(c.shapes, c.path, c.radius) != *expect) ++mismatches;
  }
  r.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
  r.detail = std::to_string(checked) + " cases (" + std::to_string(with_hits) + " with hits), " +
             std::to_string(mismatches) + " mismatches, " + std::to_string(ambiguous) +
             " boundary cases redrawn";
  return r;
}

// ---- relay ----------------------------------------------------------------

Result criterion_relay() {
  Result r;
  constexpr int kFrames = 1000;
  const std::vector<StreamKind> streams = {StreamKind::Surround360, StreamKind::Site, StreamKind::Vitals};
  relay::ChannelOptions co;
  co.capacity = 32;
  relay::RelayHub hub(co);

  struct Seen {
    std::vector<std::uint64_t> seqs;
    std::vector<std::uint64_t> crcs;
  };
  // [subscriber][stream]
  std::vector<std::vector<relay::Subscription>> subs(3);
  for (auto& per : subs) {
    for (StreamKind k : streams) per.push_back(hub.channel(k)->subscribe(relay::StartAt::latest()));
  }
  std::vector<std::vector<Seen>> seen(3, std::vector<Seen>(streams.size()));
  std::atomic<bool> done{false};
  std::vector<std::thread> readers;
  for (int s = 0; s < 3; ++s) {
    readers.emplace_back([&, s] {
      const bool slow = s == 2;
      for (;;) {
        bool any = false;
        for (std::size_t i = 0; i < streams.size(); ++i) {
          if (auto f = subs[s][i].try_next()) {
            any = true;
            seen[s][i].seqs.push_back(f->seq);
            seen[s][i].crcs.push_back(record::crc64_xz(f->bytes()));
            if (slow) std::this_thread::sleep_for(300us);
          }
        }
        if (!any) {
          if (done.load()) break;
          std::this_thread::sleep_for(100us);
        }
      }
    });
  }
  std::map<std::pair<StreamKind, std::uint64_t>, std::uint64_t> published;
  Rng rng(7);
  for (int n = 0; n < kFrames; ++n) {
    for (StreamKind k : streams) {
      Bytes payload(16 + rng() % 48);
      for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
      std::uint64_t crc = record::crc64_xz(payload);
      auto f = hub.channel(k)->publish(PeerRole::RoomPublisher,
                                       FrameData::of("image/jpeg", std::move(payload), n % 10 == 0));
      published[{k, f.seq}] = crc;
    }
    if (n % 4 == 0) std::this_thread::sleep_for(200us);
  }
  done = true;
  for (auto& t : readers) t.join();

  std::uint64_t delivered = 0, evicted = 0, slow_evicted = 0;
  for (int s = 0; s < 3; ++s) {
    for (std::size_t i = 0; i < streams.size(); ++i) {
      const auto& got = seen[s][i];
      auto st = subs[s][i].stats();
      for (std::size_t j = 1; j < got.seqs.size(); ++j) {
        r.require(got.seqs[j] > got.seqs[j - 1], "seq not strictly increasing");
      }
      for (std::size_t j = 0; j < got.seqs.size(); ++j) {
        auto it = published.find({streams[i], got.seqs[j]});
        r.require(it != published.end() && it->second == got.crcs[j], "phantom or altered frame");
      }
      r.require(st.delivered == got.seqs.size(), "delivered counter disagrees with receipt");
      r.require(st.delivered + st.evicted == kFrames - st.start_seq, "delivered + evicted != published");
      std::set<std::uint64_t> all(got.seqs.begin(), got.seqs.end());
      for (auto e : st.evicted_seqs) r.require(all.insert(e).second, "frame both delivered and evicted");
      r.require(all.size() == static_cast<std::size_t>(kFrames) - st.start_seq, "frames unaccounted for");
      delivered += st.delivered;
      evicted += st.evicted;
      if (s == 2) slow_evicted += st.evicted;
    }
  }
  for (StreamKind k : streams) r.require(hub.channel(k)->published() == kFrames, "publish count");
  r.detail = "9 subscriptions, " + std::to_string(delivered) + " delivered + " +
             std::to_string(evicted) + " evicted (slow subscriber " + std::to_string(slow_evicted) +
             ") of " + std::to_string(9 * kFrames);
  return r;
}

// ---- view math ------------------------------------------------------------

Result criterion_viewmath() {
  Result r;
  using namespace viewmath;
  constexpr double kPi = std::numbers::pi;
  Rng rng(99);
  std::uniform_real_distribution<double> du(0.0, 1.0), dv(0.01, 0.99);
  double worst_uv = 0, worst_dir = 0;
  for (int i = 0; i < 100000; ++i) {
    double u = du(rng), v = dv(rng);
    Direction d = uv_to_dir(u, v);
    UV back = dir_to_uv(d);
    double eu = std::abs(back.u - u);
    eu = std::min(eu, 1.0 - eu);
    worst_uv = std::max({worst_uv, eu, std::abs(back.v - v)});
    Direction again = uv_to_dir(back.u, back.v);
    worst_dir = std::max({worst_dir, std::abs(again.x - d.x), std::abs(again.y - d.y),
                          std::abs(again.z - d.z)});
  }
  r.require(worst_uv < 1e-9 && worst_dir < 1e-9, "round trip error too large");

  auto anchor = [&](Direction d, double u, double v) {
    UV got = dir_to_uv(d);
    r.require(std::abs(got.u - u) < 1e-12 && std::abs(got.v - v) < 1e-12, "anchor vector");
  };
  anchor({0, 0, -1}, 0.5, 0.5);
  anchor({0, 1, 0}, 0.5, 0.0);
  anchor({1, 0, 0}, 0.75, 0.5);

  constexpr std::int64_t kStep = 10'000;
  auto fs = FollowState::starting_at(ViewPose{}, 150'000);
  for (std::int64_t t = -1'000'000; t < 0; t += kStep) fs = follow_step(fs, ViewPose{}, t);
  const ViewPose turned(kPi / 2, 0, 0);
  bool silent = true;
  double residual = kPi / 2;
  for (std::int64_t t = 0; t <= 1'250'000; t += kStep) {
    fs = follow_step(fs, turned, t);
    if (t < 500'000 && fs.ui_pose.yaw() != 0.0) silent = false;
    residual = std::abs(shortest_arc(fs.ui_pose.yaw(), kPi / 2));
  }
  r.require(silent, "follow filter moved before 0.5 s");
  r.require(residual < 0.011, "follow residual at 1.25 s too large");

  std::ostringstream d;
  d << "1e5 round trips max err uv " << worst_uv << " dir " << worst_dir
    << ", anchors exact, follow residual " << residual << " rad at 1.25 s";
  r.detail = d.str();
  return r;
}

// ---- recording ------------------------------------------------------------

Result criterion_recording() {
  Result r;
  survivrs::testing::TempDir dir("accept-rec");
  Rng rng(60);
  auto src = dir / "scripted.svrs";
  auto synth = survivrs::testing::synthesize_session(src, rng, 60.0, 10, 50);
  r.require(synth.frames == 1800, "expected 3 streams x 10 fps x 60 s");
  r.require(synth.annotations.size() >= 50, "too few annotation events");

  auto copy = dir / "rerecorded.svrs";
  {
    record::RecordingWriter w(copy, record::Header{record::kFormatVersion, 1, "scripted"});
    record::replay(src, record::Speed::unlimited(), [&](const record::Record& rec) { w.append(rec); });
    w.finalize();
  }
  Bytes a = record::read_file(src), b = record::read_file(copy);
  Bytes body_a = record::body_bytes(a), body_b = record::body_bytes(b);
  r.require(body_a == body_b, "replayed body differs");
  r.require(record::verify(src).trailer == record::verify(copy).trailer, "trailer checksum differs");

  // Cut at every record boundary and recover.
  const std::size_t header_len = a.size() - body_a.size() - record::encode_trailer({}).size();
  std::vector<std::size_t> ends = {header_len};
  {
    std::size_t at = header_len;
    for (const auto& rec : record::read_all(src)) ends.push_back(at += record::encode_record(rec).size());
  }
  std::size_t cuts = 0;
  for (std::size_t k = 0; k < ends.size() && r.pass; ++k) {
    ByteView part(a.data(), ends[k]);
    bool refused = false;
    try {
      record::verify_bytes(part);
    } catch (const record::RecordError& e) {
      refused = e.code() == record::ErrorCode::ChecksumMismatch;
    }
    r.require(refused, "truncated file passed verification");
    record::RecoveryReport rep;
    Bytes fixed = record::recover_truncated(part, &rep);
    r.require(rep.records_kept == k, "recovered record count");
    try {
      record::verify_bytes(fixed);
    } catch (const record::RecordError& e) {
      r.require(false, std::string("recovered prefix does not verify: ") + e.what());
    }
    Bytes fb = record::body_bytes(fixed);
    r.require(std::equal(fb.begin(), fb.end(), body_a.begin()) && fb.size() == ends[k] - header_len,
              "recovered prefix differs");
    ++cuts;
  }
  r.detail = std::to_string(synth.records) + " records (" + std::to_string(synth.frames) + " frames, " +
             std::to_string(synth.annotations.size()) + " events), body " + std::to_string(body_a.size()) +
             " bytes identical, " + std::to_string(cuts) + " truncations recovered";
  return r;
}

// ---- end to end -----------------------------------------------------------

Result criterion_e2e(double seconds) {
  Result r;
  survivrs::testing::TempDir dir("accept-e2e");
  server::ServerConfig cfg;
  cfg.port = 0;
  cfg.recordings_dir = dir / "recordings";
  server::Service svc(cfg);
  svc.start();
  const SessionId sid("desk");

  server::PeerOptions base;
  base.port = svc.port();
  base.session = sid;
  server::RoomOptions ro;
  ro.peer = base;
  ro.duration_s = seconds;
  server::GuideOptions go;
  go.peer = base;
  go.duration_s = seconds + 0.5;
  go.guideview_fps = 10;
  const auto script_end_ms = static_cast<std::int64_t>((seconds - 5) * 1000);
  go.script = server::demo_script(200, 1000, script_end_ms);

  // Sample sync skew and the authoritative state hash while the session runs.
  std::atomic<bool> sampling{true};
  std::int64_t worst_skew = 0;
  std::size_t skew_samples = 0;
  std::string server_hash;
  std::thread sampler([&] {
    const auto t0 = std::chrono::steady_clock::now();
    while (sampling) {
      std::this_thread::sleep_for(50ms);
      double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      auto s = svc.registry().find(sid);
      if (!s || s->phase() != sg::SessionPhase::Streaming) continue;
      if (t > 2.0 && t < seconds - 1.0) {
        auto spread = relay::skew_spread(s->sync_skew(),
                                         {StreamKind::Surround360, StreamKind::Site, StreamKind::Vitals});
        if (spread) {
          worst_skew = std::max(worst_skew, *spread);
          ++skew_samples;
        }
      }
      if (t > seconds - 2.0 && server_hash.empty()) {
        auto [status, body] = server::http_get("127.0.0.1", svc.port(), "/sessions/desk/state");
        if (status == 200) server_hash = nlohmann::json::parse(body)["state_hash"];
      }
    }
  });
  auto room_run = std::async(std::launch::async, [&] { return server::run_room(ro); });
  server::GuideReport g = server::run_guide(go);
  server::RoomReport room = room_run.get();
  sampling = false;
  sampler.join();

  r.require(!room.error && !g.error, "handshake failed: " + room.error.value_or(g.error.value_or("")));
  auto deadline = std::chrono::steady_clock::now() + 10s;
  while (svc.registry().find(sid) && std::chrono::steady_clock::now() < deadline) std::this_thread::sleep_for(20ms);
  auto recs = svc.registry().finished_recordings();
  r.require(recs.size() == 1, "no finalized recording");
  server::Transcript recorded;
  if (recs.size() == 1) {
    record::verify(recs[0]);
    for (const auto& rec : record::read_all(recs[0])) {
      if (const auto* a = std::get_if<record::AnnotationText>(&rec.item)) recorded.push_back(a->text);
    }
  }
  server::Transcript guide_events = server::annotation_lines(g.transcript);
  r.require(guide_events.size() == 200, "expected 200 authoritative events");
  r.require(room.transcript == guide_events, "room and guide transcripts differ");
  r.require(recorded == guide_events, "recording event list differs");
  r.require(g.rejected.empty() && !g.mirror_diverged, "mirror diverged or proposals refused");
  r.require(g.stamp_mismatches == 0 && g.seq_regressions == 0, "frame order or identity broken");
  r.require(server_hash == annot::state_hash_hex(g.mirror), "server state hash differs from mirror");
  const auto p99 = server::percentile(g.latencies_us, 99);
  r.require(!g.latencies_us.empty() && p99 < 50'000, "p99 latency too high");
  r.require(skew_samples > 0 && worst_skew < 150'000, "sync skew too large");

  std::uint64_t published = 0;
  for (const auto& [k, n] : room.published) published += n;
  std::ostringstream d;
  d << seconds << " s, " << published << " frames published, " << g.latencies_us.size()
    << " timed, p50 " << server::percentile(g.latencies_us, 50) / 1000.0 << " ms p99 " << p99 / 1000.0
    << " ms, max skew " << worst_skew / 1000.0 << " ms over " << skew_samples << " samples, "
    << guide_events.size() << " events in all three transcripts, state hash " << server_hash;
  r.detail = d.str();
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"survivrs acceptance suite"};
  std::vector<std::string> only;
  double e2e_seconds = 60;
  app.add_option("--only", only, "run only these criteria");
  app.add_option("--e2e-seconds", e2e_seconds, "length of the end-to-end run");
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::off);

  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"signaling-exhaustive", criterion_signaling},
      {"annotation-determinism", criterion_annotation},
      {"eraser-geometry", criterion_eraser},
      {"relay-accountability", criterion_relay},
      {"view-math", criterion_viewmath},
      {"recording-round-trip", criterion_recording},
      {"end-to-end-desk", [&] { return criterion_e2e(e2e_seconds); }},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Result res;
    try {
      res = run();
    } catch (const std::exception& e) {
      res.require(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream line;
    line << (res.pass ? "PASS " : "FAIL ") << name << " (" << std::fixed << std::setprecision(1) << secs
         << " s): " << res.detail;
    if (!res.pass) line << " -- " << res.failure;
    std::cout << line.str() << std::endl;
    if (!res.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
