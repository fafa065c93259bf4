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

// survivrs: operator CLI for the guidance session service.
//
//   survivrs serve   [--bind A] [--port N] [--recordings DIR] ...
//   survivrs replay  FILE [--speed S] [--session ID] [--port N] ...
//   survivrs inspect FILE
//   survivrs verify  FILE
//   survivrs recover DAMAGED OUT
//   survivrs room    --session ID [--port N] [--duration S] [--fps F] ...
//   survivrs guide   --session ID [--port N] [--duration S] [--script F] ...
//
// Exit status: 0 ok, 1 operational failure, 2 usage error.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "survivrs/record/format.hpp"
#include "survivrs/record/replay.hpp"
#include "survivrs/server/config.hpp"
#include "survivrs/server/headless.hpp"
#include "survivrs/server/service.hpp"

namespace {

using namespace survivrs;
using namespace survivrs::server;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

int fail(const std::string& code, const std::string& detail) {
  std::cerr << "error: " << code;
  if (!detail.empty()) std::cerr << ": " << detail;
  std::cerr << "\n";
  return kFail;
}

struct ServeFlags {
  std::optional<std::string> bind;
  std::optional<int> port;
  std::optional<std::string> recordings;
  std::optional<std::size_t> ring_capacity;
  std::optional<std::size_t> max_payload;
  std::optional<std::uint32_t> proto_version;
  std::optional<std::string> log_level;
  std::optional<std::string> config_file;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_file, "key=value config file (overrides SURVIVRS_CONFIG)");
    app.add_option("--bind", bind, "listen address");
    app.add_option("--port", port, "TCP port (0 = ephemeral)")->check(CLI::Range(0, 65535));
    app.add_option("--recordings", recordings, "recordings directory");
    app.add_option("--ring-capacity", ring_capacity, "relay frames kept per stream");
    app.add_option("--max-payload", max_payload, "max frame payload bytes");
    app.add_option("--proto-version", proto_version, "signaling protocol version");
    app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");
  }

  ServerConfig resolve() const {
    ServerConfig c = load_config_from_env();
    if (config_file) apply_config_file(c, *config_file);
    if (bind) set_config_value(c, "bind", *bind);
    if (port) set_config_value(c, "port", std::to_string(*port));
    if (recordings) set_config_value(c, "recordings_dir", *recordings);
    if (ring_capacity) set_config_value(c, "ring_capacity", std::to_string(*ring_capacity));
    if (max_payload) set_config_value(c, "max_payload_bytes", std::to_string(*max_payload));
    if (proto_version) set_config_value(c, "proto_version", std::to_string(*proto_version));
    if (log_level) set_config_value(c, "log_level", *log_level);
    return c;
  }
};

struct ClientFlags {
  std::string host = "127.0.0.1";
  int port = 8765;
  std::string session;
  double duration = 10;
  std::uint32_t proto_version = kProtoVersion;
  std::optional<std::string> transcript;
  double wait_s = 30;
  bool audio = false;

  void add_to(CLI::App& app) {
    app.add_option("--host", host, "server host");
    app.add_option("--port", port, "server port")->check(CLI::Range(1, 65535));
    app.add_option("--session", session, "session id")->required();
    app.add_option("--duration", duration, "seconds to stream");
    app.add_option("--proto-version", proto_version, "protocol version to announce");
    app.add_option("--transcript", transcript, "write received events here");
    app.add_option("--wait", wait_s, "seconds to wait for the other peer");
    app.add_flag("--audio", audio, "also exchange audio");
  }

  PeerOptions peer() const {
    auto id = SessionId::parse(session);
    if (!id) throw CLI::ValidationError("--session", "invalid session id '" + session + "'");
    PeerOptions p;
    p.host = host;
    p.port = static_cast<std::uint16_t>(port);
    p.session = *id;
    p.proto_version = proto_version;
    return p;
  }
};

void setup_logging(const std::string& level) {
  spdlog::set_level(spdlog::level::from_str(level));
  spdlog::set_pattern("[%H:%M:%S.%e] [%l] %v");
}

int cmd_serve(const ServeFlags& flags) {
  ServerConfig cfg = flags.resolve();
  setup_logging(cfg.log_level);
  Service svc(cfg);
  svc.start();
  std::cout << "listening on " << cfg.bind << ":" << svc.port() << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  svc.stop();
  return kOk;
}

int cmd_replay(const ServeFlags& flags, const std::string& file, const std::string& speed_text,
               const std::optional<std::string>& session_override) {
  auto speed = record::Speed::parse(speed_text);
  if (!speed) throw CLI::ValidationError("--speed", "expected a positive number or 'inf'");
  ServerConfig cfg = flags.resolve();
  setup_logging(cfg.log_level);
  auto replay = std::make_shared<record::ReplaySession>(file, *speed);
  std::string sid = session_override.value_or(replay->header().session_id + "-replay");
  auto id = SessionId::parse(sid);
  if (!id) throw CLI::ValidationError("--session", "invalid session id '" + sid + "'");
  Service svc(cfg);
  svc.start();
  auto session = svc.registry().host_replay(*id, replay);
  std::cout << "replaying " << file << " as session " << sid << " on " << cfg.bind << ":"
            << svc.port() << std::endl;
  while (!g_stop && session->phase() != signal::SessionPhase::Closed) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  svc.stop();
  if (replay->has_overlay()) std::cout << "review overlay: " << replay->overlay_path() << "\n";
  return kOk;
}

int cmd_inspect(const std::string& file) {
  auto in = record::open_input(file);
  record::inspect(in, std::cout);
  return kOk;
}

int cmd_recover(const std::string& damaged, const std::string& out) {
  auto rep = record::recover_truncated(damaged, out);
  std::cout << "recovered " << out << " records=" << rep.records_kept
            << " had_trailer=" << (rep.had_trailer ? "yes" : "no") << "\n";
  return kOk;
}

int cmd_verify(const std::string& file) {
  auto rep = record::verify(file);
  std::uint64_t total = 0;
  for (const auto& [t, n] : rep.counts) total += n;
  std::cout << "ok " << file << " session=" << rep.header.session_id << " records=" << total;
  for (auto t : {record::RecordType::Frame, record::RecordType::Annotation,
                 record::RecordType::Signal}) {
    auto it = rep.counts.find(t);
    std::cout << " " << record::to_string(t) << "=" << (it == rep.counts.end() ? 0 : it->second);
  }
  std::cout << "\n";
  return kOk;
}

int cmd_room(const ClientFlags& flags, double fps, const std::optional<std::string>& image_dir) {
  setup_logging("warn");
  RoomOptions opt;
  opt.peer = flags.peer();
  opt.duration_s = flags.duration;
  opt.audio = flags.audio;
  opt.handshake_timeout = std::chrono::milliseconds(static_cast<std::int64_t>(flags.wait_s * 1000));
  for (auto& [k, f] : opt.fps) f = fps;
  if (image_dir) opt.image_dir = *image_dir;
  if (flags.transcript) opt.transcript = *flags.transcript;
  auto rep = run_room(opt, &g_stop);
  if (rep.error) return fail(*rep.error, "");
  for (const auto& [k, n] : rep.published) std::cout << to_string(k) << " published " << n << "\n";
  std::cout << "GuideView received " << rep.guideview_received << "\n";
  std::cout << "events " << rep.transcript.size() << "\n";
  return kOk;
}

int cmd_guide(const ClientFlags& flags, const std::optional<std::string>& script,
              std::optional<std::size_t> demo_events, double view_fps) {
  setup_logging("warn");
  GuideOptions opt;
  opt.peer = flags.peer();
  opt.duration_s = flags.duration;
  opt.audio = flags.audio;
  opt.guideview_fps = view_fps;
  opt.handshake_timeout = std::chrono::milliseconds(static_cast<std::int64_t>(flags.wait_s * 1000));
  if (script) opt.script = parse_script_file(*script);
  if (demo_events) {
    auto end_ms = static_cast<std::int64_t>(std::max(0.0, flags.duration - 1.0) * 1000);
    opt.script = demo_script(*demo_events, std::min<std::int64_t>(500, end_ms), end_ms);
  }
  if (flags.transcript) opt.transcript = *flags.transcript;
  auto rep = run_guide(opt, &g_stop);
  if (rep.error) return fail(*rep.error, "");
  for (const auto& [k, n] : rep.received) std::cout << to_string(k) << " received " << n << "\n";
  std::cout << "latency p50_us " << percentile(rep.latencies_us, 50) << " p99_us "
            << percentile(rep.latencies_us, 99) << "\n";
  std::cout << "proposals " << rep.proposals_sent << " events "
            << annotation_lines(rep.transcript).size() << " rejected " << rep.rejected.size()
            << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"survivrs - remote guidance session service"};
  app.require_subcommand(1);

  ServeFlags serve_flags;
  auto* serve = app.add_subcommand("serve", "run the service");
  serve_flags.add_to(*serve);

  ServeFlags replay_flags;
  std::string replay_file, speed = "1";
  std::optional<std::string> replay_session;
  auto* replay = app.add_subcommand("replay", "host a recording as a live session");
  replay->add_option("file", replay_file, "recording")->required();
  replay->add_option("--speed", speed, "playback speed factor, or inf");
  replay->add_option("--session", replay_session, "session id to host it under");
  replay_flags.add_to(*replay);

  std::string inspect_file;
  auto* inspect = app.add_subcommand("inspect", "dump a recording");
  inspect->add_option("file", inspect_file, "recording")->required();

  std::string verify_file;
  auto* verify = app.add_subcommand("verify", "check a recording's structure and checksum");
  verify->add_option("file", verify_file, "recording")->required();

  std::string recover_in, recover_out;
  auto* recover = app.add_subcommand("recover", "salvage the valid record prefix of a damaged recording");
  recover->add_option("damaged", recover_in, "damaged or unfinished recording")->required();
  recover->add_option("out", recover_out, "output path")->required();

  ClientFlags room_flags;
  double room_fps = 10;
  std::optional<std::string> image_dir;
  auto* room = app.add_subcommand("room", "headless room publisher");
  room_flags.add_to(*room);
  room->add_option("--fps", room_fps, "frames per second per video stream");
  room->add_option("--image-dir", image_dir, "cycle these JPEGs instead of test patterns");

  ClientFlags guide_flags;
  std::optional<std::string> script;
  std::optional<std::size_t> demo_events;
  double view_fps = 10;
  auto* guide = app.add_subcommand("guide", "headless remote guide");
  guide_flags.add_to(*guide);
  auto* script_opt = guide->add_option("--script", script, "JSON-lines annotation script");
  guide->add_option("--demo-events", demo_events, "generate a valid script of N events")
      ->excludes(script_opt);
  guide->add_option("--view-fps", view_fps, "GuideView frames per second");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  try {
    if (*serve) return cmd_serve(serve_flags);
    if (*replay) return cmd_replay(replay_flags, replay_file, speed, replay_session);
    if (*inspect) return cmd_inspect(inspect_file);
    if (*verify) return cmd_verify(verify_file);
    if (*recover) return cmd_recover(recover_in, recover_out);
    if (*room) return cmd_room(room_flags, room_fps, image_dir);
    if (*guide) return cmd_guide(guide_flags, script, demo_events, view_fps);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const record::RecordError& e) {
    return fail(e.what(), "");
  } catch (const ConfigError& e) {
    return fail("ConfigError", e.what());
  } catch (const BindFailure& e) {
    return fail("BindFailure", e.what());
  } catch (const ScriptError& e) {
    return fail("ScriptError", e.what());
  } catch (const std::exception& e) {
    return fail("Error", e.what());
  }
  return kUsage;
}
