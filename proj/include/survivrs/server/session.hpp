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

#ifndef SURVIVRS_SERVER_SESSION_HPP
#define SURVIVRS_SERVER_SESSION_HPP

// One guidance session as seen by the service: the signal state, the relay
// hub, the annotation authority and the open recording, independent of the
// transport. Transports hand in decoded-or-raw messages per connection and
// implement PeerLink to get messages and frames out.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "survivrs/annot/digest.hpp"
#include "survivrs/annot/state.hpp"
#include "survivrs/core/canonical.hpp"
#include "survivrs/core/clock.hpp"
#include "survivrs/core/frame.hpp"
#include "survivrs/record/format.hpp"
#include "survivrs/record/replay.hpp"
#include "survivrs/relay/hub.hpp"
#include "survivrs/signal/handshake.hpp"

namespace survivrs::server {

/// Outbound side of one peer connection. Implementations must be thread-safe
/// and must not block: they queue.
class PeerLink {
 public:
  virtual ~PeerLink() = default;
  virtual void send_text(std::string text) = 0;
  /// Frames are waiting; pull them with Connection::next_frame().
  virtual void frames_ready() = 0;
  /// Deliver what is queued, then close.
  virtual void close() = 0;
};

class Connection {
 public:
  Connection(std::uint64_t id, std::shared_ptr<PeerLink> link) : id_(id), link_(std::move(link)) {}

  std::uint64_t id() const noexcept { return id_; }
  PeerLink& link() const noexcept { return *link_; }

  /// Next relayed frame for this peer, round-robin across its streams.
  std::optional<MediaFrame> next_frame() {
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < subs_.size(); ++i) {
      auto& sub = subs_[(rr_ + i) % subs_.size()];
      if (auto f = sub.try_next()) {
        rr_ = (rr_ + i + 1) % subs_.size();
        return f;
      }
    }
    return std::nullopt;
  }

  std::vector<relay::SubscriberStats> subscription_stats() const {
    std::lock_guard lock(mu_);
    std::vector<relay::SubscriberStats> out;
    for (const auto& s : subs_) out.push_back(s.stats());
    return out;
  }

 private:
  friend class Session;

  void set_subscriptions(std::vector<relay::Subscription> subs) {
    std::lock_guard lock(mu_);
    subs_ = std::move(subs);
    rr_ = 0;
  }
  void drop_subscriptions() {
    std::lock_guard lock(mu_);
    subs_.clear();
  }

  std::uint64_t id_;
  std::shared_ptr<PeerLink> link_;
  std::optional<PeerRole> role_;  // guarded by the session mutex

  mutable std::mutex mu_;
  std::vector<relay::Subscription> subs_;
  std::size_t rr_ = 0;
};

struct SessionOptions {
  std::filesystem::path recordings_dir = "recordings";
  std::size_t ring_capacity = relay::kDefaultRingCapacity;
  std::size_t max_payload_bytes = kMaxPayloadBytes;
  std::uint32_t proto_version = kProtoVersion;
  bool record = true;
};

struct SessionCounters {
  std::uint64_t frames_in = 0;
  std::uint64_t frames_rejected = 0;
  std::uint64_t annotations = 0;
  std::uint64_t proposals_rejected = 0;
  std::uint64_t malformed = 0;
  std::uint64_t recording_errors = 0;
};

/// Picks `<id>.svrs` or `<id>-N.svrs`, whichever neither exists nor is in
/// progress, and reserves it by creating the .part file.
inline std::string unique_recording_name(const std::filesystem::path& dir, const SessionId& id) {
  static std::mutex mu;
  std::lock_guard lock(mu);
  for (int n = 1;; ++n) {
    std::string name = n == 1 ? id.str() : id.str() + "-" + std::to_string(n);
    auto final_path = dir / (name + ".svrs");
    auto part = dir / (name + ".svrs.part");
    if (!std::filesystem::exists(final_path) && !std::filesystem::exists(part)) {
      std::ofstream(part, std::ios::binary);
      return name;
    }
  }
}

class Session : public std::enable_shared_from_this<Session> {
 public:
  using ClosedHook = std::function<void(Session&)>;

  static std::shared_ptr<Session> create_live(SessionId id, SessionOptions opts,
                                              ClosedHook on_closed = {}) {
    auto s = std::shared_ptr<Session>(
        new Session(std::move(id), signal::SessionKind::Live, std::move(opts), std::move(on_closed)));
    if (s->opts_.record) s->open_recording();
    return s;
  }

  /// Hosts a finalized recording: the server plays the publisher, a
  /// ReplayViewer may join and review.
  static std::shared_ptr<Session> create_replay(SessionId id, SessionOptions opts,
                                                std::shared_ptr<record::ReplaySession> replay,
                                                ClosedHook on_closed = {}) {
    opts.record = false;
    auto s = std::shared_ptr<Session>(new Session(std::move(id), signal::SessionKind::Replay,
                                                  std::move(opts), std::move(on_closed)));
    s->replay_ = std::move(replay);
    s->scan_replay_streams();
    std::unique_lock lock(s->mu_);
    s->process_signal(lock, nullptr, std::nullopt,
                      sig::Hello{s->id_, PeerRole::RoomPublisher, s->opts_.proto_version}, true);
    return s;
  }

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  ~Session() {
    if (writer_ && !writer_->finalized()) {
      try {
        writer_->finalize();
      } catch (...) {
      }
    }
  }

  const SessionId& id() const noexcept { return id_; }
  signal::SessionKind kind() const noexcept { return kind_; }

  std::shared_ptr<Connection> attach(std::shared_ptr<PeerLink> link) {
    std::lock_guard lock(mu_);
    auto c = std::make_shared<Connection>(next_conn_id_++, std::move(link));
    conns_.push_back(c);
    return c;
  }

  void on_text(const std::shared_ptr<Connection>& conn, std::string_view text) {
    SessionEvent ev;
    try {
      ev = decode_event(text);
    } catch (const MalformedEvent& e) {
      std::unique_lock lock(mu_);
      ++counters_.malformed;
      if (!conn->role_) {
        conn->link().send_text(encode_signal(sig::Bye{"MalformedEvent"}));
        conn->link().close();
        return;
      }
      conn->link().send_text(encode_rejected({"MalformedEvent", std::string(text)}));
      return;
    }
    if (auto* sm = std::get_if<SignalMessage>(&ev)) {
      bool closed = false;
      {
        std::unique_lock lock(mu_);
        closed = process_signal(lock, conn, conn->role_, *sm, false);
      }
      if (closed) finish_close();
    } else if (auto* ae = std::get_if<AnnotationEvent>(&ev)) {
      on_annotation(conn, std::move(*ae));
    } else {
      conn->link().send_text(encode_rejected({"UnexpectedMessage", std::string(text)}));
    }
  }

  void on_binary(const std::shared_ptr<Connection>& conn, ByteView bytes) {
    std::unique_lock lock(mu_);
    auto reject = [&](std::string code, std::string what) {
      ++counters_.frames_rejected;
      conn->link().send_text(encode_rejected({std::move(code), std::move(what)}));
    };
    if (!conn->role_ || state_.phase != signal::SessionPhase::Streaming) {
      return reject("UnexpectedMessage", "frame");
    }
    if (bytes.size() > opts_.max_payload_bytes + 4096) return reject("PayloadTooLarge", "frame");
    MediaFrame in;
    try {
      in = decode_frame_message(bytes);
    } catch (const FrameFormatError& e) {
      return reject("MalformedFrame", e.what());
    }
    PeerRole role = *conn->role_;
    StreamSet allowed = role == PeerRole::RoomPublisher ? state_.downstream() : state_.upstream();
    if (!may_publish(role, in.stream) || !allowed.contains(in.stream)) {
      return reject("UnauthorizedStream", std::string(to_string(in.stream)));
    }
    if (in.payload->size() > opts_.max_payload_bytes) {
      return reject("PayloadTooLarge", std::string(to_string(in.stream)));
    }
    MediaFrame f;
    try {
      f = hub_->channel(in.stream)->publish_at(role, {in.content_type, in.payload, in.key},
                                               clock_.now_us());
    } catch (const relay::RelayException& e) {
      return reject(std::string(relay::to_string(e.code())), std::string(to_string(in.stream)));
    }
    ++counters_.frames_in;
    if (writer_ && !recording_failed_) {
      try {
        writer_->append_frame(f, f.ts_us);
      } catch (const record::RecordError& e) {
        recording_error(e);
      }
    }
  }

  void on_disconnect(const std::shared_ptr<Connection>& conn) {
    bool closed = false;
    {
      std::unique_lock lock(mu_);
      std::erase(conns_, conn);
      conn->drop_subscriptions();
      auto joined = conn->role_ ? roles_.find(*conn->role_) : roles_.end();
      if (joined != roles_.end() && joined->second == conn) {
        PeerRole role = *conn->role_;
        roles_.erase(role);
        auto out = signal::on_disconnect(state_, role);
        bool was_closing = state_.phase == signal::SessionPhase::Closing;
        state_ = out.state;
        deliver(lock, out.outbound, true);
        if (!was_closing && state_.phase == signal::SessionPhase::Closing) {
          spdlog::info("session {}: {} disconnected", id_.str(), to_string(role));
          closed = teardown(lock);
        }
      } else if (conns_.empty() && roles_.empty() && !virtual_publisher() &&
                 state_.phase == signal::SessionPhase::Idle) {
        state_.phase = signal::SessionPhase::Closing;
        closed = teardown(lock);
      }
    }
    if (closed) finish_close();
  }

  /// Ends the session from the server side (shutdown).
  void shutdown(const std::string& reason) {
    bool closed = false;
    {
      std::unique_lock lock(mu_);
      if (state_.phase == signal::SessionPhase::Closing ||
          state_.phase == signal::SessionPhase::Closed) {
        return;
      }
      std::vector<signal::Outbound> byes;
      for (const auto& [role, conn] : roles_) byes.push_back({role, sig::Bye{reason}});
      state_.phase = signal::SessionPhase::Closing;
      deliver(lock, byes, true);
      closed = teardown(lock);
    }
    if (closed) finish_close();
  }

  signal::SessionPhase phase() const {
    std::lock_guard lock(mu_);
    return state_.phase;
  }
  signal::SignalState signal_state() const {
    std::lock_guard lock(mu_);
    return state_;
  }
  annot::AnnotationState annotation_state() const {
    std::lock_guard lock(mu_);
    if (replay_) return replay_->review_state();
    return annot_;
  }
  SessionCounters counters() const {
    std::lock_guard lock(mu_);
    return counters_;
  }
  std::shared_ptr<relay::RelayHub> hub() const { return hub_; }
  relay::LagReport sync_skew() const { return hub_->sync_skew(clock_.now_us()); }
  std::uint64_t now_us() const { return clock_.now_us(); }
  /// Final recording path once the session closed with a kept recording.
  std::optional<std::filesystem::path> recording() const {
    std::lock_guard lock(mu_);
    return final_recording_;
  }
  bool reached_streaming() const {
    std::lock_guard lock(mu_);
    return reached_streaming_;
  }

  /// Blocks until the session is Closed or the timeout passes.
  bool wait_closed(std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mu_);
    return closed_cv_.wait_for(lock, timeout,
                               [&] { return state_.phase == signal::SessionPhase::Closed; });
  }
  bool wait_streaming(std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mu_);
    return closed_cv_.wait_for(lock, timeout, [&] {
      return state_.phase == signal::SessionPhase::Streaming ||
             state_.phase == signal::SessionPhase::Closed;
    }) && state_.phase == signal::SessionPhase::Streaming;
  }

  /// Prometheus-style text lines for /metrics.
  void write_metrics(std::ostream& out) const {
    const std::string sid = "session=\"" + id_.str() + "\"";
    std::lock_guard lock(mu_);
    out << "survivrs_session_phase{" << sid << ",phase=\"" << to_string(state_.phase) << "\"} 1\n";
    auto lag = hub_->sync_skew(clock_.now_us());
    for (StreamKind k : kAllStreamKinds) {
      const auto& ch = hub_->channel(k);
      std::string lbl = sid + ",stream=\"" + std::string(to_string(k)) + "\"";
      out << "survivrs_frames_published_total{" << lbl << "} " << ch->published() << "\n";
      out << "survivrs_frames_evicted_total{" << lbl << "} " << ch->evictions() << "\n";
      if (lag[k]) out << "survivrs_sync_lag_us{" << lbl << "} " << *lag[k] << "\n";
    }
    if (auto spread = relay::skew_spread(
            lag, {StreamKind::Surround360, StreamKind::Site, StreamKind::Vitals})) {
      out << "survivrs_sync_skew_us{" << sid << "} " << *spread << "\n";
    }
    out << "survivrs_annotation_events_total{" << sid << "} " << counters_.annotations << "\n";
    out << "survivrs_proposals_rejected_total{" << sid << "} " << counters_.proposals_rejected
        << "\n";
    out << "survivrs_frames_rejected_total{" << sid << "} " << counters_.frames_rejected << "\n";
    out << "survivrs_malformed_messages_total{" << sid << "} " << counters_.malformed << "\n";
  }

 private:
  Session(SessionId id, signal::SessionKind kind, SessionOptions opts, ClosedHook on_closed)
      : id_(std::move(id)),
        kind_(kind),
        opts_(std::move(opts)),
        on_closed_(std::move(on_closed)),
        state_(signal::SignalState::fresh(id_, kind, opts_.proto_version)) {
    relay::ChannelOptions co;
    co.capacity = opts_.ring_capacity;
    hub_ = std::make_shared<relay::RelayHub>(co, [this] { return clock_.now_us(); });
  }

  bool virtual_publisher() const noexcept { return replay_ != nullptr; }

  void open_recording() {
    recording_name_ = unique_recording_name(opts_.recordings_dir, id_);
    part_path_ = opts_.recordings_dir / (recording_name_ + ".svrs.part");
    writer_ = std::make_unique<record::RecordingWriter>(
        part_path_, record::Header{record::kFormatVersion, wallclock_now_us(), id_.str()});
  }

  void recording_error(const record::RecordError& e) {
    ++counters_.recording_errors;
    recording_failed_ = true;
    spdlog::error("session {}: recording stopped: {}", id_.str(), e.what());
  }

  void record_signal(const SignalMessage& m) {
    if (!writer_ || recording_failed_) return;
    try {
      writer_->append_signal(encode_signal(m), clock_.now_us());
    } catch (const record::RecordError& e) {
      recording_error(e);
    }
  }

  /// Runs one signal message (and any replies of the virtual publisher)
  /// through the state machine. Returns true if the session reached Closed.
  bool process_signal(std::unique_lock<std::mutex>& lock, std::shared_ptr<Connection> conn,
                      std::optional<PeerRole> sender, SignalMessage msg, bool from_virtual) {
    struct Item {
      std::shared_ptr<Connection> conn;
      std::optional<PeerRole> sender;
      SignalMessage msg;
      bool from_virtual;
    };
    std::vector<Item> queue{{std::move(conn), sender, std::move(msg), from_virtual}};
    bool closed = false;
    for (std::size_t i = 0; i < queue.size() && !closed; ++i) {
      Item it = queue[i];
      const auto prev = state_.phase;
      auto out = signal::handle_signal(state_, it.sender, it.msg);
      if (out.error && out.error->scope == signal::ErrorScope::Connection) {
        spdlog::info("session {}: refused connection: {}", id_.str(), to_string(out.error->code));
        if (it.conn) {
          it.conn->link().send_text(
              encode_signal(sig::Bye{std::string(to_string(out.error->code))}));
          it.conn->link().close();
        }
        continue;
      }
      if (!out.error) record_signal(it.msg);
      if (!it.sender && !out.error) {
        PeerRole r = std::get<sig::Hello>(it.msg).role;
        if (it.conn) {
          it.conn->role_ = r;
          roles_[r] = it.conn;
        }
      }
      state_ = out.state;
      if (out.error) {
        spdlog::warn("session {}: protocol error {}", id_.str(), to_string(out.error->code));
      }
      for (auto& reply : deliver(lock, out.outbound, out.error.has_value())) {
        queue.push_back({nullptr, PeerRole::RoomPublisher, std::move(reply), true});
      }
      if (prev != signal::SessionPhase::Streaming &&
          state_.phase == signal::SessionPhase::Streaming) {
        start_streaming();
      }
      if (prev != signal::SessionPhase::Closing && state_.phase == signal::SessionPhase::Closing) {
        closed = teardown(lock);
      }
    }
    closed_cv_.notify_all();
    return closed;
  }

  /// Sends outbound signal messages; returns the virtual publisher's replies.
  std::vector<SignalMessage> deliver(std::unique_lock<std::mutex>&,
                                     const std::vector<signal::Outbound>& out, bool record_byes) {
    std::vector<SignalMessage> replies;
    for (const auto& o : out) {
      if (record_byes && std::holds_alternative<sig::Bye>(o.message)) record_signal(o.message);
      if (o.to == PeerRole::RoomPublisher && virtual_publisher()) {
        if (auto r = virtual_reply(o.message)) replies.push_back(std::move(*r));
        continue;
      }
      auto it = roles_.find(o.to);
      if (it != roles_.end()) it->second->link().send_text(encode_signal(o.message));
    }
    return replies;
  }

  // The server-side replayer answers the viewer's handshake: it offers every
  // stream present in the file, asks for nothing, and grants what is asked.
  std::optional<SignalMessage> virtual_reply(const SignalMessage& m) {
    if (std::holds_alternative<sig::Hello>(m)) return replay_advertise_;
    if (std::holds_alternative<sig::StreamAdvertise>(m)) return sig::StreamRequest{};
    if (const auto* req = std::get_if<sig::StreamRequest>(&m)) return sig::StreamAck{req->streams};
    return std::nullopt;
  }

  void scan_replay_streams() {
    auto in = record::open_input(replay_->source_path());
    record::RecordingReader reader(in);
    while (auto rec = reader.next()) {
      if (const auto* f = std::get_if<MediaFrame>(&rec->item)) {
        replay_advertise_.streams.emplace(f->stream, f->content_type);
      }
    }
  }

  void start_streaming() {
    reached_streaming_ = true;
    spdlog::info("session {}: streaming", id_.str());
    for (const auto& [role, conn] : roles_) {
      StreamSet wanted = role == PeerRole::RoomPublisher ? state_.upstream() : state_.downstream();
      std::vector<relay::Subscription> subs;
      std::weak_ptr<Connection> weak = conn;
      wanted.for_each([&](StreamKind k) {
        subs.push_back(hub_->channel(k)->subscribe(relay::StartAt::latest(), [weak] {
          if (auto c = weak.lock()) c->link().frames_ready();
        }));
      });
      conn->set_subscriptions(std::move(subs));
    }
    if (replay_) start_replay_thread();
  }

  void start_replay_thread() {
    replay_running_ = true;
    StreamSet streams = state_.downstream();
    std::shared_ptr<Connection> viewer;
    if (auto it = roles_.find(PeerRole::ReplayViewer); it != roles_.end()) viewer = it->second;
    std::thread([self = shared_from_this(), streams, viewer] {
      record::ReplaySink sink = [&](const record::Record& rec) {
        if (const auto* f = std::get_if<MediaFrame>(&rec.item)) {
          if (!streams.contains(f->stream)) return;
          try {
            self->hub_->channel(f->stream)->publish_stamped(*f);
          } catch (const relay::RelayException&) {
            self->replay_->stop();
          }
        } else if (const auto* a = std::get_if<record::AnnotationText>(&rec.item)) {
          if (viewer) viewer->link().send_text(a->text);
        }
      };
      record::ReplayReport rep;
      try {
        rep = self->replay_->run(sink);
      } catch (const std::exception& e) {
        spdlog::error("session {}: replay failed: {}", self->id_.str(), e.what());
      }
      bool closed = false;
      {
        std::unique_lock lock(self->mu_);
        if (self->state_.phase == signal::SessionPhase::Streaming) {
          closed = self->process_signal(lock, nullptr, PeerRole::RoomPublisher,
                                        sig::Bye{"replay-complete"}, true);
        }
        self->replay_running_ = false;
        self->closed_cv_.notify_all();
      }
      if (closed) self->finish_close();
    }).detach();
  }

  void on_annotation(const std::shared_ptr<Connection>& conn, AnnotationEvent proposal) {
    std::string proposal_text = encode_annotation(proposal);
    std::unique_lock lock(mu_);
    auto reject = [&](std::string code) {
      ++counters_.proposals_rejected;
      conn->link().send_text(encode_rejected({std::move(code), proposal_text}));
    };
    if (!conn->role_ || state_.phase != signal::SessionPhase::Streaming) {
      return reject("UnexpectedMessage");
    }
    PeerRole role = *conn->role_;
    if (replay_) {
      if (role != PeerRole::ReplayViewer) return reject("RoleNotAllowed");
      lock.unlock();  // the replayer has its own lock and calls back into links only
      auto r = replay_->annotate(std::move(proposal));
      if (auto* e = std::get_if<AnnotationEvent>(&r)) {
        conn->link().send_text(encode_annotation(*e));
      } else {
        std::lock_guard relock(mu_);
        ++counters_.proposals_rejected;
        conn->link().send_text(encode_rejected(
            {std::string(annot::to_string(std::get<annot::ApplyError>(r))), proposal_text}));
      }
      return;
    }
    if (role != PeerRole::RemoteGuide) return reject("RoleNotAllowed");

    StreamKind s = stream_of(proposal.action);
    AnnotationEvent e = std::move(proposal);
    e.seq = annot_.next_seq();
    e.ts_us = clock_.now_us();
    e.frame_seq = hub_->channel(s)->latest_seq();
    std::vector<annot::DerivedEffect> fx;
    if (auto err = annot::apply_in_place(annot_, e, fx)) {
      return reject(std::string(annot::to_string(*err)));
    }
    ++counters_.annotations;
    std::string text = encode_annotation(e);
    for (const auto& [r, c] : roles_) c->link().send_text(text);
    if (writer_ && !recording_failed_) {
      try {
        writer_->append_annotation(text, *e.ts_us);
      } catch (const record::RecordError& ex) {
        recording_error(ex);
      }
    }
  }

  /// Closing -> Closed: stops relaying, settles the recording, closes links.
  bool teardown(std::unique_lock<std::mutex>&) {
    hub_->close();
    for (auto& c : conns_) c->drop_subscriptions();
    if (replay_) replay_->stop();
    settle_recording();
    for (auto& c : conns_) c->link().close();
    auto out = signal::on_closed(state_);
    state_ = out.state;
    closed_cv_.notify_all();
    spdlog::info("session {}: closed{}", id_.str(),
                 final_recording_ ? " -> " + final_recording_->string() : std::string());
    return true;
  }

  void settle_recording() {
    if (!writer_) return;
    try {
      writer_->finalize();
    } catch (const record::RecordError& e) {
      recording_error(e);
    }
    std::error_code ec;
    if (reached_streaming_ && !recording_failed_) {
      auto final_path = opts_.recordings_dir / (recording_name_ + ".svrs");
      std::filesystem::rename(part_path_, final_path, ec);
      if (!ec) final_recording_ = final_path;
    } else if (!reached_streaming_) {
      std::filesystem::remove(part_path_, ec);
    }
    // A failed recording keeps its .part file for recovery.
  }

  void finish_close() {
    if (replay_) {
      std::unique_lock lock(mu_);
      closed_cv_.wait_for(lock, std::chrono::seconds(5), [&] { return !replay_running_; });
      lock.unlock();
      replay_->finish();
    }
    if (on_closed_) on_closed_(*this);
  }

  const SessionId id_;
  const signal::SessionKind kind_;
  const SessionOptions opts_;
  ClosedHook on_closed_;
  SessionClock clock_;

  mutable std::mutex mu_;
  mutable std::condition_variable closed_cv_;
  signal::SignalState state_;
  std::shared_ptr<relay::RelayHub> hub_;
  annot::AnnotationState annot_;
  SessionCounters counters_;
  std::vector<std::shared_ptr<Connection>> conns_;
  std::map<PeerRole, std::shared_ptr<Connection>> roles_;
  std::uint64_t next_conn_id_ = 1;
  bool reached_streaming_ = false;

  std::string recording_name_;
  std::filesystem::path part_path_;
  std::unique_ptr<record::RecordingWriter> writer_;
  bool recording_failed_ = false;
  std::optional<std::filesystem::path> final_recording_;

  std::shared_ptr<record::ReplaySession> replay_;
  sig::StreamAdvertise replay_advertise_;
  bool replay_running_ = false;
};

/// SessionId -> live session. Entries disappear once their session closed
/// and settled its recording.
class SessionRegistry {
 public:
  explicit SessionRegistry(SessionOptions opts) : opts_(std::move(opts)) {}

  ~SessionRegistry() { shutdown("server-shutdown"); }

  /// Existing session for `id`, or a new live one.
  std::shared_ptr<Session> open(const SessionId& id) {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it != sessions_.end()) return it->second;
    auto s = Session::create_live(id, opts_, hook());
    sessions_.emplace(id, s);
    return s;
  }

  /// Registers a replay session. Throws std::invalid_argument if the id is taken.
  std::shared_ptr<Session> host_replay(const SessionId& id,
                                       std::shared_ptr<record::ReplaySession> replay) {
    std::lock_guard lock(mu_);
    if (sessions_.count(id)) throw std::invalid_argument("session exists: " + id.str());
    auto s = Session::create_replay(id, opts_, std::move(replay), hook());
    sessions_.emplace(id, s);
    return s;
  }

  std::shared_ptr<Session> find(const SessionId& id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  std::vector<std::shared_ptr<Session>> list() const {
    std::lock_guard lock(mu_);
    std::vector<std::shared_ptr<Session>> out;
    for (const auto& [_, s] : sessions_) out.push_back(s);
    return out;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
  }

  void shutdown(const std::string& reason) {
    for (auto& s : list()) s->shutdown(reason);
  }

  const SessionOptions& options() const noexcept { return opts_; }

  /// Recordings closed so far, in order.
  std::vector<std::filesystem::path> finished_recordings() const {
    std::lock_guard lock(mu_);
    return finished_;
  }

 private:
  Session::ClosedHook hook() {
    return [this](Session& s) {
      std::lock_guard lock(mu_);
      auto it = sessions_.find(s.id());
      if (it != sessions_.end() && it->second.get() == &s) sessions_.erase(it);
      if (auto rec = s.recording()) finished_.push_back(*rec);
    };
  }

  SessionOptions opts_;
  mutable std::mutex mu_;
  std::map<SessionId, std::shared_ptr<Session>> sessions_;
  std::vector<std::filesystem::path> finished_;
};

}  // namespace survivrs::server

#endif  // SURVIVRS_SERVER_SESSION_HPP
