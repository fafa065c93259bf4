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

#ifndef SURVIVRS_SERVER_CLIENT_HPP
#define SURVIVRS_SERVER_CLIENT_HPP

// Client side of the control channel: a WebSocket connection on its own I/O
// thread, and a peer that runs the handshake for a given role.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "survivrs/core/canonical.hpp"
#include "survivrs/core/clock.hpp"
#include "survivrs/core/frame.hpp"
#include "survivrs/server/ws.hpp"

namespace survivrs::server {

class ClientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raw control-channel connection.
class ControlClient {
 public:
  ControlClient() = default;
  ControlClient(const ControlClient&) = delete;
  ControlClient& operator=(const ControlClient&) = delete;
  ~ControlClient() {
    close();
    wait_closed(std::chrono::seconds(2));
    work_.reset();
    ioc_.stop();
    if (thread_.joinable()) thread_.join();
  }

  /// Connects to ws://host:port<target>. Throws ClientError.
  void connect(const std::string& host, std::uint16_t port, const std::string& target,
               WsPeer::Handlers h) {
    try {
      tcp::resolver resolver(ioc_);
      auto results = resolver.resolve(host, std::to_string(port));
      WsStream ws(net::make_strand(ioc_));
      beast::get_lowest_layer(ws).connect(results);
      beast::get_lowest_layer(ws).socket().set_option(tcp::no_delay(true));
      ws.handshake(host + ":" + std::to_string(port), target);
      peer_ = std::make_shared<WsPeer>(std::move(ws), kMaxPayloadBytes + 4096);
    } catch (const beast::system_error& e) {
      throw ClientError("connect " + host + ":" + std::to_string(port) + target + ": " +
                        e.code().message());
    }
    auto user_close = std::move(h.on_close);
    h.on_close = [this, user_close] {
      if (user_close) user_close();
      std::lock_guard lock(mu_);
      closed_ = true;
      cv_.notify_all();
    };
    peer_->start(std::move(h));
    thread_ = std::thread([this] { ioc_.run(); });
  }

  void send_text(std::string text) {
    if (peer_) peer_->send_text(std::move(text));
  }
  void send_binary(Bytes b) {
    if (peer_) peer_->send_binary(std::make_shared<const Bytes>(std::move(b)));
  }
  void close() {
    if (peer_) peer_->close();
  }
  std::size_t queued_binary() const { return peer_ ? peer_->queued_binary() : 0; }
  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_;
  }
  bool wait_closed(std::chrono::milliseconds timeout) {
    if (!peer_) return true;
    std::unique_lock lock(mu_);
    return cv_.wait_for(lock, timeout, [&] { return closed_; });
  }

 private:
  net::io_context ioc_;
  std::optional<net::executor_work_guard<net::io_context::executor_type>> work_{
      net::make_work_guard(ioc_)};
  std::thread thread_;
  std::shared_ptr<WsPeer> peer_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  bool closed_ = false;
};

/// Plain HTTP GET against the service; returns {status, body}.
inline std::pair<int, std::string> http_get(const std::string& host, std::uint16_t port,
                                            const std::string& target) {
  namespace http = beast::http;
  net::io_context ioc;
  tcp::resolver resolver(ioc);
  beast::tcp_stream stream(ioc);
  stream.connect(resolver.resolve(host, std::to_string(port)));
  http::request<http::string_body> req{http::verb::get, target, 11};
  req.set(http::field::host, host);
  http::write(stream, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(stream, buf, res);
  beast::error_code ec;
  stream.socket().shutdown(tcp::socket::shutdown_both, ec);
  return {res.result_int(), res.body()};
}

struct PeerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8765;
  SessionId session{"demo"};
  PeerRole role = PeerRole::RoomPublisher;
  std::uint32_t proto_version = kProtoVersion;
  /// Streams this peer offers to send, with content types.
  std::map<StreamKind, std::string> offer;
  /// Streams this peer would like to receive.
  StreamSet want;
};

/// Handshake failure: the server's Bye reason (a ProtocolError code) or a
/// timeout/transport description.
class HandshakeError : public std::runtime_error {
 public:
  explicit HandshakeError(std::string code)
      : std::runtime_error("handshake failed: " + code), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// A session participant: runs the handshake, then publishes frames and
/// proposals and surfaces what the server relays.
class PeerClient {
 public:
  /// recv_us is the host steady clock at receipt.
  using FrameHandler = std::function<void(const MediaFrame&, std::uint64_t recv_us)>;
  using EventHandler = std::function<void(const AnnotationEvent&, const std::string& text)>;
  using RejectHandler = std::function<void(const Rejected&)>;

  explicit PeerClient(PeerOptions opts) : opts_(std::move(opts)) {}

  void on_frame(FrameHandler h) { on_frame_ = std::move(h); }
  void on_event(EventHandler h) { on_event_ = std::move(h); }
  void on_rejected(RejectHandler h) { on_rejected_ = std::move(h); }

  /// Connects and completes the handshake. Throws HandshakeError.
  void start(std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
    WsPeer::Handlers h;
    h.on_text = [this](std::string t) { handle_text(t); };
    h.on_binary = [this](Bytes b) { handle_binary(b); };
    h.on_close = [this] {
      std::lock_guard lock(mu_);
      transport_closed_ = true;
      cv_.notify_all();
    };
    try {
      client_.connect(opts_.host, opts_.port, "/ws/signal/" + opts_.session.str(), std::move(h));
    } catch (const ClientError& e) {
      throw HandshakeError(e.what());
    }
    client_.send_text(encode_signal(sig::Hello{opts_.session, opts_.role, opts_.proto_version}));
    std::unique_lock lock(mu_);
    bool done = cv_.wait_for(lock, timeout, [&] {
      return streaming_ || bye_reason_.has_value() || transport_closed_;
    });
    if (streaming_) return;
    if (bye_reason_) throw HandshakeError(*bye_reason_);
    if (transport_closed_) throw HandshakeError("ConnectionClosed");
    if (!done) throw HandshakeError("Timeout");
  }

  /// Sends one frame on a stream this peer was granted; returns its seq.
  std::uint64_t publish(StreamKind k, const std::string& content_type, Bytes payload,
                        bool key = true) {
    MediaFrame f;
    f.stream = k;
    f.seq = next_seq_[k]++;
    f.key = key;
    f.content_type = content_type;
    f.payload = std::make_shared<const Bytes>(std::move(payload));
    client_.send_binary(encode_frame_message(f));
    return f.seq;
  }

  void propose(const AnnotationEvent& proposal) { client_.send_text(encode_annotation(proposal)); }
  void send_raw_text(std::string text) { client_.send_text(std::move(text)); }

  /// Leaves the session and waits for the server to close the channel.
  void leave(const std::string& reason = "done",
             std::chrono::milliseconds timeout = std::chrono::seconds(5)) {
    {
      std::lock_guard lock(mu_);
      if (transport_closed_) return;
    }
    client_.send_text(encode_signal(sig::Bye{reason}));
    wait_closed(timeout);
  }

  bool wait_closed(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    return cv_.wait_for(lock, timeout, [&] { return transport_closed_; });
  }

  bool streaming() const {
    std::lock_guard lock(mu_);
    return streaming_;
  }
  bool closed() const {
    std::lock_guard lock(mu_);
    return transport_closed_;
  }
  std::optional<std::string> bye_reason() const {
    std::lock_guard lock(mu_);
    return bye_reason_;
  }
  /// Streams this peer agreed to send.
  StreamSet sending() const {
    std::lock_guard lock(mu_);
    return my_ack_.value_or(StreamSet{});
  }
  /// Streams the other side agreed to send us.
  StreamSet receiving() const {
    std::lock_guard lock(mu_);
    return their_ack_.value_or(StreamSet{});
  }
  std::size_t queued_binary() const { return client_.queued_binary(); }
  const PeerOptions& options() const noexcept { return opts_; }

 private:
  void handle_text(const std::string& text) {
    SessionEvent ev;
    try {
      ev = decode_event(text);
    } catch (const MalformedEvent&) {
      return;
    }
    if (auto* a = std::get_if<AnnotationEvent>(&ev)) {
      if (on_event_) on_event_(*a, text);
      return;
    }
    if (auto* r = std::get_if<Rejected>(&ev)) {
      if (on_rejected_) on_rejected_(*r);
      return;
    }
    handle_signal(std::get<SignalMessage>(ev));
  }

  void handle_signal(const SignalMessage& m) {
    std::unique_lock lock(mu_);
    std::optional<SignalMessage> reply;
    if (std::holds_alternative<sig::Hello>(m)) {
      reply = sig::StreamAdvertise{opts_.offer};
    } else if (const auto* adv = std::get_if<sig::StreamAdvertise>(&m)) {
      StreamSet req;
      opts_.want.for_each([&](StreamKind k) {
        if (adv->kinds().contains(k)) req.insert(k);
      });
      reply = sig::StreamRequest{req};
    } else if (const auto* req = std::get_if<sig::StreamRequest>(&m)) {
      my_ack_ = req->streams;
      reply = sig::StreamAck{req->streams};
    } else if (const auto* ack = std::get_if<sig::StreamAck>(&m)) {
      their_ack_ = ack->streams;
    } else if (const auto* bye = std::get_if<sig::Bye>(&m)) {
      bye_reason_ = bye->reason;
    }
    if (reply) client_.send_text(encode_signal(*reply));
    if (my_ack_ && their_ack_) streaming_ = true;
    cv_.notify_all();
  }

  void handle_binary(const Bytes& b) {
    std::uint64_t now = steady_now_us();
    MediaFrame f;
    try {
      f = decode_frame_message(b);
    } catch (const FrameFormatError&) {
      return;
    }
    if (on_frame_) on_frame_(f, now);
  }

  PeerOptions opts_;
  FrameHandler on_frame_;
  EventHandler on_event_;
  RejectHandler on_rejected_;
  std::map<StreamKind, std::uint64_t> next_seq_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  bool streaming_ = false;
  bool transport_closed_ = false;
  std::optional<std::string> bye_reason_;
  std::optional<StreamSet> my_ack_;
  std::optional<StreamSet> their_ack_;

  ControlClient client_;  // last: its thread stops before the members above go
};

}  // namespace survivrs::server

#endif  // SURVIVRS_SERVER_CLIENT_HPP
