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

#ifndef SURVIVRS_SERVER_SERVICE_HPP
#define SURVIVRS_SERVER_SERVICE_HPP

// The network service: one TCP port carrying both the WebSocket control
// channel (/ws/signal/<session-id>) and the HTTP endpoints.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "survivrs/server/config.hpp"
#include "survivrs/server/session.hpp"
#include "survivrs/server/ws.hpp"

namespace survivrs::server {

namespace http = beast::http;

class BindFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kSignalPathPrefix = "/ws/signal/";

inline SessionOptions session_options(const ServerConfig& c) {
  SessionOptions o;
  o.recordings_dir = c.recordings_dir;
  o.ring_capacity = c.ring_capacity;
  o.max_payload_bytes = c.max_payload_bytes;
  o.proto_version = c.proto_version;
  return o;
}

/// Recording ids are file names without the .svrs suffix.
inline bool valid_recording_id(std::string_view id) {
  if (id.empty() || id.size() > 200 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_';
  }) && id.find("..") == std::string_view::npos;
}

inline nlohmann::json list_recordings(const std::filesystem::path& dir) {
  std::vector<std::pair<std::string, std::uintmax_t>> items;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(dir, ec)) {
    if (!e.is_regular_file()) continue;
    std::string name = e.path().filename().string();
    if (name.size() <= 5 || name.compare(name.size() - 5, 5, ".svrs") != 0) continue;
    items.emplace_back(name.substr(0, name.size() - 5), e.file_size());
  }
  std::sort(items.begin(), items.end());
  auto out = nlohmann::json::array();
  for (const auto& [id, size] : items) out.push_back({{"id", id}, {"bytes", size}});
  return out;
}

/// Server-side PeerLink over a WsPeer.
class WsPeerLink : public PeerLink {
 public:
  explicit WsPeerLink(std::shared_ptr<WsPeer> peer) : peer_(std::move(peer)) {}
  void send_text(std::string text) override { peer_->send_text(std::move(text)); }
  void frames_ready() override { peer_->frames_ready(); }
  void close() override { peer_->close(); }

 private:
  std::shared_ptr<WsPeer> peer_;
};

class Service;

namespace detail {

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, Service& svc) : stream_(std::move(socket)), svc_(svc) {}
  void run() {
    net::dispatch(stream_.get_executor(), [self = shared_from_this()] { self->read(); });
  }

 private:
  void read();
  void on_request();
  void respond(http::status status, std::string body, std::string content_type);
  void upgrade(const SessionId& id);

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  Service& svc_;
};

}  // namespace detail

class Service {
 public:
  explicit Service(ServerConfig cfg, unsigned threads = 2)
      : cfg_(std::move(cfg)), threads_(std::max(1u, threads)), registry_(session_options(cfg_)) {
    validate(cfg_);
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;
  ~Service() { stop(); }

  /// Binds and starts serving on background threads. Throws BindFailure.
  void start() {
    beast::error_code ec;
    auto addr = net::ip::make_address(cfg_.bind, ec);
    if (ec) throw BindFailure("bad bind address '" + cfg_.bind + "': " + ec.message());
    tcp::endpoint ep{addr, cfg_.port};
    acceptor_.open(ep.protocol(), ec);
    if (!ec) acceptor_.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor_.bind(ep, ec);
    if (!ec) acceptor_.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw BindFailure(cfg_.bind + ":" + std::to_string(cfg_.port) + ": " + ec.message());
    port_ = acceptor_.local_endpoint().port();
    accept();
    for (unsigned i = 0; i < threads_; ++i) pool_.emplace_back([this] { ioc_.run(); });
    spdlog::info("listening on {}:{}", cfg_.bind, port_);
  }

  /// Ends every session (recordings finalize) and stops the threads.
  void stop() {
    if (stopped_.exchange(true)) return;
    registry_.shutdown("server-shutdown");
    net::post(acceptor_.get_executor(), [this] {
      beast::error_code ec;
      acceptor_.close(ec);
    });
    // Let queued Bye/close frames go out before tearing the loop down.
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(500);
    while (registry_.size() > 0 && std::chrono::steady_clock::now() < deadline) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    ioc_.stop();
    for (auto& t : pool_) {
      if (t.joinable()) t.join();
    }
    pool_.clear();
  }

  /// Blocks the caller until stop() is called from elsewhere.
  void wait() {
    for (auto& t : pool_) {
      if (t.joinable()) t.join();
    }
  }

  std::uint16_t port() const noexcept { return port_; }
  const ServerConfig& config() const noexcept { return cfg_; }
  SessionRegistry& registry() noexcept { return registry_; }
  net::io_context& io() noexcept { return ioc_; }

  std::string metrics_text() const {
    std::ostringstream out;
    auto sessions = registry_.list();
    out << "survivrs_sessions " << sessions.size() << "\n";
    for (const auto& s : sessions) s->write_metrics(out);
    return out.str();
  }

  nlohmann::json sessions_json() const {
    auto out = nlohmann::json::array();
    for (const auto& s : registry_.list()) {
      out.push_back({{"id", s->id().str()},
                     {"kind", s->kind() == signal::SessionKind::Live ? "live" : "replay"},
                     {"phase", std::string(to_string(s->phase()))}});
    }
    return out;
  }

  /// Authoritative annotation state summary; lets a client check that its
  /// local fold converged.
  std::optional<nlohmann::json> session_state_json(const SessionId& id) const {
    auto s = registry_.find(id);
    if (!s) return std::nullopt;
    auto st = s->annotation_state();
    nlohmann::json j = {{"session", id.str()},
                        {"phase", std::string(to_string(s->phase()))},
                        {"state_hash", annot::state_hash_hex(st)}};
    j["last_seq"] = st.last_seq ? nlohmann::json(*st.last_seq) : nlohmann::json(nullptr);
    return j;
  }

 private:
  friend class detail::HttpConnection;

  void accept() {
    acceptor_.async_accept(net::make_strand(ioc_), [this](beast::error_code ec, tcp::socket s) {
      if (ec) {
        if (ec == net::error::operation_aborted || !acceptor_.is_open()) return;
        spdlog::warn("accept: {}", ec.message());
      } else {
        beast::error_code ignored;
        s.set_option(tcp::no_delay(true), ignored);
        std::make_shared<detail::HttpConnection>(std::move(s), *this)->run();
      }
      accept();
    });
  }

  ServerConfig cfg_;
  unsigned threads_;
  net::io_context ioc_;
  tcp::acceptor acceptor_{net::make_strand(ioc_)};
  std::vector<std::thread> pool_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopped_{false};
  SessionRegistry registry_;
};

namespace detail {

inline void HttpConnection::read() {
  req_ = {};
  stream_.expires_after(std::chrono::seconds(30));
  http::async_read(stream_, buffer_, req_,
                   [self = shared_from_this()](beast::error_code ec, std::size_t) {
                     if (ec) {
                       beast::error_code ignored;
                       self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                       return;
                     }
                     self->on_request();
                   });
}

inline void HttpConnection::on_request() {
  std::string target(req_.target());
  if (auto q = target.find('?'); q != std::string::npos) target.erase(q);

  if (websocket::is_upgrade(req_)) {
    if (target.rfind(kSignalPathPrefix, 0) == 0) {
      if (auto id = SessionId::parse(target.substr(kSignalPathPrefix.size()))) {
        return upgrade(*id);
      }
      return respond(http::status::bad_request, "invalid session id\n", "text/plain");
    }
    return respond(http::status::not_found, "not found\n", "text/plain");
  }
  if (req_.method() != http::verb::get) {
    return respond(http::status::method_not_allowed, "method not allowed\n", "text/plain");
  }
  if (target == "/healthz") return respond(http::status::ok, "ok\n", "text/plain");
  if (target == "/metrics") {
    return respond(http::status::ok, svc_.metrics_text(), "text/plain; version=0.0.4");
  }
  if (target == "/recordings") {
    return respond(http::status::ok, list_recordings(svc_.cfg_.recordings_dir).dump(),
                   "application/json");
  }
  const std::string rec_prefix = "/recordings/";
  if (target.rfind(rec_prefix, 0) == 0) {
    std::string id = target.substr(rec_prefix.size());
    auto path = svc_.cfg_.recordings_dir / (id + ".svrs");
    if (valid_recording_id(id) && std::filesystem::is_regular_file(path)) {
      std::ifstream in(path, std::ios::binary);
      std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      return respond(http::status::ok, std::move(body), "application/octet-stream");
    }
    return respond(http::status::not_found, "no such recording\n", "text/plain");
  }
  if (target == "/sessions") {
    return respond(http::status::ok, svc_.sessions_json().dump(), "application/json");
  }
  const std::string sess_prefix = "/sessions/";
  const std::string state_suffix = "/state";
  if (target.rfind(sess_prefix, 0) == 0 && target.size() > sess_prefix.size() + state_suffix.size() &&
      target.compare(target.size() - state_suffix.size(), state_suffix.size(), state_suffix) == 0) {
    auto raw = target.substr(sess_prefix.size(),
                             target.size() - sess_prefix.size() - state_suffix.size());
    if (auto id = SessionId::parse(raw)) {
      if (auto j = svc_.session_state_json(*id)) {
        return respond(http::status::ok, j->dump(), "application/json");
      }
    }
    return respond(http::status::not_found, "no such session\n", "text/plain");
  }
  respond(http::status::not_found, "not found\n", "text/plain");
}

inline void HttpConnection::respond(http::status status, std::string body,
                                    std::string content_type) {
  auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
  res->set(http::field::server, "survivrs");
  res->set(http::field::content_type, content_type);
  res->keep_alive(req_.keep_alive());
  res->body() = std::move(body);
  res->prepare_payload();
  http::async_write(stream_, *res,
                    [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                      if (ec) return;
                      if (!res->keep_alive()) {
                        beast::error_code ignored;
                        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                        return;
                      }
                      self->read();
                    });
}

inline void HttpConnection::upgrade(const SessionId& id) {
  stream_.expires_never();
  auto ws = std::make_shared<WsStream>(std::move(stream_));
  ws->set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
  auto req = std::make_shared<http::request<http::string_body>>(std::move(req_));
  Service& svc = svc_;
  ws->async_accept(*req, [ws, req, id, &svc](beast::error_code ec) {
    if (ec) {
      spdlog::warn("websocket accept: {}", ec.message());
      return;
    }
    auto peer = std::make_shared<WsPeer>(std::move(*ws), svc.cfg_.max_payload_bytes + 4096);
    auto session = svc.registry_.open(id);
    auto conn = session->attach(std::make_shared<WsPeerLink>(peer));
    std::weak_ptr<Connection> wconn = conn;
    WsPeer::Handlers h;
    h.on_text = [session, conn](std::string text) { session->on_text(conn, text); };
    h.on_binary = [session, conn](Bytes b) { session->on_binary(conn, b); };
    h.on_close = [session, conn] { session->on_disconnect(conn); };
    h.pull_frame = [wconn]() -> std::optional<Bytes> {
      auto c = wconn.lock();
      if (!c) return std::nullopt;
      auto f = c->next_frame();
      if (!f) return std::nullopt;
      return encode_frame_message(*f);
    };
    peer->start(std::move(h));
  });
}

}  // namespace detail

}  // namespace survivrs::server

#endif  // SURVIVRS_SERVER_SERVICE_HPP
