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

#ifndef SURVIVRS_SERVER_WS_HPP
#define SURVIVRS_SERVER_WS_HPP

// One WebSocket endpoint (either side) on a strand: a read loop feeding
// callbacks, and a write queue so senders on any thread never block.

#include <atomic>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "survivrs/core/bytes.hpp"

namespace survivrs::server {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

using WsStream = websocket::stream<beast::tcp_stream>;

class WsPeer : public std::enable_shared_from_this<WsPeer> {
 public:
  struct Handlers {
    std::function<void(std::string)> on_text;
    std::function<void(Bytes)> on_binary;
    /// Called once when the connection is gone, whoever closed it.
    std::function<void()> on_close;
    /// Source of outbound frames; polled while the frame queue has room.
    std::function<std::optional<Bytes>()> pull_frame;
  };

  /// Frames in flight before pulling pauses; past this the relay ring
  /// absorbs (and, per its drop policy, sheds) the backlog.
  static constexpr std::size_t kMaxQueuedFrames = 4;

  WsPeer(WsStream ws, std::size_t max_message) : ws_(std::move(ws)) {
    ws_.read_message_max(max_message);
    ws_.auto_fragment(false);
  }

  void start(Handlers h) {
    net::post(ws_.get_executor(), [self = shared_from_this(), h = std::move(h)]() mutable {
      self->h_ = std::move(h);
      self->do_read();
      self->pull();
    });
  }

  void send_text(std::string text) {
    enqueue(Out{true, std::make_shared<std::string>(std::move(text)), nullptr, false});
  }

  void send_binary(std::shared_ptr<const Bytes> bytes) {
    ++queued_binary_;
    enqueue(Out{false, nullptr, std::move(bytes), false});
  }

  void frames_ready() {
    net::post(ws_.get_executor(), [self = shared_from_this()] { self->pull(); });
  }

  /// Sends what is queued, then the close frame.
  void close() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      self->close_requested_ = true;
      if (!self->writing_) self->do_write();
    });
  }

  bool closed() const noexcept { return closed_; }
  /// Binary messages queued and not yet written (publisher backpressure).
  std::size_t queued_binary() const noexcept { return queued_binary_; }

 private:
  struct Out {
    bool text;
    std::shared_ptr<std::string> str;
    std::shared_ptr<const Bytes> bin;
    bool pulled = false;
  };

  void enqueue(Out o) {
    net::post(ws_.get_executor(), [self = shared_from_this(), o = std::move(o)]() mutable {
      if (self->closed_ || self->close_requested_) {
        if (!o.text) --self->queued_binary_;
        return;
      }
      self->queue_.push_back(std::move(o));
      if (!self->writing_) self->do_write();
    });
  }

  void pull() {
    if (closed_ || close_requested_ || !h_.pull_frame) return;
    while (frames_in_flight_ < kMaxQueuedFrames) {
      auto f = h_.pull_frame();
      if (!f) break;
      ++frames_in_flight_;
      ++queued_binary_;
      queue_.push_back(Out{false, nullptr, std::make_shared<const Bytes>(std::move(*f)), true});
    }
    if (!writing_) do_write();
  }

  void do_write() {
    if (closed_) return;
    if (queue_.empty()) {
      if (close_requested_ && !close_sent_) {
        close_sent_ = true;
        writing_ = true;
        ws_.async_close(websocket::close_code::normal,
                        [self = shared_from_this()](beast::error_code) {
                          self->writing_ = false;
                          self->finish();
                        });
      }
      return;
    }
    writing_ = true;
    Out& o = queue_.front();
    ws_.text(o.text);
    net::const_buffer buf = o.text ? net::const_buffer(o.str->data(), o.str->size())
                                   : net::const_buffer(o.bin->data(), o.bin->size());
    ws_.async_write(buf, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->writing_ = false;
      if (self->closed_) return;
      Out done = std::move(self->queue_.front());
      self->queue_.pop_front();
      if (!done.text) --self->queued_binary_;
      if (ec) return self->finish();
      if (done.pulled) {
        --self->frames_in_flight_;
        self->pull();
      }
      self->do_write();
    });
  }

  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->finish();
      auto data = self->buffer_.data();
      const auto* p = static_cast<const std::uint8_t*>(data.data());
      if (self->ws_.got_text()) {
        std::string text(reinterpret_cast<const char*>(p), data.size());
        self->buffer_.consume(self->buffer_.size());
        if (self->h_.on_text) self->h_.on_text(std::move(text));
      } else {
        Bytes bin(p, p + data.size());
        self->buffer_.consume(self->buffer_.size());
        if (self->h_.on_binary) self->h_.on_binary(std::move(bin));
      }
      if (!self->closed_) self->do_read();
    });
  }

  void finish() {
    if (closed_) return;
    closed_ = true;
    queued_binary_ = 0;
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ignored);
    beast::get_lowest_layer(ws_).close();
    if (h_.on_close) {
      auto cb = std::move(h_.on_close);
      h_ = {};
      cb();
    } else {
      h_ = {};
    }
  }

  WsStream ws_;
  beast::flat_buffer buffer_;
  Handlers h_;
  std::deque<Out> queue_;
  bool writing_ = false;
  bool close_requested_ = false;
  bool close_sent_ = false;
  std::atomic<bool> closed_{false};
  std::size_t frames_in_flight_ = 0;
  std::atomic<std::size_t> queued_binary_{0};
};

}  // namespace survivrs::server

#endif  // SURVIVRS_SERVER_WS_HPP
