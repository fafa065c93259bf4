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

#ifndef SURVIVRS_RELAY_CHANNEL_HPP
#define SURVIVRS_RELAY_CHANNEL_HPP

// Per-stream ordered fan-out with a bounded ring.
//
// Each subscriber owns a cursor (the next seq it wants). A full ring first
// drops frames every subscriber has already consumed; after that the drop
// policy picks a victim and every subscriber that had not yet received the
// victim has it logged as an eviction. Hence for every subscriber, after
// draining: delivered + evicted == frames published since it subscribed.

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "survivrs/core/frame.hpp"
#include "survivrs/core/types.hpp"

namespace survivrs::relay {

enum class DropPolicy : std::uint8_t { Lossless, DropOldestNonKey, DropOldest };

inline constexpr DropPolicy default_policy(StreamKind k) noexcept {
  return k == StreamKind::Audio ? DropPolicy::DropOldest : DropPolicy::DropOldestNonKey;
}

inline constexpr std::size_t kDefaultRingCapacity = 64;

enum class RelayError : std::uint8_t {
  Unauthorized,
  PayloadTooLarge,
  SeqEvicted,
  UnknownSession,
  ChannelClosed,
};

inline constexpr std::string_view to_string(RelayError e) noexcept {
  switch (e) {
    case RelayError::Unauthorized: return "Unauthorized";
    case RelayError::PayloadTooLarge: return "PayloadTooLarge";
    case RelayError::SeqEvicted: return "SeqEvicted";
    case RelayError::UnknownSession: return "UnknownSession";
    case RelayError::ChannelClosed: return "ChannelClosed";
  }
  return "?";
}

class RelayException : public std::runtime_error {
 public:
  explicit RelayException(RelayError code)
      : std::runtime_error(std::string(to_string(code))), code_(code) {}
  RelayError code() const noexcept { return code_; }

 private:
  RelayError code_;
};

struct SubscriberStats {
  /// Seq the subscription started from; frames below it are not owed.
  std::uint64_t start_seq = 0;
  std::uint64_t cursor = 0;
  std::uint64_t delivered = 0;
  std::uint64_t evicted = 0;
  /// Seqs evicted before this subscriber received them (most recent kMaxLog).
  std::deque<std::uint64_t> evicted_seqs;
  static constexpr std::size_t kMaxLog = 4096;
};

/// Where a new subscription starts: the next published frame, or a given seq.
struct StartAt {
  std::optional<std::uint64_t> seq;
  static StartAt latest() { return {}; }
  static StartAt from(std::uint64_t s) { return {s}; }
};

class Subscription;

class StreamChannel : public std::enable_shared_from_this<StreamChannel> {
 public:
  using Clock = std::function<std::uint64_t()>;

  static std::shared_ptr<StreamChannel> create(StreamKind kind,
                                               std::size_t capacity = kDefaultRingCapacity,
                                               std::optional<DropPolicy> policy = std::nullopt,
                                               Clock clock = {}) {
    return std::shared_ptr<StreamChannel>(
        new StreamChannel(kind, capacity, policy.value_or(default_policy(kind)), std::move(clock)));
  }

  StreamKind kind() const noexcept { return kind_; }
  DropPolicy policy() const noexcept { return policy_; }
  std::size_t capacity() const noexcept { return capacity_; }

  /// Stamps seq and ts_us (from the channel clock) and enqueues.
  MediaFrame publish(PeerRole role, FrameData data) {
    return publish_impl(role, std::move(data), std::nullopt);
  }

  MediaFrame publish_at(PeerRole role, FrameData data, std::uint64_t ts_us) {
    return publish_impl(role, std::move(data), ts_us);
  }

  /// Enqueues an already-stamped frame (replay). Seq must not go backwards.
  void publish_stamped(MediaFrame f) {
    if (f.payload->size() > kMaxPayloadBytes) throw RelayException(RelayError::PayloadTooLarge);
    std::vector<std::function<void()>> notify;
    {
      std::unique_lock lock(mu_);
      if (closed_) throw RelayException(RelayError::ChannelClosed);
      if (f.seq < next_seq_) throw std::invalid_argument("publish_stamped: seq regression");
      make_room(lock);
      next_seq_ = f.seq + 1;
      latest_ts_ = std::max(latest_ts_.value_or(0), f.ts_us);
      ring_.push_back(std::move(f));
      ++published_;
      notify = callbacks();
    }
    data_cv_.notify_all();
    for (auto& cb : notify) cb();
  }

  Subscription subscribe(StartAt from = StartAt::latest(),
                         std::function<void()> on_available = {});

  /// Wakes blocked publishers and readers; later publishes throw ChannelClosed.
  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    space_cv_.notify_all();
    data_cv_.notify_all();
  }

  std::uint64_t next_seq() const {
    std::lock_guard lock(mu_);
    return next_seq_;
  }
  std::uint64_t published() const {
    std::lock_guard lock(mu_);
    return published_;
  }
  /// ts_us of the newest frame accepted into the channel.
  std::optional<std::uint64_t> latest_ts() const {
    std::lock_guard lock(mu_);
    return latest_ts_;
  }
  std::optional<std::uint64_t> latest_seq() const {
    std::lock_guard lock(mu_);
    if (published_ == 0) return std::nullopt;
    return next_seq_ - 1;
  }
  /// Every seq evicted while some subscriber still needed it.
  std::vector<std::uint64_t> eviction_log() const {
    std::lock_guard lock(mu_);
    return {eviction_log_.begin(), eviction_log_.end()};
  }
  std::uint64_t evictions() const {
    std::lock_guard lock(mu_);
    return evictions_;
  }
  std::vector<std::uint64_t> retained_seqs() const {
    std::lock_guard lock(mu_);
    std::vector<std::uint64_t> out;
    for (const auto& f : ring_) out.push_back(f.seq);
    return out;
  }
  std::size_t subscriber_count() const {
    std::lock_guard lock(mu_);
    return subs_.size();
  }

 private:
  friend class Subscription;

  struct Subscriber {
    SubscriberStats stats;
    std::function<void()> on_available;
  };

  StreamChannel(StreamKind kind, std::size_t capacity, DropPolicy policy, Clock clock)
      : kind_(kind), capacity_(std::max<std::size_t>(1, capacity)), policy_(policy),
        clock_(std::move(clock)) {}

  MediaFrame publish_impl(PeerRole role, FrameData data, std::optional<std::uint64_t> ts) {
    if (!may_publish(role, kind_)) throw RelayException(RelayError::Unauthorized);
    if (!data.payload) data.payload = std::make_shared<const Bytes>();
    if (data.payload->size() > kMaxPayloadBytes) throw RelayException(RelayError::PayloadTooLarge);
    MediaFrame stamped;
    std::vector<std::function<void()>> notify;
    {
      std::unique_lock lock(mu_);
      if (closed_) throw RelayException(RelayError::ChannelClosed);
      make_room(lock);
      std::uint64_t now = ts ? *ts : (clock_ ? clock_() : 0);
      stamped.stream = kind_;
      stamped.seq = next_seq_++;
      stamped.ts_us = std::max(now, latest_ts_.value_or(0));
      stamped.key = data.key;
      stamped.content_type = std::move(data.content_type);
      stamped.payload = std::move(data.payload);
      latest_ts_ = stamped.ts_us;
      ring_.push_back(stamped);
      ++published_;
      notify = callbacks();
    }
    data_cv_.notify_all();
    for (auto& cb : notify) cb();
    return stamped;
  }

  std::vector<std::function<void()>> callbacks() const {
    std::vector<std::function<void()>> out;
    for (const auto& [_, s] : subs_) {
      if (s.on_available) out.push_back(s.on_available);
    }
    return out;
  }

  std::optional<std::uint64_t> min_cursor() const {
    std::optional<std::uint64_t> m;
    for (const auto& [_, s] : subs_) m = std::min(m.value_or(s.stats.cursor), s.stats.cursor);
    return m;
  }

  std::size_t pick_victim() const {
    if (policy_ == DropPolicy::DropOldest) return 0;
    std::optional<std::size_t> newest_key;
    for (std::size_t i = ring_.size(); i-- > 0;) {
      if (ring_[i].key) {
        newest_key = i;
        break;
      }
    }
    for (std::size_t i = 0; i < ring_.size(); ++i) {
      if (!ring_[i].key || i != newest_key) return i;
    }
    return 0;
  }

  void evict(std::size_t idx) {
    const std::uint64_t seq = ring_[idx].seq;
    for (auto& [_, s] : subs_) {
      if (s.stats.cursor <= seq) {
        ++s.stats.evicted;
        s.stats.evicted_seqs.push_back(seq);
        if (s.stats.evicted_seqs.size() > SubscriberStats::kMaxLog) s.stats.evicted_seqs.pop_front();
      }
    }
    ++evictions_;
    eviction_log_.push_back(seq);
    if (eviction_log_.size() > SubscriberStats::kMaxLog) eviction_log_.pop_front();
    ring_.erase(ring_.begin() + static_cast<std::ptrdiff_t>(idx));
  }

  void make_room(std::unique_lock<std::mutex>& lock) {
    while (ring_.size() >= capacity_) {
      auto mc = min_cursor();
      if (!mc || ring_.front().seq < *mc) {
        ring_.pop_front();
        continue;
      }
      if (policy_ == DropPolicy::Lossless) {
        space_cv_.wait(lock);
        if (closed_) throw RelayException(RelayError::ChannelClosed);
        continue;
      }
      evict(pick_victim());
    }
  }

  std::optional<MediaFrame> take(std::uint64_t id) {
    std::optional<MediaFrame> out;
    {
      std::lock_guard lock(mu_);
      auto it = subs_.find(id);
      if (it == subs_.end()) return std::nullopt;
      auto& st = it->second.stats;
      auto f = std::lower_bound(ring_.begin(), ring_.end(), st.cursor,
                                [](const MediaFrame& fr, std::uint64_t s) { return fr.seq < s; });
      if (f == ring_.end()) return std::nullopt;
      out = *f;
      st.cursor = f->seq + 1;
      ++st.delivered;
    }
    if (policy_ == DropPolicy::Lossless) space_cv_.notify_all();
    return out;
  }

  const StreamKind kind_;
  const std::size_t capacity_;
  const DropPolicy policy_;
  Clock clock_;

  mutable std::mutex mu_;
  std::condition_variable space_cv_;
  std::condition_variable data_cv_;
  std::deque<MediaFrame> ring_;
  std::map<std::uint64_t, Subscriber> subs_;
  std::uint64_t next_sub_id_ = 1;
  std::uint64_t next_seq_ = 0;
  std::uint64_t published_ = 0;
  std::optional<std::uint64_t> latest_ts_;
  std::uint64_t evictions_ = 0;
  std::deque<std::uint64_t> eviction_log_;
  bool closed_ = false;
};

/// A subscriber's ordered feed. Unsubscribes on destruction.
class Subscription {
 public:
  Subscription() = default;
  Subscription(Subscription&& o) noexcept { *this = std::move(o); }
  Subscription& operator=(Subscription&& o) noexcept {
    if (this != &o) {
      reset();
      ch_ = std::move(o.ch_);
      id_ = o.id_;
      start_status_ = o.start_status_;
      o.id_ = 0;
    }
    return *this;
  }
  Subscription(const Subscription&) = delete;
  Subscription& operator=(const Subscription&) = delete;
  ~Subscription() { reset(); }

  /// SeqEvicted if the requested start seq was gone and the feed starts at
  /// the oldest retained key frame instead.
  std::optional<RelayError> start_status() const noexcept { return start_status_; }

  std::optional<MediaFrame> try_next() { return ch_ ? ch_->take(id_) : std::nullopt; }

  /// Blocks until a frame is available, the channel closes, or the timeout.
  std::optional<MediaFrame> next(std::chrono::milliseconds timeout) {
    if (!ch_) return std::nullopt;
    auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      if (auto f = ch_->take(id_)) return f;
      std::unique_lock lock(ch_->mu_);
      if (ch_->closed_) return std::nullopt;
      bool ready = ch_->data_cv_.wait_until(lock, deadline, [&] {
        auto it = ch_->subs_.find(id_);
        return ch_->closed_ || it == ch_->subs_.end() ||
               (!ch_->ring_.empty() && ch_->ring_.back().seq >= it->second.stats.cursor);
      });
      if (!ready) return std::nullopt;
    }
  }

  SubscriberStats stats() const {
    if (!ch_) return {};
    std::lock_guard lock(ch_->mu_);
    auto it = ch_->subs_.find(id_);
    return it == ch_->subs_.end() ? SubscriberStats{} : it->second.stats;
  }

  bool active() const noexcept { return ch_ != nullptr; }
  StreamChannel* channel() const noexcept { return ch_.get(); }

  void reset() {
    if (!ch_) return;
    {
      std::lock_guard lock(ch_->mu_);
      ch_->subs_.erase(id_);
    }
    ch_->space_cv_.notify_all();
    ch_.reset();
    id_ = 0;
  }

 private:
  friend class StreamChannel;
  Subscription(std::shared_ptr<StreamChannel> ch, std::uint64_t id,
               std::optional<RelayError> status)
      : ch_(std::move(ch)), id_(id), start_status_(status) {}

  std::shared_ptr<StreamChannel> ch_;
  std::uint64_t id_ = 0;
  std::optional<RelayError> start_status_;
};

inline Subscription StreamChannel::subscribe(StartAt from, std::function<void()> on_available) {
  std::lock_guard lock(mu_);
  std::optional<RelayError> status;
  std::uint64_t cursor = next_seq_;
  if (from.seq && *from.seq < next_seq_) {
    if (!ring_.empty() && *from.seq >= ring_.front().seq) {
      auto f = std::lower_bound(ring_.begin(), ring_.end(), *from.seq,
                                [](const MediaFrame& fr, std::uint64_t s) { return fr.seq < s; });
      cursor = f->seq;
    } else {
      status = RelayError::SeqEvicted;
      auto key = std::find_if(ring_.begin(), ring_.end(), [](const MediaFrame& f) { return f.key; });
      if (key != ring_.end()) {
        cursor = key->seq;
      } else if (!ring_.empty()) {
        cursor = ring_.front().seq;
      }
    }
  }
  std::uint64_t id = next_sub_id_++;
  Subscriber sub;
  sub.stats.start_seq = cursor;
  sub.stats.cursor = cursor;
  sub.on_available = std::move(on_available);
  subs_.emplace(id, std::move(sub));
  return Subscription(shared_from_this(), id, status);
}

}  // namespace survivrs::relay

#endif  // SURVIVRS_RELAY_CHANNEL_HPP
