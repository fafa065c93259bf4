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

#ifndef SURVIVRS_RELAY_HUB_HPP
#define SURVIVRS_RELAY_HUB_HPP

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "survivrs/relay/channel.hpp"

namespace survivrs::relay {

struct ChannelOptions {
  std::size_t capacity = kDefaultRingCapacity;
  /// Overrides the per-kind default policy when set.
  std::optional<DropPolicy> policy;
};

/// Lag of one stream at a query instant: at_ts - ts_us of its newest frame.
/// Empty if the stream has carried no frame yet.
using LagReport = std::map<StreamKind, std::optional<std::int64_t>>;

/// The five channels of one session.
class RelayHub {
 public:
  explicit RelayHub(ChannelOptions opts = {}, StreamChannel::Clock clock = {}) {
    for (StreamKind k : kAllStreamKinds) {
      channels_[code_of(k)] = StreamChannel::create(k, opts.capacity, opts.policy, clock);
    }
  }

  const std::shared_ptr<StreamChannel>& channel(StreamKind k) const {
    return channels_[code_of(k)];
  }

  LagReport sync_skew(std::uint64_t at_ts) const {
    LagReport r;
    for (StreamKind k : kAllStreamKinds) {
      auto ts = channel(k)->latest_ts();
      r[k] = ts ? std::optional<std::int64_t>(static_cast<std::int64_t>(at_ts) -
                                              static_cast<std::int64_t>(*ts))
                : std::nullopt;
    }
    return r;
  }

  void close() {
    for (auto& c : channels_) c->close();
  }

 private:
  std::array<std::shared_ptr<StreamChannel>, kStreamKindCount> channels_;
};

/// Spread between the most and least lagging of the given streams, counting
/// only streams that have carried frames.
inline std::optional<std::int64_t> skew_spread(const LagReport& r, StreamSet among) {
  std::optional<std::int64_t> lo, hi;
  for (const auto& [k, lag] : r) {
    if (!among.contains(k) || !lag) continue;
    lo = std::min(lo.value_or(*lag), *lag);
    hi = std::max(hi.value_or(*lag), *lag);
  }
  if (!lo) return std::nullopt;
  return *hi - *lo;
}

/// Session-keyed collection of hubs.
class Relay {
 public:
  std::shared_ptr<RelayHub> create(const SessionId& id, ChannelOptions opts = {},
                                   StreamChannel::Clock clock = {}) {
    std::lock_guard lock(mu_);
    auto& slot = hubs_[id];
    if (!slot) slot = std::make_shared<RelayHub>(opts, std::move(clock));
    return slot;
  }

  std::shared_ptr<RelayHub> find(const SessionId& id) const {
    std::lock_guard lock(mu_);
    auto it = hubs_.find(id);
    return it == hubs_.end() ? nullptr : it->second;
  }

  void remove(const SessionId& id) {
    std::shared_ptr<RelayHub> hub;
    {
      std::lock_guard lock(mu_);
      auto it = hubs_.find(id);
      if (it == hubs_.end()) return;
      hub = std::move(it->second);
      hubs_.erase(it);
    }
    hub->close();
  }

  /// Throws RelayException(UnknownSession).
  LagReport sync_skew(const SessionId& id, std::uint64_t at_ts) const {
    auto hub = find(id);
    if (!hub) throw RelayException(RelayError::UnknownSession);
    return hub->sync_skew(at_ts);
  }

 private:
  mutable std::mutex mu_;
  std::map<SessionId, std::shared_ptr<RelayHub>> hubs_;
};

}  // namespace survivrs::relay

#endif  // SURVIVRS_RELAY_HUB_HPP
