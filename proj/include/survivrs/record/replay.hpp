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

#ifndef SURVIVRS_RECORD_REPLAY_HPP
#define SURVIVRS_RECORD_REPLAY_HPP

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>

#include "survivrs/annot/state.hpp"
#include "survivrs/core/canonical.hpp"
#include "survivrs/core/clock.hpp"
#include "survivrs/record/format.hpp"

namespace survivrs::record {

/// Replay pacing factor; infinity means as fast as possible.
class Speed {
 public:
  static Speed unlimited() { return Speed(std::numeric_limits<double>::infinity()); }
  static Speed real_time() { return Speed(1.0); }
  static std::optional<Speed> of(double factor) {
    if (!(factor > 0)) return std::nullopt;
    return Speed(factor);
  }

  /// Accepts "inf", "max", a positive decimal, or a ratio "a/b".
  static std::optional<Speed> parse(const std::string& s) {
    if (s == "inf" || s == "max" || s == "unlimited") return unlimited();
    try {
      auto slash = s.find('/');
      if (slash != std::string::npos) {
        std::size_t n1 = 0, n2 = 0;
        double a = std::stod(s.substr(0, slash), &n1);
        double b = std::stod(s.substr(slash + 1), &n2);
        if (n1 != slash || n2 != s.size() - slash - 1 || !(b > 0)) return std::nullopt;
        return of(a / b);
      }
      std::size_t n = 0;
      double v = std::stod(s, &n);
      if (n != s.size()) return std::nullopt;
      return of(v);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  double factor() const noexcept { return factor_; }
  bool is_unlimited() const noexcept { return std::isinf(factor_); }

 private:
  explicit Speed(double f) : factor_(f) {}
  double factor_;
};

struct ReplayReport {
  std::map<RecordType, std::uint64_t> counts;
  std::uint64_t total = 0;
  bool stopped = false;
};

using ReplaySink = std::function<void(const Record&)>;

inline std::filesystem::path overlay_path_for(const std::filesystem::path& source) {
  return source.string() + ".overlay.svrs";
}

/// Serves a finalized recording in file order and collects review
/// annotations into a sidecar recording. The source file is opened read-only.
class ReplaySession {
 public:
  ReplaySession(std::filesystem::path source, Speed speed,
                std::optional<std::filesystem::path> overlay = std::nullopt)
      : source_(std::move(source)),
        overlay_path_(overlay.value_or(overlay_path_for(source_))),
        speed_(speed) {
    verified_ = verify(source_);  // fail fast before any emission
    in_ = open_input(source_);
    reader_.emplace(in_);
  }

  ReplaySession(const ReplaySession&) = delete;
  ReplaySession& operator=(const ReplaySession&) = delete;
  ~ReplaySession() {
    try {
      finish();
    } catch (...) {
    }
  }

  const VerifyReport& source_report() const noexcept { return verified_; }
  const Header& header() const noexcept { return verified_.header; }

  /// Emits every record to `sink`, pacing by offset / speed. The sink runs
  /// under the session lock and must not call annotate().
  ReplayReport run(const ReplaySink& sink) {
    std::unique_lock lock(mu_);
    sink_ = &sink;
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t first = verified_.first_offset.value_or(0);
    while (!stop_) {
      if (!pending_) {
        pending_ = reader_->next();
        ++pending_gen_;
        if (!pending_) break;
      }
      if (!speed_.is_unlimited()) {
        const std::uint64_t gen = pending_gen_;
        double rel_us = static_cast<double>(pending_->offset_us - first) / speed_.factor();
        auto due = start + std::chrono::microseconds(static_cast<std::int64_t>(rel_us));
        cv_.wait_until(lock, due, [&] {
          return stop_ || pending_gen_ != gen || std::chrono::steady_clock::now() >= due;
        });
        if (stop_) break;
        if (pending_gen_ != gen) continue;
      }
      emit_locked(std::move(*pending_));
      pending_.reset();
    }
    report_.stopped = stop_;
    sink_ = nullptr;
    done_ = !stop_;
    return report_;
  }

  void stop() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
  }

  /// Stamps a review annotation at the current position, applies it to the
  /// review state and appends it to the sidecar. Returns the stamped event or
  /// the reason it was refused.
  std::variant<AnnotationEvent, annot::ApplyError> annotate(AnnotationEvent proposal) {
    std::lock_guard lock(mu_);
    // Ties go original-first: flush originals sharing the current offset.
    while (sink_ && started_) {
      if (!pending_) {
        pending_ = reader_->next();
        ++pending_gen_;
      }
      if (!pending_ || pending_->offset_us != position_) break;
      emit_locked(std::move(*pending_));
      pending_.reset();
      ++pending_gen_;
    }
    StreamKind s = stream_of(proposal.action);
    proposal.seq = review_.next_seq();
    proposal.ts_us = position_;
    proposal.frame_seq = latest_frame_seq(s);
    std::vector<annot::DerivedEffect> fx;
    if (auto err = annot::apply_in_place(review_, proposal, fx)) return *err;
    if (!overlay_) {
      overlay_ = std::make_unique<RecordingWriter>(
          overlay_path_, Header{kFormatVersion, wallclock_now_us(), verified_.header.session_id});
    }
    overlay_->append_annotation(encode_annotation(proposal), position_);
    overlay_->flush();
    cv_.notify_all();
    return proposal;
  }

  /// Finalizes the sidecar if any review annotation was made.
  void finish() {
    std::lock_guard lock(mu_);
    if (overlay_) overlay_->finalize();
  }

  std::uint64_t position() const {
    std::lock_guard lock(mu_);
    return position_;
  }
  annot::AnnotationState review_state() const {
    std::lock_guard lock(mu_);
    return review_;
  }
  bool has_overlay() const {
    std::lock_guard lock(mu_);
    return overlay_ != nullptr;
  }
  const std::filesystem::path& overlay_path() const noexcept { return overlay_path_; }
  const std::filesystem::path& source_path() const noexcept { return source_; }
  bool completed() const {
    std::lock_guard lock(mu_);
    return done_;
  }

 private:
  std::optional<std::uint64_t> latest_frame_seq(StreamKind k) const {
    auto it = latest_frame_.find(k);
    if (it == latest_frame_.end()) return std::nullopt;
    return it->second;
  }

  void emit_locked(Record rec) {
    position_ = rec.offset_us;
    started_ = true;
    ++report_.counts[rec.type()];
    ++report_.total;
    if (const auto* f = std::get_if<MediaFrame>(&rec.item)) {
      latest_frame_[f->stream] = f->seq;
    } else if (const auto* a = std::get_if<AnnotationText>(&rec.item)) {
      fold_original(a->text);
    }
    if (sink_) (*sink_)(rec);
  }

  void fold_original(const std::string& text) {
    try {
      AnnotationEvent e = decode_annotation(text);
      e.seq = review_.next_seq();
      std::vector<annot::DerivedEffect> fx;
      annot::apply_in_place(review_, e, fx);  // refused events are skipped
    } catch (const MalformedEvent&) {
    }
  }

  std::filesystem::path source_;
  std::filesystem::path overlay_path_;
  Speed speed_;
  VerifyReport verified_;
  std::ifstream in_;
  std::optional<RecordingReader> reader_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  const ReplaySink* sink_ = nullptr;
  std::optional<Record> pending_;
  std::uint64_t pending_gen_ = 0;
  std::uint64_t position_ = 0;
  bool started_ = false;
  bool stop_ = false;
  bool done_ = false;
  ReplayReport report_;
  annot::AnnotationState review_;
  std::map<StreamKind, std::uint64_t> latest_frame_;
  std::unique_ptr<RecordingWriter> overlay_;
};

/// Plays a recording straight through into `sink`.
inline ReplayReport replay(const std::filesystem::path& file, Speed speed, const ReplaySink& sink) {
  ReplaySession session(file, speed);
  return session.run(sink);
}

}  // namespace survivrs::record

#endif  // SURVIVRS_RECORD_REPLAY_HPP
