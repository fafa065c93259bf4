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

#ifndef SURVIVRS_SIGNAL_HANDSHAKE_HPP
#define SURVIVRS_SIGNAL_HANDSHAKE_HPP

// Connection-ID session establishment as a pure state machine.
//
// Phases advance Idle -> AwaitingPeer -> Negotiating -> Streaming, and any
// phase may drop to Closing; Closing -> Closed happens once the server has
// finalized the session. The function never performs I/O: it returns the next
// state and the messages the caller should deliver.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "survivrs/core/events.hpp"

namespace survivrs::signal {

enum class SessionPhase : std::uint8_t {
  Idle,
  AwaitingPeer,
  Negotiating,
  Streaming,
  Closing,
  Closed,
};

inline constexpr std::array<SessionPhase, 6> kAllPhases = {
    SessionPhase::Idle,      SessionPhase::AwaitingPeer, SessionPhase::Negotiating,
    SessionPhase::Streaming, SessionPhase::Closing,      SessionPhase::Closed};

inline constexpr std::string_view to_string(SessionPhase p) noexcept {
  switch (p) {
    case SessionPhase::Idle: return "Idle";
    case SessionPhase::AwaitingPeer: return "AwaitingPeer";
    case SessionPhase::Negotiating: return "Negotiating";
    case SessionPhase::Streaming: return "Streaming";
    case SessionPhase::Closing: return "Closing";
    case SessionPhase::Closed: return "Closed";
  }
  return "?";
}

/// True if `to` is a legal successor of `from` (staying put included).
inline constexpr bool is_legal_transition(SessionPhase from, SessionPhase to) noexcept {
  if (from == to) return true;
  if (to == SessionPhase::Closing) return from != SessionPhase::Closed;
  switch (from) {
    case SessionPhase::Idle: return to == SessionPhase::AwaitingPeer;
    case SessionPhase::AwaitingPeer: return to == SessionPhase::Negotiating;
    case SessionPhase::Negotiating: return to == SessionPhase::Streaming;
    case SessionPhase::Closing: return to == SessionPhase::Closed;
    default: return false;
  }
}

enum class ErrorCode : std::uint8_t {
  HelloNotFirst,
  DuplicateRole,
  VersionMismatch,
  SessionMismatch,
  RoleNotAllowed,
  UnexpectedMessage,
  UnauthorizedStream,
  RequestNotAdvertised,
  AckExceedsRequest,
  MessageAfterClosed,
};

inline constexpr std::string_view to_string(ErrorCode c) noexcept {
  switch (c) {
    case ErrorCode::HelloNotFirst: return "HelloNotFirst";
    case ErrorCode::DuplicateRole: return "DuplicateRole";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::SessionMismatch: return "SessionMismatch";
    case ErrorCode::RoleNotAllowed: return "RoleNotAllowed";
    case ErrorCode::UnexpectedMessage: return "UnexpectedMessage";
    case ErrorCode::UnauthorizedStream: return "UnauthorizedStream";
    case ErrorCode::RequestNotAdvertised: return "RequestNotAdvertised";
    case ErrorCode::AckExceedsRequest: return "AckExceedsRequest";
    case ErrorCode::MessageAfterClosed: return "MessageAfterClosed";
  }
  return "?";
}

/// Whom a protocol error takes down: only the offending connection (it never
/// joined) or the whole session.
enum class ErrorScope : std::uint8_t { Connection, Session };

struct ProtocolError {
  ErrorCode code;
  ErrorScope scope;
  bool operator==(const ProtocolError&) const = default;
};

enum class SessionKind : std::uint8_t { Live, Replay };

/// Handshake progress of one endpoint.
struct SideState {
  std::optional<PeerRole> role;
  std::optional<sig::StreamAdvertise> advertised;
  /// What this side asked the other side for.
  std::optional<StreamSet> requested;
  /// What this side agreed to send, answering the other side's request.
  std::optional<StreamSet> acked;
  bool operator==(const SideState&) const = default;
};

struct SignalState {
  SessionId session;
  SessionKind kind = SessionKind::Live;
  SessionPhase phase = SessionPhase::Idle;
  /// RoomPublisher slot (the replayer in replay sessions).
  SideState publisher;
  /// RemoteGuide slot, or ReplayViewer in replay sessions.
  SideState consumer;
  /// Version every Hello must carry.
  std::uint32_t proto_version = kProtoVersion;

  static SignalState fresh(SessionId id, SessionKind kind = SessionKind::Live,
                           std::uint32_t proto_version = kProtoVersion) {
    return SignalState{std::move(id), kind, SessionPhase::Idle, {}, {}, proto_version};
  }

  bool operator==(const SignalState&) const = default;

  /// Streams flowing from publisher to consumer once Streaming.
  StreamSet downstream() const { return publisher.acked.value_or(StreamSet{}); }
  /// Streams flowing from consumer to publisher once Streaming.
  StreamSet upstream() const { return consumer.acked.value_or(StreamSet{}); }
};

struct Outbound {
  PeerRole to;
  SignalMessage message;
  bool operator==(const Outbound&) const = default;
};

struct SignalOutcome {
  SignalState state;
  std::vector<Outbound> outbound;
  std::optional<ProtocolError> error;
};

namespace detail {

inline bool is_publisher_role(PeerRole r) { return r == PeerRole::RoomPublisher; }

inline SideState& side_for(SignalState& s, PeerRole r) {
  return is_publisher_role(r) ? s.publisher : s.consumer;
}
inline SideState& other_side(SignalState& s, PeerRole r) {
  return is_publisher_role(r) ? s.consumer : s.publisher;
}

inline bool role_allowed(SessionKind kind, PeerRole r) {
  if (r == PeerRole::RoomPublisher) return true;
  return kind == SessionKind::Live ? r == PeerRole::RemoteGuide : r == PeerRole::ReplayViewer;
}

inline void bye_to_joined(SignalOutcome& out, const SignalState& s, const std::string& reason,
                          std::optional<PeerRole> except = std::nullopt) {
  for (const SideState* side : {&s.publisher, &s.consumer}) {
    if (side->role && side->role != except) {
      out.outbound.push_back({*side->role, sig::Bye{reason}});
    }
  }
}

inline SignalOutcome reject_connection(const SignalState& s, ErrorCode code) {
  return {s, {}, ProtocolError{code, ErrorScope::Connection}};
}

inline SignalOutcome fail_session(const SignalState& s, ErrorCode code) {
  SignalOutcome out{s, {}, ProtocolError{code, ErrorScope::Session}};
  if (s.phase != SessionPhase::Closing && s.phase != SessionPhase::Closed) {
    out.state.phase = SessionPhase::Closing;
    bye_to_joined(out, s, std::string(to_string(code)));
  }
  return out;
}

inline SignalOutcome on_hello_from_unknown(const SignalState& s, const sig::Hello& h) {
  if (h.proto_version != s.proto_version) return reject_connection(s, ErrorCode::VersionMismatch);
  if (h.session != s.session) return reject_connection(s, ErrorCode::SessionMismatch);
  if (s.phase == SessionPhase::Closing) return reject_connection(s, ErrorCode::UnexpectedMessage);
  if (!role_allowed(s.kind, h.role)) return reject_connection(s, ErrorCode::RoleNotAllowed);

  SignalOutcome out{s, {}, std::nullopt};
  SideState& mine = side_for(out.state, h.role);
  SideState& theirs = other_side(out.state, h.role);
  if (mine.role) return reject_connection(s, ErrorCode::DuplicateRole);
  mine.role = h.role;
  if (!theirs.role) {
    out.state.phase = SessionPhase::AwaitingPeer;
  } else {
    out.state.phase = SessionPhase::Negotiating;
    out.outbound.push_back({*theirs.role, h});
    out.outbound.push_back({h.role, sig::Hello{s.session, *theirs.role, s.proto_version}});
  }
  return out;
}

struct KnownSenderVisitor {
  const SignalState& s;
  PeerRole sender;

  SignalOutcome operator()(const sig::Hello&) const {
    return fail_session(s, ErrorCode::UnexpectedMessage);
  }

  SignalOutcome operator()(const sig::Bye& bye) const {
    SignalOutcome out{s, {}, std::nullopt};
    if (s.phase != SessionPhase::Closing) {
      out.state.phase = SessionPhase::Closing;
      bye_to_joined(out, s, bye.reason, sender);
    }
    return out;
  }

  SignalOutcome operator()(const sig::StreamAdvertise& adv) const {
    if (s.phase != SessionPhase::Negotiating) return fail_session(s, ErrorCode::UnexpectedMessage);
    SignalOutcome out{s, {}, std::nullopt};
    SideState& mine = side_for(out.state, sender);
    if (mine.advertised) return fail_session(s, ErrorCode::UnexpectedMessage);
    for (const auto& [kind, _] : adv.streams) {
      if (!may_publish(sender, kind)) return fail_session(s, ErrorCode::UnauthorizedStream);
    }
    mine.advertised = adv;
    out.outbound.push_back({*other_side(out.state, sender).role, adv});
    return out;
  }

  SignalOutcome operator()(const sig::StreamRequest& req) const {
    if (s.phase != SessionPhase::Negotiating) return fail_session(s, ErrorCode::UnexpectedMessage);
    SignalOutcome out{s, {}, std::nullopt};
    SideState& mine = side_for(out.state, sender);
    SideState& theirs = other_side(out.state, sender);
    if (mine.requested || !theirs.advertised) {
      return fail_session(s, ErrorCode::UnexpectedMessage);
    }
    if (!req.streams.is_subset_of(theirs.advertised->kinds())) {
      return fail_session(s, ErrorCode::RequestNotAdvertised);
    }
    mine.requested = req.streams;
    out.outbound.push_back({*theirs.role, req});
    return out;
  }

  SignalOutcome operator()(const sig::StreamAck& ack) const {
    if (s.phase != SessionPhase::Negotiating) return fail_session(s, ErrorCode::UnexpectedMessage);
    SignalOutcome out{s, {}, std::nullopt};
    SideState& mine = side_for(out.state, sender);
    SideState& theirs = other_side(out.state, sender);
    if (mine.acked || !theirs.requested) return fail_session(s, ErrorCode::UnexpectedMessage);
    if (!ack.streams.is_subset_of(*theirs.requested)) {
      return fail_session(s, ErrorCode::AckExceedsRequest);
    }
    mine.acked = ack.streams;
    out.outbound.push_back({*theirs.role, ack});
    if (theirs.acked) out.state.phase = SessionPhase::Streaming;
    return out;
  }
};

}  // namespace detail

/// Advances the session handshake by one message. `sender` is empty until
/// the connection's Hello has been accepted.
inline SignalOutcome handle_signal(const SignalState& state, std::optional<PeerRole> sender,
                                   const SignalMessage& msg) {
  if (state.phase == SessionPhase::Closed) {
    return detail::reject_connection(state, ErrorCode::MessageAfterClosed);
  }
  if (!sender) {
    const auto* hello = std::get_if<sig::Hello>(&msg);
    if (!hello) return detail::reject_connection(state, ErrorCode::HelloNotFirst);
    return detail::on_hello_from_unknown(state, *hello);
  }
  const SideState& side = detail::is_publisher_role(*sender) ? state.publisher : state.consumer;
  if (side.role != sender) return detail::reject_connection(state, ErrorCode::UnexpectedMessage);
  return std::visit(detail::KnownSenderVisitor{state, *sender}, msg);
}

/// The Hello either side sends first.
inline sig::Hello initiate(const SessionId& session, PeerRole role) {
  return sig::Hello{session, role, kProtoVersion};
}

/// Transport loss of a joined peer.
inline SignalOutcome on_disconnect(const SignalState& state, PeerRole role) {
  SignalOutcome out{state, {}, std::nullopt};
  const SideState& side = detail::is_publisher_role(role) ? state.publisher : state.consumer;
  if (side.role != role) return out;
  if (state.phase == SessionPhase::Closing || state.phase == SessionPhase::Closed) return out;
  out.state.phase = SessionPhase::Closing;
  detail::bye_to_joined(out, state, "peer-disconnected", role);
  return out;
}

/// Closing -> Closed once the session has been torn down and its recording
/// finalized.
inline SignalOutcome on_closed(const SignalState& state) {
  if (state.phase != SessionPhase::Closing) {
    return {state, {}, ProtocolError{ErrorCode::UnexpectedMessage, ErrorScope::Session}};
  }
  SignalOutcome out{state, {}, std::nullopt};
  out.state.phase = SessionPhase::Closed;
  return out;
}

}  // namespace survivrs::signal

#endif  // SURVIVRS_SIGNAL_HANDSHAKE_HPP
