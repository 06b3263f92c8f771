#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rdsp/geo.hpp"

namespace rdsp {

// Stable hardware identifier of a device. Distinct from the dynamic ID a
// relay derives at runtime.
struct NodeId {
  std::uint32_t value = 0;
  auto operator<=>(const NodeId&) const = default;
};

// Hop-distance ID assigned dynamically. -1 means unassigned; 0 is reserved
// for the server.
struct DynamicId {
  int value = -1;
  auto operator<=>(const DynamicId&) const = default;
  bool assigned() const { return value >= 0; }
};

inline constexpr DynamicId kUnassignedId{-1};
inline constexpr DynamicId kServerId{0};

enum class Role { Client, Relay, Server };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::Client: return "client";
    case Role::Relay: return "relay";
    case Role::Server: return "server";
  }
  return "?";
}

// Identifies one request/ack exchange: originating client plus a sequence
// number local to that client.
struct MessageId {
  NodeId origin;
  std::uint64_t sequence = 0;
  auto operator<=>(const MessageId&) const = default;
};

enum class MessageKind { Hello, Request, Ack, DsdvAdvertisement };

inline const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::Hello: return "hello";
    case MessageKind::Request: return "request";
    case MessageKind::Ack: return "ack";
    case MessageKind::DsdvAdvertisement: return "advert";
  }
  return "?";
}

struct HelloPayload {
  DynamicId dynamic_id;
};

struct RequestPayload {
  MessageId id;
  GeoPosition position;  // client GPS fix carried to the server
};

struct AckPayload {
  MessageId id;
  NodeId client;  // destination of the ack
};

// One routing-table row as carried inside a table broadcast.
struct DsdvAdvertEntry {
  NodeId destination;
  NodeId next_hop;
  std::uint32_t hop_count = 0;
  std::uint64_t sequence = 0;
};

struct DsdvAdvertPayload {
  std::vector<DsdvAdvertEntry> entries;
};

// Serialized-size model for airtime and overhead accounting. All values
// are scenario-configurable.
struct MessageSizeModel {
  std::size_t hello_bytes = 8;
  std::size_t request_bytes = 32;
  std::size_t ack_bytes = 16;
  std::size_t advert_base_bytes = 8;
  std::size_t advert_entry_bytes = 16;

  std::size_t size_of(MessageKind kind, std::size_t entries = 0) const {
    switch (kind) {
      case MessageKind::Hello: return hello_bytes;
      case MessageKind::Request: return request_bytes;
      case MessageKind::Ack: return ack_bytes;
      case MessageKind::DsdvAdvertisement:
        return advert_base_bytes + advert_entry_bytes * entries;
    }
    return 0;
  }
};

// One frame on the air. `sender` is rewritten at every hop; `recipient`
// empty means link-layer broadcast.
struct WireMessage {
  NodeId sender;
  std::optional<NodeId> recipient;
  std::variant<HelloPayload, RequestPayload, AckPayload, DsdvAdvertPayload>
      payload;
  std::size_t size_bytes = 0;

  MessageKind kind() const {
    switch (payload.index()) {
      case 0: return MessageKind::Hello;
      case 1: return MessageKind::Request;
      case 2: return MessageKind::Ack;
      default: return MessageKind::DsdvAdvertisement;
    }
  }

  // MessageId of the exchange, when the frame carries one.
  std::optional<MessageId> exchange_id() const {
    if (const auto* r = std::get_if<RequestPayload>(&payload)) return r->id;
    if (const auto* a = std::get_if<AckPayload>(&payload)) return a->id;
    return std::nullopt;
  }
};

// What a protocol handler wants done with an incoming frame.
struct SendTo {
  NodeId to;
  WireMessage message;
};
struct DeliverLocally {
  WireMessage message;
};
struct Drop {
  std::string reason;
};
struct RaiseAlarm {
  MessageId id;
  double distance_m = 0.0;
};
using ForwardAction = std::variant<SendTo, DeliverLocally, Drop, RaiseAlarm>;

// Completed request/ack exchange as observed by the client.
struct RoundTrip {
  MessageId id;
  double rtt_s = 0.0;
};

}  // namespace rdsp
