#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "rdsp/core.hpp"
#include "rdsp/geo.hpp"

namespace rdsp {

// Neighbor as last heard: advertised dynamic ID plus the hello timestamp.
struct NeighborInfo {
  DynamicId id;
  double last_heard_s = 0.0;
};

// A (node, dynamic id) pair chosen by min/max neighbor selection.
struct Selection {
  NodeId node;
  DynamicId id;
};

struct MmnSelection {
  Selection min;  // routes toward the server
  Selection max;  // routes toward the client
};

struct RdspConfig {
  double hello_interval_s = 2.0;
  // Entries silent for longer than stale_intervals * hello_interval_s are
  // evicted from the neighbor view.
  int stale_intervals = 3;
};

struct RdspNodeState {
  NodeId node;
  Role role = Role::Relay;
  GeoPosition position;
  DynamicId dynamic_id;  // servers hold 0, clients stay -1
  RdspConfig config;

  std::map<NodeId, NeighborInfo> neighbor_view;
  std::optional<Selection> min_sel;
  std::optional<Selection> max_sel;

  // Client bookkeeping: in-flight requests by id -> press time.
  std::map<MessageId, double> pending;
  std::uint64_t next_sequence = 0;

  // Duplicate suppression, one set per direction. The ack reuses the
  // request's MessageId, so a shared set would kill the reverse path.
  std::set<MessageId> seen_requests;
  std::set<MessageId> seen_acks;

  // Server bookkeeping: first arrival time per unique request.
  std::map<MessageId, double> server_arrivals;
};

inline RdspNodeState make_rdsp_state(NodeId node, Role role,
                                     const GeoPosition& pos,
                                     const RdspConfig& cfg = {}) {
  RdspNodeState s;
  s.node = node;
  s.role = role;
  s.position = pos;
  s.config = cfg;
  s.dynamic_id = role == Role::Server ? kServerId : kUnassignedId;
  return s;
}

// Dynamic ID assignment: smallest non-negative neighbor ID plus one.
// Returns nothing while no neighbor has an ID yet.
inline std::optional<DynamicId> dia_assign(
    std::span<const DynamicId> available_ids) {
  if (available_ids.empty())
    throw std::invalid_argument("dia_assign: no neighbors heard");
  std::optional<int> best;
  for (const DynamicId& id : available_ids) {
    if (id.assigned() && (!best || id.value < *best)) best = id.value;
  }
  if (!best) return std::nullopt;
  return DynamicId{*best + 1};
}

// Min/max neighbor selection over assigned entries. Callers exclude
// unassigned (-1) neighbors, which also excludes clients. Ties break
// toward the smaller NodeId; map iteration order provides that.
inline std::optional<MmnSelection> mmn_select(
    const std::map<NodeId, NeighborInfo>& view) {
  std::optional<Selection> mn, mx;
  for (const auto& [node, info] : view) {
    if (!info.id.assigned()) continue;
    if (!mn || info.id.value < mn->id.value) mn = Selection{node, info.id};
    if (!mx || info.id.value > mx->id.value) mx = Selection{node, info.id};
  }
  if (!mn) return std::nullopt;  // isolated node
  return MmnSelection{*mn, *mx};
}

namespace detail {

inline void refresh_selections(RdspNodeState& s) {
  auto sel = mmn_select(s.neighbor_view);
  if (sel) {
    s.min_sel = sel->min;
    s.max_sel = sel->max;
  } else {
    s.min_sel.reset();
    s.max_sel.reset();
  }
}

inline void evict_stale(RdspNodeState& s, double now) {
  const double window = s.config.stale_intervals * s.config.hello_interval_s;
  bool changed = false;
  for (auto it = s.neighbor_view.begin(); it != s.neighbor_view.end();) {
    if (now - it->second.last_heard_s > window) {
      it = s.neighbor_view.erase(it);
      changed = true;
    } else {
      ++it;
    }
  }
  if (changed) refresh_selections(s);
}

}  // namespace detail

// Periodic beacon: stable NodeId plus current dynamic ID.
inline WireMessage emit_hello(const RdspNodeState& s,
                              const MessageSizeModel& sizes) {
  WireMessage m;
  m.sender = s.node;
  m.payload = HelloPayload{s.dynamic_id};
  m.size_bytes = sizes.size_of(MessageKind::Hello);
  return m;
}

// Hello intake: update the view, run assignment while unassigned, refresh
// the min/max selections, and age out silent neighbors. Returns the newly
// assigned ID when this hello triggered assignment.
inline std::optional<DynamicId> on_hello(RdspNodeState& s,
                                         const WireMessage& msg, double now) {
  const auto& hello = std::get<HelloPayload>(msg.payload);
  s.neighbor_view[msg.sender] = NeighborInfo{hello.dynamic_id, now};

  std::optional<DynamicId> newly_assigned;
  if (s.role == Role::Relay && !s.dynamic_id.assigned()) {
    std::vector<DynamicId> ids;
    ids.reserve(s.neighbor_view.size());
    for (const auto& [_, info] : s.neighbor_view) ids.push_back(info.id);
    if (auto got = dia_assign(ids)) {
      s.dynamic_id = *got;  // frozen from here on
      newly_assigned = got;
    }
  }

  detail::refresh_selections(s);
  detail::evict_stale(s, now);
  return newly_assigned;
}

// Relay data plane, toward the server.
inline ForwardAction relay_on_request(RdspNodeState& s,
                                      const WireMessage& msg) {
  const auto& req = std::get<RequestPayload>(msg.payload);
  if (s.seen_requests.contains(req.id)) return Drop{"duplicate"};
  s.seen_requests.insert(req.id);
  if (!s.min_sel) return Drop{"no route toward server"};
  WireMessage fwd = msg;
  fwd.sender = s.node;
  fwd.recipient = s.min_sel->node;
  return SendTo{s.min_sel->node, fwd};
}

// Relay data plane, toward the client. A directly heard destination client
// short-circuits max-ID forwarding, otherwise the last hop would bounce
// the ack back up the chain.
inline ForwardAction relay_on_ack(RdspNodeState& s, const WireMessage& msg) {
  const auto& ack = std::get<AckPayload>(msg.payload);
  if (s.seen_acks.contains(ack.id)) return Drop{"duplicate"};
  s.seen_acks.insert(ack.id);
  WireMessage fwd = msg;
  fwd.sender = s.node;
  if (s.neighbor_view.contains(ack.client)) {
    fwd.recipient = ack.client;
    return SendTo{ack.client, fwd};
  }
  if (!s.max_sel) return Drop{"no route toward client"};
  fwd.recipient = s.max_sel->node;
  return SendTo{s.max_sel->node, fwd};
}

// Button press at the client: emit a fresh request toward the min-ID
// neighbor and remember it for round-trip measurement.
inline ForwardAction client_on_button(RdspNodeState& s, double now,
                                      const MessageSizeModel& sizes) {
  if (!s.min_sel) return Drop{"client isolated"};
  MessageId id{s.node, s.next_sequence++};
  s.pending.emplace(id, now);
  WireMessage m;
  m.sender = s.node;
  m.recipient = s.min_sel->node;
  m.payload = RequestPayload{id, s.position};
  m.size_bytes = sizes.size_of(MessageKind::Request);
  return SendTo{s.min_sel->node, m};
}

// Ack intake at the client; completes the matching pending request.
inline std::variant<RoundTrip, Drop> client_on_ack(RdspNodeState& s,
                                                   const WireMessage& msg,
                                                   double now) {
  const auto& ack = std::get<AckPayload>(msg.payload);
  auto it = s.pending.find(ack.id);
  if (it == s.pending.end()) return Drop{"unsolicited ack"};
  RoundTrip rt{ack.id, now - it->second};
  s.pending.erase(it);
  return rt;
}

struct ServerRequestOutcome {
  std::optional<RaiseAlarm> alarm;  // absent for duplicates
  SendTo ack;                       // back to the arrival neighbor
};

// Server intake: first copy of a request raises the alarm with the
// great-circle distance to the reporting client; every copy is acked to
// whichever neighbor delivered it.
inline ServerRequestOutcome server_on_request(RdspNodeState& s,
                                              const WireMessage& msg,
                                              double now,
                                              const MessageSizeModel& sizes) {
  const auto& req = std::get<RequestPayload>(msg.payload);
  ServerRequestOutcome out;
  if (!s.server_arrivals.contains(req.id)) {
    s.server_arrivals.emplace(req.id, now);
    out.alarm =
        RaiseAlarm{req.id, haversine_distance(s.position, req.position)};
  }
  WireMessage ack;
  ack.sender = s.node;
  ack.recipient = msg.sender;
  ack.payload = AckPayload{req.id, req.id.origin};
  ack.size_bytes = sizes.size_of(MessageKind::Ack);
  out.ack = SendTo{msg.sender, ack};
  return out;
}

}  // namespace rdsp
