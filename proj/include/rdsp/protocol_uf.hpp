#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <variant>

#include "rdsp/core.hpp"
#include "rdsp/geo.hpp"

namespace rdsp {

// One DSDV routing-table row.
struct DsdvRouteEntry {
  NodeId destination;
  NodeId next_hop;
  std::uint32_t hop_count = 0;
  std::uint64_t sequence = 0;  // even; odd (broken-link) is modeled by expiry
  double last_update_s = 0.0;
};

// Destination-sequenced distance-vector table. The self entry always
// exists with hop count 0 and the owner's own sequence number.
struct DsdvTable {
  NodeId owner;
  std::map<NodeId, DsdvRouteEntry> entries;

  DsdvTable() = default;
  explicit DsdvTable(NodeId own) : owner(own) {
    entries[own] = DsdvRouteEntry{own, own, 0, 0, 0.0};
  }

  DsdvRouteEntry& self() { return entries.at(owner); }
  const DsdvRouteEntry& self() const { return entries.at(owner); }
};

struct UfConfig {
  double advert_interval_s = 1.0;
  int stale_intervals = 3;  // entries expire after this many silent periods
};

// Full-table broadcast. Bumps the owner's sequence by two before emission
// so every period re-advertises fresher self state.
inline WireMessage dsdv_advertise(DsdvTable& t, const MessageSizeModel& sizes,
                                  double now) {
  t.self().sequence += 2;
  t.self().last_update_s = now;
  DsdvAdvertPayload payload;
  payload.entries.reserve(t.entries.size());
  for (const auto& [_, e] : t.entries)
    payload.entries.push_back(
        DsdvAdvertEntry{e.destination, e.next_hop, e.hop_count, e.sequence});
  WireMessage m;
  m.sender = t.owner;
  m.payload = std::move(payload);
  m.size_bytes =
      sizes.size_of(MessageKind::DsdvAdvertisement, t.entries.size());
  return m;
}

// Advertisement intake. A route is adopted when its sequence is newer, or
// equally new but shorter. Re-hearing the route currently in use refreshes
// its timestamp so steady-state tables do not expire.
inline void dsdv_update(DsdvTable& t, const WireMessage& msg, double now) {
  const auto& adv = std::get<DsdvAdvertPayload>(msg.payload);
  const NodeId via = msg.sender;
  for (const auto& e : adv.entries) {
    if (e.destination == t.owner) continue;  // own row is authoritative
    const std::uint32_t hops = e.hop_count + 1;
    auto it = t.entries.find(e.destination);
    if (it == t.entries.end()) {
      t.entries[e.destination] =
          DsdvRouteEntry{e.destination, via, hops, e.sequence, now};
      continue;
    }
    DsdvRouteEntry& cur = it->second;
    if (e.sequence > cur.sequence ||
        (e.sequence == cur.sequence && hops < cur.hop_count)) {
      cur = DsdvRouteEntry{e.destination, via, hops, e.sequence, now};
    } else if (e.sequence == cur.sequence && via == cur.next_hop &&
               hops == cur.hop_count) {
      cur.last_update_s = now;
    }
  }
  // The advertiser is a live direct neighbor regardless of the above.
  auto self_row = std::find_if(
      adv.entries.begin(), adv.entries.end(),
      [&](const DsdvAdvertEntry& e) { return e.destination == via; });
  if (self_row != adv.entries.end()) {
    DsdvRouteEntry& direct = t.entries[via];
    if (self_row->sequence >= direct.sequence || direct.hop_count > 1) {
      direct = DsdvRouteEntry{via, via, 1,
                              std::max(self_row->sequence, direct.sequence),
                              now};
    } else {
      direct.last_update_s = now;
    }
  }
}

// Age out rows not refreshed within the staleness window.
inline void dsdv_expire(DsdvTable& t, double now, const UfConfig& cfg) {
  const double window = cfg.stale_intervals * cfg.advert_interval_s;
  for (auto it = t.entries.begin(); it != t.entries.end();) {
    if (it->first != t.owner && now - it->second.last_update_s > window)
      it = t.entries.erase(it);
    else
      ++it;
  }
}

inline std::optional<NodeId> dsdv_next_hop(const DsdvTable& t, NodeId dest) {
  auto it = t.entries.find(dest);
  if (it == t.entries.end()) return std::nullopt;  // no route
  return it->second.next_hop;
}

struct UfNodeState {
  NodeId node;
  Role role = Role::Relay;
  GeoPosition position;
  NodeId server;  // request destination, known network-wide
  UfConfig config;
  DsdvTable table;

  std::map<MessageId, double> pending;
  std::uint64_t next_sequence = 0;
  std::set<MessageId> seen_requests;
  std::set<MessageId> seen_acks;
  std::map<MessageId, double> server_arrivals;
};

inline UfNodeState make_uf_state(NodeId node, Role role,
                                 const GeoPosition& pos, NodeId server,
                                 const UfConfig& cfg = {}) {
  UfNodeState s;
  s.node = node;
  s.role = role;
  s.position = pos;
  s.server = server;
  s.config = cfg;
  s.table = DsdvTable{node};
  return s;
}

// Data-plane forwarding: requests run to the server, acks to the
// originating client, both over table lookups.
inline ForwardAction uf_forward(UfNodeState& s, const WireMessage& msg) {
  NodeId dest;
  if (const auto* req = std::get_if<RequestPayload>(&msg.payload)) {
    if (s.seen_requests.contains(req->id)) return Drop{"duplicate"};
    s.seen_requests.insert(req->id);
    dest = s.server;
  } else {
    const auto& ack = std::get<AckPayload>(msg.payload);
    if (s.seen_acks.contains(ack.id)) return Drop{"duplicate"};
    s.seen_acks.insert(ack.id);
    dest = ack.client;
  }
  if (dest == s.node) return DeliverLocally{msg};
  auto next = dsdv_next_hop(s.table, dest);
  if (!next) return Drop{"no route"};
  WireMessage fwd = msg;
  fwd.sender = s.node;
  fwd.recipient = *next;
  return SendTo{*next, fwd};
}

inline ForwardAction uf_client_on_button(UfNodeState& s, double now,
                                         const MessageSizeModel& sizes) {
  auto next = dsdv_next_hop(s.table, s.server);
  if (!next) return Drop{"no route"};
  MessageId id{s.node, s.next_sequence++};
  s.pending.emplace(id, now);
  WireMessage m;
  m.sender = s.node;
  m.recipient = *next;
  m.payload = RequestPayload{id, s.position};
  m.size_bytes = sizes.size_of(MessageKind::Request);
  return SendTo{*next, m};
}

inline std::variant<RoundTrip, Drop> uf_client_on_ack(UfNodeState& s,
                                                      const WireMessage& msg,
                                                      double now) {
  const auto& ack = std::get<AckPayload>(msg.payload);
  auto it = s.pending.find(ack.id);
  if (it == s.pending.end()) return Drop{"unsolicited ack"};
  RoundTrip rt{ack.id, now - it->second};
  s.pending.erase(it);
  return rt;
}

struct UfServerOutcome {
  std::optional<RaiseAlarm> alarm;
  std::optional<SendTo> ack;  // absent when no route back exists yet
  std::optional<Drop> drop;
};

inline UfServerOutcome uf_server_on_request(UfNodeState& s,
                                            const WireMessage& msg, double now,
                                            const MessageSizeModel& sizes) {
  const auto& req = std::get<RequestPayload>(msg.payload);
  UfServerOutcome out;
  if (!s.server_arrivals.contains(req.id)) {
    s.server_arrivals.emplace(req.id, now);
    out.alarm =
        RaiseAlarm{req.id, haversine_distance(s.position, req.position)};
  }
  auto next = dsdv_next_hop(s.table, req.id.origin);
  if (!next) {
    out.drop = Drop{"no route"};
    return out;
  }
  WireMessage ack;
  ack.sender = s.node;
  ack.recipient = *next;
  ack.payload = AckPayload{req.id, req.id.origin};
  ack.size_bytes = sizes.size_of(MessageKind::Ack);
  out.ack = SendTo{*next, ack};
  return out;
}

}  // namespace rdsp
