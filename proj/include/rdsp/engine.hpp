#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rdsp/core.hpp"
#include "rdsp/geo.hpp"
#include "rdsp/protocol_rdsp.hpp"
#include "rdsp/protocol_uf.hpp"
#include "rdsp/scenario.hpp"
#include "rdsp/trace.hpp"

namespace rdsp {

enum class Protocol { Rdsp, Uf };

inline const char* to_string(Protocol p) {
  return p == Protocol::Rdsp ? "rdsp" : "uf";
}

struct SimOptions {
  bool log_radio = true;  // send/recv/collision records
  std::vector<std::pair<NodeId, double>> disable_at;
};

template <class Node>
struct SimResult {
  EventTrace trace;
  std::vector<Node> nodes;  // final protocol state, scenario order
};

// Walk a polyline from `origin` through `waypoints`, emitting a device
// position every `spacing_m` of cumulative walked distance. Residual
// distance carries across legs; positions interpolate linearly in lat/lon
// within a leg.
inline std::vector<GeoPosition> deploy_chain(
    const GeoPosition& origin, const std::vector<GeoPosition>& waypoints,
    double spacing_m) {
  if (spacing_m <= 0)
    throw std::invalid_argument("deploy_chain: spacing must be positive");
  std::vector<GeoPosition> out;
  GeoPosition leg_start = origin;
  double since_last = 0.0;  // walked distance since the previous drop
  for (const GeoPosition& leg_end : waypoints) {
    const double leg_len = haversine_distance(leg_start, leg_end);
    if (leg_len <= 0.0) {
      leg_start = leg_end;
      continue;
    }
    double walked = 0.0;  // progress along this leg
    // Waypoints planned in local planar meters come back from the
    // great-circle measure a few nanometers short; a micrometer of slack
    // keeps drops that land exactly on a waypoint from being skipped.
    while (leg_len - walked + since_last >= spacing_m - 1e-6) {
      walked += spacing_m - since_last;
      since_last = 0.0;
      const double t = walked / leg_len;
      out.push_back(GeoPosition{
          leg_start.latitude_deg +
              t * (leg_end.latitude_deg - leg_start.latitude_deg),
          leg_start.longitude_deg +
              t * (leg_end.longitude_deg - leg_start.longitude_deg)});
    }
    since_last += leg_len - walked;
    leg_start = leg_end;
  }
  return out;
}

namespace detail {

// Deterministic uniform doubles from the raw 64-bit stream, so traces do
// not depend on the standard library's distribution implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform01() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double positive_upto(double hi) {  // (0, hi]
    return hi * (1.0 - uniform01());
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace detail

template <class NodeT>
class Simulation;

// Engine-side sink the protocol adapters report through.
template <class NodeT>
class NodeContext {
 public:
  NodeContext(Simulation<NodeT>& sim, std::size_t node_index, double now)
      : sim_(sim), index_(node_index), now_(now) {}

  void transmit(const WireMessage& msg) { sim_.start_csma(index_, msg, now_); }
  void log_press(const std::optional<MessageId>& id) {
    sim_.record_press(index_, id, now_);
  }
  void log_drop(const std::string& reason, std::optional<MessageId> id,
                std::optional<MessageKind> kind) {
    sim_.record_drop(index_, reason, id, kind, now_);
  }
  void log_alarm(const RaiseAlarm& alarm) {
    sim_.record_alarm(index_, alarm, now_);
  }
  void log_rtt(const RoundTrip& rt) { sim_.record_rtt(index_, rt, now_); }
  void log_assign(DynamicId id) { sim_.record_assign(index_, id, now_); }

 private:
  Simulation<NodeT>& sim_;
  std::size_t index_;
  double now_;
};

// Adapter binding the RDSP state machine to engine events.
class RdspNode {
 public:
  RdspNode(const NodeSpec& spec, const ScenarioConfig& cfg)
      : sizes_(cfg.sizes),
        state_(make_rdsp_state(spec.id, spec.role, spec.position,
                               RdspConfig{cfg.hello_interval_s, 3})),
        interval_(cfg.hello_interval_s) {}

  NodeId id() const { return state_.node; }
  Role role() const { return state_.role; }
  double control_interval() const { return interval_; }
  const RdspNodeState& state() const { return state_; }

  template <class Ctx>
  void on_timer(Ctx& ctx, double) {
    ctx.transmit(emit_hello(state_, sizes_));
  }

  template <class Ctx>
  void on_button(Ctx& ctx, double now) {
    auto action = client_on_button(state_, now, sizes_);
    if (const auto* send = std::get_if<SendTo>(&action)) {
      ctx.log_press(send->message.exchange_id());
      ctx.transmit(send->message);
    } else {
      ctx.log_press(std::nullopt);
      ctx.log_drop(std::get<Drop>(action).reason, std::nullopt,
                   MessageKind::Request);
    }
  }

  template <class Ctx>
  void on_receive(Ctx& ctx, const WireMessage& msg, double now) {
    switch (msg.kind()) {
      case MessageKind::Hello:
        if (auto assigned = on_hello(state_, msg, now))
          ctx.log_assign(*assigned);
        break;
      case MessageKind::Request:
        if (state_.role == Role::Relay) {
          forward(ctx, relay_on_request(state_, msg), msg);
        } else if (state_.role == Role::Server) {
          auto out = server_on_request(state_, msg, now, sizes_);
          if (out.alarm) ctx.log_alarm(*out.alarm);
          ctx.transmit(out.ack.message);
        }
        break;
      case MessageKind::Ack:
        if (state_.role == Role::Relay) {
          forward(ctx, relay_on_ack(state_, msg), msg);
        } else if (state_.role == Role::Client) {
          auto out = client_on_ack(state_, msg, now);
          if (const auto* rt = std::get_if<RoundTrip>(&out))
            ctx.log_rtt(*rt);
          else
            ctx.log_drop(std::get<Drop>(out).reason, msg.exchange_id(),
                         msg.kind());
        }
        break;
      case MessageKind::DsdvAdvertisement:
        break;  // foreign control plane, ignored
    }
  }

 private:
  template <class Ctx>
  void forward(Ctx& ctx, const ForwardAction& action, const WireMessage& in) {
    if (const auto* send = std::get_if<SendTo>(&action))
      ctx.transmit(send->message);
    else if (const auto* drop = std::get_if<Drop>(&action))
      ctx.log_drop(drop->reason, in.exchange_id(), in.kind());
  }

  MessageSizeModel sizes_;
  RdspNodeState state_;
  double interval_;
};

// Adapter binding the DSDV/UF machinery to engine events.
class UfNode {
 public:
  UfNode(const NodeSpec& spec, const ScenarioConfig& cfg)
      : sizes_(cfg.sizes), interval_(cfg.advert_interval_s) {
    const NodeSpec* server = cfg.server();
    state_ = make_uf_state(spec.id, spec.role, spec.position,
                           server ? server->id : spec.id,
                           UfConfig{cfg.advert_interval_s, 3});
  }

  NodeId id() const { return state_.node; }
  Role role() const { return state_.role; }
  double control_interval() const { return interval_; }
  const UfNodeState& state() const { return state_; }

  template <class Ctx>
  void on_timer(Ctx& ctx, double now) {
    dsdv_expire(state_.table, now, state_.config);
    ctx.transmit(dsdv_advertise(state_.table, sizes_, now));
  }

  template <class Ctx>
  void on_button(Ctx& ctx, double now) {
    auto action = uf_client_on_button(state_, now, sizes_);
    if (const auto* send = std::get_if<SendTo>(&action)) {
      ctx.log_press(send->message.exchange_id());
      ctx.transmit(send->message);
    } else {
      ctx.log_press(std::nullopt);
      ctx.log_drop(std::get<Drop>(action).reason, std::nullopt,
                   MessageKind::Request);
    }
  }

  template <class Ctx>
  void on_receive(Ctx& ctx, const WireMessage& msg, double now) {
    switch (msg.kind()) {
      case MessageKind::DsdvAdvertisement:
        dsdv_update(state_.table, msg, now);
        break;
      case MessageKind::Request:
        if (state_.role == Role::Server) {
          auto out = uf_server_on_request(state_, msg, now, sizes_);
          if (out.alarm) ctx.log_alarm(*out.alarm);
          if (out.ack) ctx.transmit(out.ack->message);
          if (out.drop)
            ctx.log_drop(out.drop->reason, msg.exchange_id(),
                         MessageKind::Ack);
        } else {
          forward(ctx, uf_forward(state_, msg), msg);
        }
        break;
      case MessageKind::Ack:
        if (state_.role == Role::Client) {
          auto out = uf_client_on_ack(state_, msg, now);
          if (const auto* rt = std::get_if<RoundTrip>(&out))
            ctx.log_rtt(*rt);
          else
            ctx.log_drop(std::get<Drop>(out).reason, msg.exchange_id(),
                         msg.kind());
        } else {
          forward(ctx, uf_forward(state_, msg), msg);
        }
        break;
      case MessageKind::Hello:
        break;  // foreign control plane, ignored
    }
  }

 private:
  template <class Ctx>
  void forward(Ctx& ctx, const ForwardAction& action, const WireMessage& in) {
    if (const auto* send = std::get_if<SendTo>(&action))
      ctx.transmit(send->message);
    else if (const auto* drop = std::get_if<Drop>(&action))
      ctx.log_drop(drop->reason, in.exchange_id(), in.kind());
  }

  MessageSizeModel sizes_;
  UfNodeState state_;
  double interval_;
};

// Deterministic discrete-event loop: a (time, insertion counter) ordered
// queue over timer fires, button presses, CSMA sensing, transmission ends
// and radio deliveries.
template <class NodeT>
class Simulation {
 public:
  Simulation(const ScenarioConfig& cfg, std::uint64_t seed,
             const SimOptions& opts)
      : cfg_(cfg), opts_(opts), rng_(seed) {
    validate(cfg);
    for (const NodeSpec& spec : cfg.nodes) {
      index_of_[spec.id] = nodes_.size();
      nodes_.emplace_back(spec, cfg);
      positions_.push_back(spec.position);
      active_.push_back(true);
      next_timer_base_.push_back(0.0);
    }
    const std::size_t n = nodes_.size();
    dist_.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        dist_[i][j] = dist_[j][i] =
            haversine_distance(positions_[i], positions_[j]);
  }

  SimResult<NodeT> run() {
    schedule_initial();
    while (!queue_.empty()) {
      Event ev = queue_.top();
      if (ev.time > cfg_.duration_s) break;
      queue_.pop();
      now_ = ev.time;
      dispatch(ev);
    }
    trace_.duration_s = cfg_.duration_s;
    TraceRecord end;
    end.time_s = cfg_.duration_s;
    end.node = nodes_.empty() ? NodeId{0} : nodes_.front().id();
    end.action = TraceAction::End;
    trace_.records.push_back(end);
    trace_.complete = true;
    return SimResult<NodeT>{std::move(trace_), std::move(nodes_)};
  }

  // -- called by NodeContext ------------------------------------------------

  void start_csma(std::size_t sender, const WireMessage& msg, double now) {
    attempt_send(sender, msg, now);
  }

  void record_press(std::size_t idx, const std::optional<MessageId>& id,
                    double now) {
    TraceRecord r;
    r.time_s = now;
    r.node = nodes_[idx].id();
    r.action = TraceAction::Press;
    r.id = id;
    trace_.records.push_back(r);
  }

  void record_drop(std::size_t idx, const std::string& reason,
                   std::optional<MessageId> id, std::optional<MessageKind> kind,
                   double now) {
    TraceRecord r;
    r.time_s = now;
    r.node = nodes_[idx].id();
    r.action = TraceAction::Drop;
    r.id = id;
    if (kind) {
      r.msg_kind = *kind;
      r.has_kind = true;
    }
    r.note = reason;
    trace_.records.push_back(r);
  }

  void record_alarm(std::size_t idx, const RaiseAlarm& alarm, double now) {
    TraceRecord r;
    r.time_s = now;
    r.node = nodes_[idx].id();
    r.action = TraceAction::Alarm;
    r.id = alarm.id;
    r.value = alarm.distance_m;
    trace_.records.push_back(r);
  }

  void record_rtt(std::size_t idx, const RoundTrip& rt, double now) {
    TraceRecord r;
    r.time_s = now;
    r.node = nodes_[idx].id();
    r.action = TraceAction::Rtt;
    r.id = rt.id;
    r.value = rt.rtt_s;
    trace_.records.push_back(r);
  }

  void record_assign(std::size_t idx, DynamicId id, double now) {
    TraceRecord r;
    r.time_s = now;
    r.node = nodes_[idx].id();
    r.action = TraceAction::Assign;
    r.value = id.value;
    trace_.records.push_back(r);
  }

 private:
  struct Transmission {
    std::size_t sender;
    WireMessage msg;
    double start;
    double end;
  };

  struct Event {
    double time;
    std::uint64_t seq;
    enum class Kind {
      TimerFire,
      ButtonPress,
      RadioSense,
      TransmissionEnd,
      RadioDeliver,
      NodeDisable,
    } kind;
    std::size_t node = 0;     // timer/press/deliver/disable target
    std::size_t tx = 0;       // TransmissionEnd
    WireMessage msg;          // sense/deliver payload
    std::size_t from = 0;     // deliver source index

    bool operator>(const Event& o) const {
      if (time != o.time) return time > o.time;
      return seq > o.seq;
    }
  };

  void push(Event ev) {
    ev.seq = next_seq_++;
    queue_.push(std::move(ev));
  }

  void schedule_initial() {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      next_timer_base_[i] = nodes_[i].control_interval() * rng_.uniform01();
      schedule_timer(i);
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].role() != Role::Client) continue;
      for (int k = 1; k <= cfg_.request_count; ++k) {
        Event ev;
        ev.kind = Event::Kind::ButtonPress;
        ev.node = i;
        ev.time = cfg_.press_window_s * k / cfg_.request_count;
        push(std::move(ev));
      }
    }
    for (const auto& [node, when] : opts_.disable_at) {
      auto it = index_of_.find(node);
      if (it == index_of_.end())
        throw ScenarioError("disable target not in scenario");
      Event ev;
      ev.kind = Event::Kind::NodeDisable;
      ev.node = it->second;
      ev.time = when;
      push(std::move(ev));
    }
  }

  void schedule_timer(std::size_t i) {
    Event ev;
    ev.kind = Event::Kind::TimerFire;
    ev.node = i;
    ev.time = next_timer_base_[i] + cfg_.timer_jitter_s * rng_.uniform01();
    next_timer_base_[i] += nodes_[i].control_interval();
    push(std::move(ev));
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case Event::Kind::TimerFire:
        if (active_[ev.node]) {
          NodeContext<NodeT> ctx(*this, ev.node, now_);
          nodes_[ev.node].on_timer(ctx, now_);
          schedule_timer(ev.node);
        }
        break;
      case Event::Kind::ButtonPress:
        if (active_[ev.node]) {
          NodeContext<NodeT> ctx(*this, ev.node, now_);
          nodes_[ev.node].on_button(ctx, now_);
        }
        break;
      case Event::Kind::RadioSense:
        attempt_send(ev.node, ev.msg, now_);
        break;
      case Event::Kind::TransmissionEnd:
        finish_transmission(ev.tx);
        break;
      case Event::Kind::RadioDeliver: {
        if (!active_[ev.node]) break;
        if (opts_.log_radio) {
          TraceRecord r;
          r.time_s = now_;
          r.node = nodes_[ev.node].id();
          r.action = TraceAction::Recv;
          r.msg_kind = ev.msg.kind();
          r.has_kind = true;
          r.id = ev.msg.exchange_id();
          r.peer = nodes_[ev.from].id();
          trace_.records.push_back(r);
        }
        if (!ev.msg.recipient || *ev.msg.recipient == nodes_[ev.node].id()) {
          NodeContext<NodeT> ctx(*this, ev.node, now_);
          nodes_[ev.node].on_receive(ctx, ev.msg, now_);
        }
        break;
      }
      case Event::Kind::NodeDisable:
        active_[ev.node] = false;
        TraceRecord r;
        r.time_s = now_;
        r.node = nodes_[ev.node].id();
        r.action = TraceAction::Disable;
        trace_.records.push_back(r);
        break;
    }
  }

  // Index of the first transmission that could overlap anything at or
  // after `t`, using the monotone start ordering of transmissions_.
  std::size_t scan_begin(double t) const {
    const double horizon = t - max_airtime_ - 1e-9;
    std::size_t lo = 0, hi = transmissions_.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (transmissions_[mid].start < horizon)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;
  }

  bool channel_busy_at(std::size_t sender, double t) const {
    for (std::size_t i = scan_begin(t); i < transmissions_.size(); ++i) {
      const Transmission& tx = transmissions_[i];
      if (tx.start > t) break;
      if (tx.end <= t) continue;
      if (tx.sender == sender ||
          dist_[tx.sender][sender] <= cfg_.radio.range_m)
        return true;
    }
    return false;
  }

  void attempt_send(std::size_t sender, const WireMessage& msg, double now) {
    if (!active_[sender]) return;
    if (channel_busy_at(sender, now)) {
      Event retry;
      retry.kind = Event::Kind::RadioSense;
      retry.node = sender;
      retry.msg = msg;
      retry.time = now + rng_.positive_upto(cfg_.radio.csma_max_backoff_s);
      push(std::move(retry));
      return;
    }
    const double airtime = airtime_s(cfg_.radio, msg.size_bytes);
    if (airtime > max_airtime_) max_airtime_ = airtime;
    Transmission tx{sender, msg, now, now + airtime};
    transmissions_.push_back(tx);

    if (opts_.log_radio) {
      int reach = 0;
      for (std::size_t j = 0; j < nodes_.size(); ++j)
        if (j != sender && active_[j] &&
            dist_[sender][j] <= cfg_.radio.range_m)
          ++reach;
      TraceRecord r;
      r.time_s = now;
      r.node = nodes_[sender].id();
      r.action = TraceAction::Send;
      r.msg_kind = msg.kind();
      r.has_kind = true;
      r.id = msg.exchange_id();
      r.peer = msg.recipient ? std::optional<NodeId>{*msg.recipient}
                             : std::nullopt;
      r.size_bytes = msg.size_bytes;
      r.reach = reach;
      trace_.records.push_back(r);
    }

    Event end;
    end.kind = Event::Kind::TransmissionEnd;
    end.tx = transmissions_.size() - 1;
    end.time = tx.end;
    push(std::move(end));
  }

  void finish_transmission(std::size_t tx_index) {
    const Transmission tx = transmissions_[tx_index];
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      if (j == tx.sender || !active_[j]) continue;
      if (dist_[tx.sender][j] > cfg_.radio.range_m) continue;
      bool lost = false;
      if (cfg_.radio.loss_on_collision) {
        for (std::size_t i = scan_begin(tx.start); i < transmissions_.size();
             ++i) {
          if (i == tx_index) continue;
          const Transmission& other = transmissions_[i];
          if (other.start >= tx.end) break;
          if (other.end <= tx.start) continue;  // no time overlap
          // Own transmissions block reception (half duplex); other
          // senders only matter within the receiver's range.
          if (other.sender == j ||
              dist_[other.sender][j] <= cfg_.radio.range_m) {
            lost = true;
            break;
          }
        }
      }
      if (lost) {
        if (opts_.log_radio) {
          TraceRecord r;
          r.time_s = tx.end;
          r.node = nodes_[j].id();
          r.action = TraceAction::Collision;
          r.msg_kind = tx.msg.kind();
          r.has_kind = true;
          r.id = tx.msg.exchange_id();
          r.peer = nodes_[tx.sender].id();
          trace_.records.push_back(r);
        }
        continue;
      }
      Event deliver;
      deliver.kind = Event::Kind::RadioDeliver;
      deliver.node = j;
      deliver.from = tx.sender;
      deliver.msg = tx.msg;
      deliver.time = tx.end + cfg_.radio.per_hop_proc_s;
      if (cfg_.radio.proc_jitter_s > 0)
        deliver.time += cfg_.radio.proc_jitter_s * rng_.uniform01();
      push(std::move(deliver));
    }
  }

  ScenarioConfig cfg_;
  SimOptions opts_;
  detail::Rng rng_;
  std::vector<NodeT> nodes_;
  std::map<NodeId, std::size_t> index_of_;
  std::vector<GeoPosition> positions_;
  std::vector<bool> active_;
  std::vector<double> next_timer_base_;
  std::vector<std::vector<double>> dist_;
  std::vector<Transmission> transmissions_;
  double max_airtime_ = 0.0;
  double now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
  EventTrace trace_;
};

template <class NodeT>
SimResult<NodeT> run_simulation(const ScenarioConfig& cfg, std::uint64_t seed,
                                const SimOptions& opts = {}) {
  Simulation<NodeT> sim(cfg, seed, opts);
  return sim.run();
}

// Protocol-dispatching entry point; returns just the trace.
inline EventTrace run(const ScenarioConfig& cfg, Protocol protocol,
                      std::uint64_t seed, const SimOptions& opts = {}) {
  if (protocol == Protocol::Rdsp)
    return run_simulation<RdspNode>(cfg, seed, opts).trace;
  return run_simulation<UfNode>(cfg, seed, opts).trace;
}

}  // namespace rdsp
