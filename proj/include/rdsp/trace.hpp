#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rdsp/core.hpp"

namespace rdsp {

enum class TraceAction {
  Send,
  Recv,
  Drop,
  Collision,
  Alarm,
  Press,
  Rtt,
  Assign,
  Disable,
  End,
};

inline const char* to_string(TraceAction a) {
  switch (a) {
    case TraceAction::Send: return "send";
    case TraceAction::Recv: return "recv";
    case TraceAction::Drop: return "drop";
    case TraceAction::Collision: return "collision";
    case TraceAction::Alarm: return "alarm";
    case TraceAction::Press: return "press";
    case TraceAction::Rtt: return "rtt";
    case TraceAction::Assign: return "assign";
    case TraceAction::Disable: return "disable";
    case TraceAction::End: return "end";
  }
  return "?";
}

// One log line worth of structured data. Field use depends on the action;
// unused fields keep their defaults.
struct TraceRecord {
  double time_s = 0.0;
  NodeId node;
  TraceAction action = TraceAction::End;
  MessageKind msg_kind = MessageKind::Hello;
  bool has_kind = false;
  std::optional<MessageId> id;
  std::optional<NodeId> peer;  // to= on sends, from= on receives
  std::size_t size_bytes = 0;
  int reach = -1;  // in-range active receivers at send time
  std::string note;
  double value = 0.0;  // rtt seconds or alarm distance meters
};

// Append-only run log. `complete` flips when the engine writes the final
// end marker; consumers treat anything else as truncated.
struct EventTrace {
  std::vector<TraceRecord> records;
  double duration_s = 0.0;
  bool complete = false;
};

namespace detail {

inline void append_num(std::string& out, const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  out += buf;
}

}  // namespace detail

inline std::string format_message_id(const MessageId& id) {
  return std::to_string(id.origin.value) + ":" + std::to_string(id.sequence);
}

// Text form: time<TAB>node<TAB>action<TAB>detail, one record per line,
// time with six decimals. Feed a label map from the scenario for readable
// node names.
inline std::string serialize(const EventTrace& trace,
                             const std::map<NodeId, std::string>& labels) {
  auto label = [&](NodeId n) -> std::string {
    auto it = labels.find(n);
    if (it != labels.end()) return it->second;
    return "n" + std::to_string(n.value);
  };
  std::string out;
  out.reserve(trace.records.size() * 48);
  for (const TraceRecord& r : trace.records) {
    detail::append_num(out, "%.6f", r.time_s);
    out += '\t';
    out += label(r.node);
    out += '\t';
    out += to_string(r.action);
    out += '\t';
    switch (r.action) {
      case TraceAction::Send:
        out += "kind=";
        out += to_string(r.msg_kind);
        if (r.id) out += " id=" + format_message_id(*r.id);
        out += r.peer ? " to=" + label(*r.peer) : std::string(" to=*");
        out += " size=" + std::to_string(r.size_bytes);
        out += " reach=" + std::to_string(r.reach);
        break;
      case TraceAction::Recv:
      case TraceAction::Collision:
        out += "kind=";
        out += to_string(r.msg_kind);
        if (r.id) out += " id=" + format_message_id(*r.id);
        if (r.peer) out += " from=" + label(*r.peer);
        break;
      case TraceAction::Drop:
        if (r.has_kind) {
          out += "kind=";
          out += to_string(r.msg_kind);
          out += ' ';
        }
        if (r.id) out += "id=" + format_message_id(*r.id) + " ";
        out += "reason=";
        out += r.note;
        break;
      case TraceAction::Alarm:
        out += "id=" + format_message_id(*r.id) + " distance_m=";
        detail::append_num(out, "%.3f", r.value);
        break;
      case TraceAction::Press:
        out += "id=" + format_message_id(*r.id);
        break;
      case TraceAction::Rtt:
        out += "id=" + format_message_id(*r.id) + " seconds=";
        detail::append_num(out, "%.6f", r.value);
        break;
      case TraceAction::Assign:
        out += "dynamic_id=" + std::to_string(static_cast<int>(r.value));
        break;
      case TraceAction::Disable:
        out += "-";
        break;
      case TraceAction::End:
        out += "run-complete";
        break;
    }
    out += '\n';
  }
  return out;
}

// FNV-1a over the serialized text; used for determinism checks.
inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace rdsp
