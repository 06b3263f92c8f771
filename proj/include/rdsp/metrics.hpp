#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdsp/core.hpp"
#include "rdsp/scenario.hpp"
#include "rdsp/trace.hpp"

namespace rdsp {

// Per-run figures pulled out of one event trace.
struct RunMetrics {
  int presses = 0;
  int delivered = 0;  // distinct requests that reached the operator alarm
  int acked = 0;      // distinct requests whose ack made it back
  double e2e_mean_s = 0.0;
  double rtt_mean_s = 0.0;
  double delivery_ratio = 0.0;
  double ack_ratio = 0.0;
  std::int64_t control_messages = 0;  // hello/advert sends by relay nodes
  std::int64_t control_bytes = 0;
  std::int64_t ack_sends = 0;  // ack forwards by relays, reported separately
  double path_distance_m = 0.0;
  bool has_e2e = false;
  bool has_rtt = false;
};

inline RunMetrics compute_metrics(const EventTrace& trace,
                                  const ScenarioConfig& cfg) {
  if (!trace.complete)
    throw std::invalid_argument("compute_metrics: trace is not complete");
  std::map<NodeId, Role> roles;
  for (const NodeSpec& n : cfg.nodes) roles[n.id] = n.role;

  RunMetrics m;
  std::map<MessageId, double> press_time;
  std::set<MessageId> alarm_seen, rtt_seen;
  double e2e_sum = 0.0, rtt_sum = 0.0;
  int rtt_count = 0;

  for (const TraceRecord& r : trace.records) {
    switch (r.action) {
      case TraceAction::Press:
        ++m.presses;
        if (r.id) press_time.emplace(*r.id, r.time_s);
        break;
      case TraceAction::Alarm:
        if (r.id && alarm_seen.insert(*r.id).second) {
          ++m.delivered;
          auto it = press_time.find(*r.id);
          if (it != press_time.end()) e2e_sum += r.time_s - it->second;
        }
        break;
      case TraceAction::Rtt:
        if (!r.id || rtt_seen.insert(*r.id).second) {
          ++m.acked;
          rtt_sum += r.value;
          ++rtt_count;
        }
        break;
      case TraceAction::Send: {
        if (!r.has_kind) break;
        auto it = roles.find(r.node);
        if (it == roles.end() || it->second != Role::Relay) break;
        if (r.msg_kind == MessageKind::Hello ||
            r.msg_kind == MessageKind::DsdvAdvertisement) {
          ++m.control_messages;
          m.control_bytes += r.size_bytes;
        } else if (r.msg_kind == MessageKind::Ack) {
          ++m.ack_sends;
        }
        break;
      }
      default:
        break;
    }
  }

  if (m.delivered > 0) {
    m.e2e_mean_s = e2e_sum / m.delivered;
    m.has_e2e = true;
  }
  if (rtt_count > 0) {
    m.rtt_mean_s = rtt_sum / rtt_count;
    m.has_rtt = true;
  }
  if (m.presses > 0) {
    m.delivery_ratio = static_cast<double>(m.delivered) / m.presses;
    m.ack_ratio = static_cast<double>(m.acked) / m.presses;
  }
  if (cfg.active_path) m.path_distance_m = path_distance(cfg, *cfg.active_path);
  return m;
}

// Mean and sample standard deviation of a set of repeat values.
struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
  int count = 0;
  bool single_repeat() const { return count == 1; }
};

inline Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.count = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / s.count;
  if (s.count < 2) return s;
  double sq = 0.0;
  for (double x : xs) sq += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(sq / (s.count - 1));
  return s;
}

struct SummaryRow {
  std::string protocol;
  std::string path;
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;
  int repeats = 0;
};

inline constexpr const char* kMetricKeys[] = {
    "end_to_end_delay_s", "round_trip_delay_s", "delivery_ratio",
    "overhead_msgs",      "overhead_bytes",     "ack_sends",
    "distance_covered_m",
};

// Fold repeat runs for one protocol/path cell into one row per metric.
// Delay means only average over runs that produced at least one sample.
inline std::vector<SummaryRow> rows_from_runs(
    const std::string& protocol, const std::string& path,
    const std::vector<RunMetrics>& runs) {
  std::map<std::string, std::vector<double>> samples;
  for (const RunMetrics& m : runs) {
    if (m.has_e2e) samples["end_to_end_delay_s"].push_back(m.e2e_mean_s);
    if (m.has_rtt) samples["round_trip_delay_s"].push_back(m.rtt_mean_s);
    samples["delivery_ratio"].push_back(m.delivery_ratio);
    samples["overhead_msgs"].push_back(
        static_cast<double>(m.control_messages));
    samples["overhead_bytes"].push_back(static_cast<double>(m.control_bytes));
    samples["ack_sends"].push_back(static_cast<double>(m.ack_sends));
    samples["distance_covered_m"].push_back(m.path_distance_m);
  }
  std::vector<SummaryRow> rows;
  for (const char* key : kMetricKeys) {
    const Summary s = summarize(samples[key]);
    rows.push_back(SummaryRow{protocol, path, key, s.mean, s.stddev, s.count});
  }
  return rows;
}

// Append `extra` onto `rows`, refusing key collisions so merged result
// tables stay unambiguous.
inline void append_rows(std::vector<SummaryRow>& rows,
                        const std::vector<SummaryRow>& extra) {
  std::set<std::string> keys;
  for (const SummaryRow& r : rows)
    keys.insert(r.protocol + "\x1f" + r.path + "\x1f" + r.metric);
  for (const SummaryRow& r : extra) {
    if (!keys.insert(r.protocol + "\x1f" + r.path + "\x1f" + r.metric).second)
      throw std::invalid_argument("append_rows: duplicate row key " +
                                  r.protocol + "/" + r.path + "/" + r.metric);
    rows.push_back(r);
  }
}

inline const SummaryRow& find_row(const std::vector<SummaryRow>& rows,
                                  const std::string& protocol,
                                  const std::string& path,
                                  const std::string& metric) {
  for (const SummaryRow& r : rows)
    if (r.protocol == protocol && r.path == path && r.metric == metric)
      return r;
  throw std::out_of_range("find_row: no row " + protocol + "/" + path + "/" +
                          metric);
}

namespace detail {
inline std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}
}  // namespace detail

// Fixed header, LF line endings, %.9g values: repeat invocations on the
// same rows are byte identical.
inline std::string to_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "protocol,path,metric,mean,stddev,repeats\n";
  for (const SummaryRow& r : rows) {
    out += r.protocol;
    out += ',';
    out += r.path;
    out += ',';
    out += r.metric;
    out += ',';
    out += detail::format_value(r.mean);
    out += ',';
    out += detail::format_value(r.stddev);
    out += ',';
    out += std::to_string(r.repeats);
    out += '\n';
  }
  return out;
}

}  // namespace rdsp
