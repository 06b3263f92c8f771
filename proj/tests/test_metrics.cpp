#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "rdsp/campaign.hpp"
#include "rdsp/engine.hpp"
#include "rdsp/metrics.hpp"
#include "rdsp/scenario.hpp"

using namespace rdsp;

namespace {

ScenarioConfig tiny_chain() {
  ScenarioConfig cfg = builtin_chain(1);
  cfg.active_path = "chain";
  return cfg;
}

TraceRecord rec(double t, NodeId node, TraceAction action) {
  TraceRecord r;
  r.time_s = t;
  r.node = node;
  r.action = action;
  return r;
}

TraceRecord send_rec(double t, NodeId node, MessageKind kind,
                     std::size_t bytes) {
  TraceRecord r = rec(t, node, TraceAction::Send);
  r.msg_kind = kind;
  r.has_kind = true;
  r.size_bytes = bytes;
  r.reach = 1;
  return r;
}

}  // namespace

TEST_CASE("metrics from a handmade trace") {
  const ScenarioConfig cfg = tiny_chain();
  const NodeId server{0}, client{1}, relay{2};
  const MessageId first{client, 0}, second{client, 1};

  EventTrace trace;
  trace.duration_s = 60.0;
  trace.complete = true;

  auto press = rec(10.0, client, TraceAction::Press);
  press.id = first;
  trace.records.push_back(press);

  trace.records.push_back(send_rec(10.1, relay, MessageKind::Request, 32));
  trace.records.push_back(send_rec(10.2, relay, MessageKind::Hello, 8));
  trace.records.push_back(send_rec(10.3, server, MessageKind::Hello, 8));
  trace.records.push_back(send_rec(10.35, client, MessageKind::Hello, 8));
  trace.records.push_back(
      send_rec(10.4, relay, MessageKind::DsdvAdvertisement, 56));
  trace.records.push_back(send_rec(10.45, relay, MessageKind::Ack, 16));
  trace.records.push_back(send_rec(10.46, server, MessageKind::Ack, 16));

  auto alarm = rec(10.5, server, TraceAction::Alarm);
  alarm.id = first;
  alarm.value = 523.0;
  trace.records.push_back(alarm);
  trace.records.push_back(alarm);  // duplicate arrival, must not double count

  auto rtt = rec(11.0, client, TraceAction::Rtt);
  rtt.id = first;
  rtt.value = 1.0;
  trace.records.push_back(rtt);

  auto press2 = rec(12.0, client, TraceAction::Press);
  press2.id = second;
  trace.records.push_back(press2);  // never answered

  trace.records.push_back(rec(60.0, server, TraceAction::End));

  const RunMetrics m = compute_metrics(trace, cfg);
  CHECK(m.presses == 2);
  CHECK(m.delivered == 1);
  CHECK(m.acked == 1);
  CHECK(m.e2e_mean_s == Catch::Approx(0.5));
  CHECK(m.rtt_mean_s == Catch::Approx(1.0));
  CHECK(m.delivery_ratio == Catch::Approx(0.5));
  CHECK(m.ack_ratio == Catch::Approx(0.5));
  CHECK(m.has_e2e);
  CHECK(m.has_rtt);
  // Control cost counts relay beacons and table broadcasts only; relayed
  // acks are tallied separately from byte-counted control traffic.
  CHECK(m.control_messages == 2);
  CHECK(m.control_bytes == 8 + 56);
  CHECK(m.ack_sends == 1);
  CHECK(m.path_distance_m == Catch::Approx(176.0).margin(0.5));
}

TEST_CASE("a truncated trace is rejected") {
  EventTrace trace;
  trace.complete = false;
  CHECK_THROWS_WITH(compute_metrics(trace, tiny_chain()),
                    "compute_metrics: trace is not complete");
}

TEST_CASE("summaries over repeats") {
  const Summary s = summarize({1.0, 2.0, 3.0, 4.0, 5.0});
  CHECK(s.mean == Catch::Approx(3.0));
  CHECK(s.stddev == Catch::Approx(1.5811388300841898).epsilon(1e-14));
  CHECK(s.count == 5);
  CHECK_FALSE(s.single_repeat());

  const Summary one = summarize({42.0});
  CHECK(one.mean == 42.0);
  CHECK(one.stddev == 0.0);
  CHECK(one.single_repeat());

  const Summary none = summarize({});
  CHECK(none.count == 0);

  const Summary flat = summarize({7.0, 7.0, 7.0});
  CHECK(flat.stddev == 0.0);
}

TEST_CASE("rows aggregate only the runs that produced samples") {
  RunMetrics with;
  with.has_e2e = with.has_rtt = true;
  with.e2e_mean_s = 0.4;
  with.rtt_mean_s = 0.9;
  with.delivery_ratio = 1.0;
  with.control_messages = 100;
  RunMetrics without;  // delivered nothing
  without.delivery_ratio = 0.0;
  without.control_messages = 120;

  const auto rows = rows_from_runs("rdsp", "chain", {with, without});
  const SummaryRow& e2e = find_row(rows, "rdsp", "chain", "end_to_end_delay_s");
  CHECK(e2e.mean == Catch::Approx(0.4));
  CHECK(e2e.repeats == 1);  // the empty run cannot contribute a delay
  const SummaryRow& delivery = find_row(rows, "rdsp", "chain", "delivery_ratio");
  CHECK(delivery.mean == Catch::Approx(0.5));
  CHECK(delivery.repeats == 2);
  const SummaryRow& msgs = find_row(rows, "rdsp", "chain", "overhead_msgs");
  CHECK(msgs.mean == Catch::Approx(110.0));

  CHECK_THROWS_AS(find_row(rows, "uf", "chain", "delivery_ratio"),
                  std::out_of_range);
}

TEST_CASE("merged tables refuse duplicate keys") {
  RunMetrics m;
  std::vector<SummaryRow> rows = rows_from_runs("rdsp", "chain", {m});
  CHECK_NOTHROW(append_rows(rows, rows_from_runs("uf", "chain", {m})));
  CHECK_THROWS_WITH(
      append_rows(rows, rows_from_runs("uf", "chain", {m})),
      Catch::Matchers::ContainsSubstring("duplicate row key"));
}

TEST_CASE("csv output is stable byte for byte") {
  std::vector<SummaryRow> rows{
      {"rdsp", "chain", "delivery_ratio", 0.5, 0.25, 5},
      {"uf", "chain", "delivery_ratio", 1.0 / 3.0, 0.0, 1},
  };
  const std::string expected =
      "protocol,path,metric,mean,stddev,repeats\n"
      "rdsp,chain,delivery_ratio,0.5,0.25,5\n"
      "uf,chain,delivery_ratio,0.333333333,0,1\n";
  CHECK(to_csv(rows) == expected);
  CHECK(to_csv(rows) == to_csv(rows));
}

TEST_CASE("round trips dominate one-way delays on a live run") {
  ScenarioConfig cfg = builtin_chain(3);
  cfg.duration_s = 120.0;
  cfg.press_window_s = 100.0;
  cfg.request_count = 20;
  cfg.active_path = "chain";
  const EventTrace trace = run(cfg, Protocol::Rdsp, 9);

  std::map<MessageId, double> press, alarm, rtt;
  for (const TraceRecord& r : trace.records) {
    if (r.action == TraceAction::Press && r.id) press.emplace(*r.id, r.time_s);
    if (r.action == TraceAction::Alarm && r.id) alarm.emplace(*r.id, r.time_s);
    if (r.action == TraceAction::Rtt && r.id) rtt.emplace(*r.id, r.value);
  }
  REQUIRE(!rtt.empty());
  for (const auto& [id, rtt_s] : rtt) {
    REQUIRE(press.contains(id));
    REQUIRE(alarm.contains(id));
    CHECK(rtt_s > alarm.at(id) - press.at(id));
  }

  const RunMetrics m = compute_metrics(trace, cfg);
  CHECK(m.presses == 20);
  CHECK(m.delivered > 0);
  CHECK(m.rtt_mean_s > m.e2e_mean_s);
  CHECK(m.delivery_ratio > 0.0);
  CHECK(m.delivery_ratio <= 1.0);
  CHECK(m.control_messages > 0);
  CHECK(m.path_distance_m == Catch::Approx(4 * 88.0).margin(0.5));
}

TEST_CASE("campaign grid is deterministic and complete") {
  CampaignSpec spec;
  spec.base = builtin_twobranch();
  spec.repeats = 2;
  spec.base_seed = 1;
  spec.jobs = 2;
  spec.log_radio = true;

  const CampaignResult first = run_campaign(spec);
  const CampaignResult second = run_campaign(spec);
  CHECK(to_csv(first.rows) == to_csv(second.rows));

  // 2 protocols x 2 paths x 7 metrics.
  CHECK(first.rows.size() == 28);
  CHECK(first.runs_for(Protocol::Rdsp, "short").size() == 2);
  CHECK(first.runs_for(Protocol::Uf, "long").size() == 2);
  CHECK_THROWS_AS(first.runs_for(Protocol::Rdsp, "nope"), std::out_of_range);

  const TrendDelta delta = compare_protocols(first);
  CHECK(std::isfinite(delta.e2e_reduction_pct));
  CHECK(std::isfinite(delta.rtt_reduction_pct));
  CHECK(std::isfinite(delta.delivery_gain_pp));

  // The single-request smoke scenario delivers everything on both sides.
  const SummaryRow& rdsp_delivery =
      find_row(first.rows, "rdsp", "short", "delivery_ratio");
  CHECK(rdsp_delivery.mean == Catch::Approx(1.0));

  CampaignSpec bad = spec;
  bad.repeats = 0;
  CHECK_THROWS_AS(run_campaign(bad), std::invalid_argument);

  CampaignSpec pathless = spec;
  pathless.base.paths.clear();
  pathless.base.active_path.reset();
  CHECK_THROWS_AS(run_campaign(pathless), std::invalid_argument);
}
