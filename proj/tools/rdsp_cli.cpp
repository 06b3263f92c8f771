#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "rdsp/rdsp.hpp"

namespace fs = std::filesystem;
using namespace rdsp;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Scenario selection shared by run/compare/export-scenario.

struct ScenarioArgs {
  std::string file;
  bool campus = false;
  bool twobranch = false;
  int chain_relays = 0;
};

void add_scenario_options(CLI::App* sub, ScenarioArgs& args,
                          bool positional_file = true) {
  if (positional_file)
    sub->add_option("scenario", args.file, "scenario file to load");
  else
    sub->add_option("--from", args.file, "scenario file to load");
  sub->add_flag("--builtin-campus", args.campus,
                "four-route campus deployment, 23 relays");
  sub->add_flag("--builtin-twobranch", args.twobranch,
                "two disjoint branches between one client and one server");
  sub->add_option("--builtin-chain", args.chain_relays,
                  "straight chain with this many relays")
      ->check(CLI::Range(1, 200));
}

ScenarioConfig resolve_scenario(const ScenarioArgs& args) {
  const int picked = (args.file.empty() ? 0 : 1) + (args.campus ? 1 : 0) +
                     (args.twobranch ? 1 : 0) + (args.chain_relays > 0 ? 1 : 0);
  if (picked == 0)
    throw UsageError(
        "pick a scenario: a file argument or one of --builtin-campus, "
        "--builtin-twobranch, --builtin-chain N");
  if (picked > 1) throw UsageError("more than one scenario selected");
  if (args.campus) return builtin_campus();
  if (args.twobranch) return builtin_twobranch();
  if (args.chain_relays > 0) return builtin_chain(args.chain_relays);
  if (!fs::exists(args.file))
    throw ScenarioError("file not found: " + args.file);
  return load_scenario(args.file);
}

// ---------------------------------------------------------------------------
// Channel and timing overrides. Every constant the engine uses is reachable
// from the command line; unset options keep the scenario's value.

struct Overrides {
  std::optional<double> range_m, bitrate_bps, proc_s, proc_jitter_s, backoff_s;
  std::optional<bool> loss_on_collision;
  std::optional<double> hello_s, advert_s, jitter_s, duration_s, press_window_s;
  std::optional<int> requests;
};

template <class T>
void optional_option(CLI::App* sub, const std::string& name,
                     std::optional<T>& slot, const std::string& help) {
  auto* opt = sub->add_option_function<T>(
      name, [&slot](const T& v) { slot = v; }, help);
  opt->expected(1);
}

void add_override_options(CLI::App* sub, Overrides& o) {
  optional_option<double>(sub, "--range-m", o.range_m,
                          "radio range (default: scenario; generic 90)");
  optional_option<double>(sub, "--bitrate-bps", o.bitrate_bps,
                          "link bitrate (generic 1e6, campus 112e3)");
  optional_option<double>(sub, "--proc-s", o.proc_s,
                          "fixed per-hop processing delay (generic 0.002)");
  optional_option<double>(
      sub, "--proc-jitter-s", o.proc_jitter_s,
      "uniform extra per-hop delay upper bound (generic 0, campus 0.008)");
  optional_option<double>(sub, "--backoff-s", o.backoff_s,
                          "carrier-sense retry window (generic 0.010)");
  optional_option<bool>(sub, "--loss-on-collision", o.loss_on_collision,
                        "overlapping in-range frames are destroyed (true)");
  optional_option<double>(sub, "--hello-interval-s", o.hello_s,
                          "relay beacon period (2)");
  optional_option<double>(sub, "--advert-interval-s", o.advert_s,
                          "routing table broadcast period (1)");
  optional_option<double>(sub, "--timer-jitter-s", o.jitter_s,
                          "per-round control timer jitter (0.005, campus 0.5)");
  optional_option<double>(sub, "--duration-s", o.duration_s,
                          "simulated run length (550)");
  optional_option<int>(sub, "--request-count", o.requests,
                       "button presses per client (100)");
  optional_option<double>(sub, "--press-window-s", o.press_window_s,
                          "window the presses spread over (500)");
}

void apply(const Overrides& o, ScenarioConfig& cfg) {
  if (o.range_m) cfg.radio.range_m = *o.range_m;
  if (o.bitrate_bps) cfg.radio.bitrate_bps = *o.bitrate_bps;
  if (o.proc_s) cfg.radio.per_hop_proc_s = *o.proc_s;
  if (o.proc_jitter_s) cfg.radio.proc_jitter_s = *o.proc_jitter_s;
  if (o.backoff_s) cfg.radio.csma_max_backoff_s = *o.backoff_s;
  if (o.loss_on_collision) cfg.radio.loss_on_collision = *o.loss_on_collision;
  if (o.hello_s) cfg.hello_interval_s = *o.hello_s;
  if (o.advert_s) cfg.advert_interval_s = *o.advert_s;
  if (o.jitter_s) cfg.timer_jitter_s = *o.jitter_s;
  if (o.duration_s) cfg.duration_s = *o.duration_s;
  if (o.requests) cfg.request_count = *o.requests;
  if (o.press_window_s) cfg.press_window_s = *o.press_window_s;
  validate(cfg);
}

// ---------------------------------------------------------------------------

std::string default_out_dir() {
  const char* env = std::getenv("RDSP_OUT_DIR");
  return env && *env ? env : ".";
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec)
      throw std::runtime_error("cannot create directory " +
                               path.parent_path().string() + ": " +
                               ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("short write to " + path.string());
}

Protocol parse_protocol(const std::string& name) {
  if (name == "rdsp") return Protocol::Rdsp;
  if (name == "uf") return Protocol::Uf;
  throw UsageError("unknown protocol " + name);  // unreachable behind IsMember
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(
    const std::string& text) {
  const auto parse_one = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
      throw UsageError("bad seed range '" + text + "', expected N or A..B");
    }
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const std::uint64_t one = parse_one(text);
    return {one, one};
  }
  const std::uint64_t lo = parse_one(text.substr(0, dots));
  const std::uint64_t hi = parse_one(text.substr(dots + 2));
  if (hi < lo) throw UsageError("seed range '" + text + "' runs backwards");
  return {lo, hi};
}

std::string format_ms(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", seconds * 1e3);
  return buf;
}

// Senders of an exchange's frames of one kind, in send order, then the
// last frame's addressee: the node list a message walked through.
std::vector<std::string> route_of(const EventTrace& trace,
                                  const std::map<NodeId, std::string>& labels,
                                  const MessageId& id, MessageKind kind) {
  std::vector<std::string> route;
  std::optional<NodeId> final_hop;
  for (const TraceRecord& r : trace.records) {
    if (r.action != TraceAction::Send || !r.id || !(*r.id == id)) continue;
    if (r.msg_kind != kind) continue;
    route.push_back(labels.at(r.node));
    final_hop = r.peer;
  }
  if (final_hop) route.push_back(labels.at(*final_hop));
  return route;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (const std::string& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

// ---------------------------------------------------------------------------

struct RunArgs {
  ScenarioArgs scenario;
  Overrides overrides;
  std::string protocol = "rdsp";
  std::uint64_t seed = 1;
  std::string path;
  std::string out_dir = default_out_dir();
  std::string trace_file;
  std::string metrics_file;
  bool no_radio_log = false;
};

int cmd_run(const RunArgs& args) {
  ScenarioConfig cfg = resolve_scenario(args.scenario);
  apply(args.overrides, cfg);
  if (!args.path.empty()) cfg = restrict_to_path(cfg, args.path);

  SimOptions opts;
  opts.log_radio = !args.no_radio_log;
  const Protocol protocol = parse_protocol(args.protocol);
  const EventTrace trace = run(cfg, protocol, args.seed, opts);
  const RunMetrics m = compute_metrics(trace, cfg);

  const fs::path out_dir{args.out_dir};
  const fs::path trace_path =
      args.trace_file.empty() ? out_dir / "trace.log" : fs::path(args.trace_file);
  const fs::path metrics_path = args.metrics_file.empty()
                                    ? out_dir / "run.csv"
                                    : fs::path(args.metrics_file);
  write_file(trace_path, serialize(trace, cfg.labels()));
  const std::string cell = cfg.active_path ? *cfg.active_path : "all";
  write_file(metrics_path, to_csv(rows_from_runs(args.protocol, cell, {m})));

  std::cout << cfg.name << " " << args.protocol << " seed " << args.seed
            << ": " << m.presses << " presses, " << m.delivered
            << " delivered, " << m.acked << " acked";
  if (m.has_e2e) std::cout << ", e2e " << format_ms(m.e2e_mean_s) << " ms";
  if (m.has_rtt) std::cout << ", rtt " << format_ms(m.rtt_mean_s) << " ms";
  std::cout << "\n";
  std::cout << "trace: " << trace_path.string()
            << "\nmetrics: " << metrics_path.string() << "\n";
  return 0;
}

struct CompareArgs {
  ScenarioArgs scenario;
  Overrides overrides;
  std::string seeds = "1..5";
  std::vector<std::string> paths;
  int jobs = 1;
  std::string out_dir = default_out_dir();
};

int cmd_compare(const CompareArgs& args) {
  ScenarioConfig cfg = resolve_scenario(args.scenario);
  apply(args.overrides, cfg);
  if (cfg.paths.empty())
    throw ScenarioError("scenario defines no paths to compare over");

  const auto [seed_lo, seed_hi] = parse_seed_range(args.seeds);
  CampaignSpec spec;
  spec.base = cfg;
  spec.paths = args.paths;
  spec.base_seed = seed_lo;
  spec.repeats = static_cast<int>(seed_hi - seed_lo + 1);
  spec.jobs = args.jobs;
  const CampaignResult result = run_campaign(spec);
  const TrendDelta delta = compare_protocols(result);

  std::vector<std::string> paths = spec.paths;
  if (paths.empty())
    for (const NamedPath& p : cfg.paths) paths.push_back(p.name);

  std::string text;
  text += "scenario " + cfg.name + ", seeds " + args.seeds + ", " +
          std::to_string(spec.repeats) + " repeat(s) per cell";
  if (spec.repeats == 1)
    text += "  [single repeat: stddev columns are zero by construction]";
  text += "\n\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %-20s %14s %12s %14s %12s\n",
                "path", "metric", "rdsp mean", "stddev", "uf mean", "stddev");
  text += line;
  for (const std::string& path : paths) {
    for (const char* metric : kMetricKeys) {
      const SummaryRow& a = find_row(result.rows, "rdsp", path, metric);
      const SummaryRow& b = find_row(result.rows, "uf", path, metric);
      std::snprintf(line, sizeof line, "%-10s %-20s %14.6g %12.4g %14.6g %12.4g\n",
                    path.c_str(), metric, a.mean, a.stddev, b.mean, b.stddev);
      text += line;
    }
  }
  std::snprintf(line, sizeof line,
                "\nrdsp against uf, pooled over %zu path(s):\n"
                "  end-to-end delay  %+.1f%%\n"
                "  round-trip delay  %+.1f%%\n"
                "  delivery ratio    %+.1f pp\n",
                paths.size(), -delta.e2e_reduction_pct,
                -delta.rtt_reduction_pct, delta.delivery_gain_pp);
  text += line;

  const fs::path out_dir{args.out_dir};
  write_file(out_dir / "comparison.csv", to_csv(result.rows));
  write_file(out_dir / "summary.txt", text);
  std::cout << text;
  std::cout << "\ncsv: " << (out_dir / "comparison.csv").string() << "\n";
  return 0;
}

struct DemoArgs {
  std::uint64_t seed = 1;
  std::string trace_file;
};

int cmd_trace_demo(const DemoArgs& args) {
  const ScenarioConfig cfg = builtin_twobranch();
  const auto result = run_simulation<RdspNode>(cfg, args.seed);
  const auto labels = cfg.labels();

  std::cout << "two-branch walkthrough, seed " << args.seed << "\n";
  std::cout << "converged dynamic IDs:\n";
  for (const char* branch : {"a", "b"}) {
    std::cout << "  " << (branch[0] == 'a' ? "short" : "long") << " branch:";
    for (const RdspNode& node : result.nodes) {
      const std::string& label = labels.at(node.id());
      if (label[0] != branch[0]) continue;
      std::cout << " " << label << "=" << node.state().dynamic_id.value;
    }
    std::cout << "\n";
  }

  std::optional<MessageId> exchange;
  double rtt = 0.0;
  bool have_rtt = false;
  for (const TraceRecord& r : result.trace.records) {
    if (r.action == TraceAction::Press && r.id) exchange = r.id;
    if (r.action == TraceAction::Rtt) {
      rtt = r.value;
      have_rtt = true;
    }
  }
  if (!exchange) throw std::runtime_error("demo run produced no request");
  std::cout << "request route: "
            << join(route_of(result.trace, labels, *exchange,
                             MessageKind::Request),
                    ",")
            << "\n";
  std::cout << "ack route: "
            << join(route_of(result.trace, labels, *exchange, MessageKind::Ack),
                    ",")
            << "\n";
  if (have_rtt) std::cout << "round trip: " << format_ms(rtt) << " ms\n";

  if (!args.trace_file.empty()) {
    write_file(args.trace_file, serialize(result.trace, labels));
    std::cout << "trace: " << args.trace_file << "\n";
  }
  return 0;
}

struct ExportArgs {
  ScenarioArgs scenario;
  std::string out_file;
};

int cmd_export(const ExportArgs& args) {
  const ScenarioConfig cfg = resolve_scenario(args.scenario);
  write_file(args.out_file, format_scenario(cfg));
  std::cout << "wrote " << args.out_file << " (" << cfg.nodes.size()
            << " nodes, " << cfg.paths.size() << " paths)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "deterministic simulator for button-to-operator relay networks"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run_cmd =
      app.add_subcommand("run", "simulate one protocol over one scenario");
  add_scenario_options(run_cmd, run_args.scenario);
  run_cmd->add_option("--protocol", run_args.protocol, "rdsp or uf")
      ->check(CLI::IsMember({"rdsp", "uf"}))
      ->capture_default_str();
  run_cmd->add_option("--seed", run_args.seed, "run seed")
      ->capture_default_str();
  run_cmd->add_option("--path", run_args.path,
                      "restrict the scenario to one named path");
  run_cmd->add_option("--out", run_args.out_dir,
                      "output directory (also via RDSP_OUT_DIR)")
      ->capture_default_str();
  run_cmd->add_option("--trace", run_args.trace_file,
                      "trace file path (default <out>/trace.log)");
  run_cmd->add_option("--metrics", run_args.metrics_file,
                      "metrics csv path (default <out>/run.csv)");
  run_cmd->add_flag("--no-radio-log", run_args.no_radio_log,
                    "omit per-frame send/recv records from the trace");
  add_override_options(run_cmd, run_args.overrides);

  CompareArgs cmp_args;
  CLI::App* cmp_cmd = app.add_subcommand(
      "compare", "protocol x path x seed campaign with aggregated results");
  add_scenario_options(cmp_cmd, cmp_args.scenario);
  cmp_cmd->add_option("--seeds", cmp_args.seeds, "seed range, N or A..B")
      ->capture_default_str();
  cmp_cmd->add_option("--paths", cmp_args.paths,
                      "paths to compare (default: all)")
      ->delimiter(',');
  cmp_cmd->add_option("--jobs", cmp_args.jobs, "worker threads")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  cmp_cmd->add_option("--out", cmp_args.out_dir,
                      "output directory (also via RDSP_OUT_DIR)")
      ->capture_default_str();
  add_override_options(cmp_cmd, cmp_args.overrides);

  DemoArgs demo_args;
  CLI::App* demo_cmd = app.add_subcommand(
      "trace-demo",
      "two-branch walkthrough: converged IDs and both message routes");
  demo_cmd->add_option("--seed", demo_args.seed, "run seed")
      ->capture_default_str();
  demo_cmd->add_option("--trace", demo_args.trace_file,
                       "also dump the full trace here");

  ExportArgs export_args;
  CLI::App* export_cmd = app.add_subcommand(
      "export-scenario", "write a scenario out as an editable file");
  add_scenario_options(export_cmd, export_args.scenario,
                       /*positional_file=*/false);
  export_cmd->add_option("output", export_args.out_file, "destination file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_args);
    if (cmp_cmd->parsed()) return cmd_compare(cmp_args);
    if (demo_cmd->parsed()) return cmd_trace_demo(demo_args);
    if (export_cmd->parsed()) return cmd_export(export_args);
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
