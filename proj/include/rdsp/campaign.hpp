#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rdsp/engine.hpp"
#include "rdsp/metrics.hpp"
#include "rdsp/scenario.hpp"

namespace rdsp {

struct CampaignSpec {
  ScenarioConfig base;
  std::vector<std::string> paths;  // defaults to every path in the scenario
  int repeats = 5;
  std::uint64_t base_seed = 1;
  int jobs = 1;
  bool log_radio = true;
};

struct CampaignResult {
  std::vector<SummaryRow> rows;  // fixed protocol x path x metric order
  std::map<std::pair<std::string, std::string>, std::vector<RunMetrics>> runs;

  const std::vector<RunMetrics>& runs_for(Protocol protocol,
                                          const std::string& path) const {
    auto it = runs.find({to_string(protocol), path});
    if (it == runs.end())
      throw std::out_of_range("campaign has no cell " +
                              std::string(to_string(protocol)) + "/" + path);
    return it->second;
  }
};

// Run the full protocol x path x seed grid. Tasks execute on up to `jobs`
// threads; results land in slots indexed by task id, so aggregation order
// (and the CSV) never depends on scheduling.
inline CampaignResult run_campaign(const CampaignSpec& spec) {
  if (spec.repeats < 1)
    throw std::invalid_argument("run_campaign: repeats must be >= 1");
  std::vector<std::string> paths = spec.paths;
  if (paths.empty())
    for (const NamedPath& p : spec.base.paths) paths.push_back(p.name);
  if (paths.empty())
    throw std::invalid_argument("run_campaign: scenario defines no paths");

  const Protocol protocols[] = {Protocol::Rdsp, Protocol::Uf};
  struct Task {
    Protocol protocol;
    std::size_t path_index;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (Protocol protocol : protocols)
    for (std::size_t pi = 0; pi < paths.size(); ++pi)
      for (int r = 0; r < spec.repeats; ++r)
        tasks.push_back(Task{protocol, pi, spec.base_seed + r});

  std::vector<ScenarioConfig> restricted;
  restricted.reserve(paths.size());
  for (const std::string& name : paths)
    restricted.push_back(restrict_to_path(spec.base, name));

  std::vector<RunMetrics> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        const Task& t = tasks[i];
        SimOptions opts;
        opts.log_radio = spec.log_radio;
        const ScenarioConfig& cfg = restricted[t.path_index];
        EventTrace trace = run(cfg, t.protocol, t.seed, opts);
        results[i] = compute_metrics(trace, cfg);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int jobs = spec.jobs < 1 ? 1 : spec.jobs;
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  CampaignResult out;
  std::size_t cursor = 0;
  for (Protocol protocol : protocols) {
    for (std::size_t pi = 0; pi < paths.size(); ++pi) {
      std::vector<RunMetrics> cell;
      for (int r = 0; r < spec.repeats; ++r) cell.push_back(results[cursor++]);
      append_rows(out.rows,
                  rows_from_runs(to_string(protocol), paths[pi], cell));
      out.runs[{to_string(protocol), paths[pi]}] = std::move(cell);
    }
  }
  return out;
}

// Relative improvement of the relay protocol over the baseline, pooled
// over per-run means across the given paths (all campaign paths if empty).
struct TrendDelta {
  double e2e_reduction_pct = 0.0;
  double rtt_reduction_pct = 0.0;
  double delivery_gain_pp = 0.0;
};

inline TrendDelta compare_protocols(const CampaignResult& result,
                                    std::vector<std::string> paths = {}) {
  if (paths.empty()) {
    for (const auto& [key, cell] : result.runs)
      if (key.first == to_string(Protocol::Rdsp)) paths.push_back(key.second);
  }
  if (paths.empty())
    throw std::invalid_argument("compare_protocols: no paths to compare");

  auto pool = [&](Protocol protocol) {
    std::vector<double> e2e, rtt, delivery;
    for (const std::string& p : paths)
      for (const RunMetrics& m : result.runs_for(protocol, p)) {
        if (m.has_e2e) e2e.push_back(m.e2e_mean_s);
        if (m.has_rtt) rtt.push_back(m.rtt_mean_s);
        delivery.push_back(m.delivery_ratio);
      }
    struct Pooled {
      Summary e2e, rtt, delivery;
    };
    return Pooled{summarize(e2e), summarize(rtt), summarize(delivery)};
  };
  const auto a = pool(Protocol::Rdsp);
  const auto b = pool(Protocol::Uf);
  if (a.e2e.count == 0 || b.e2e.count == 0 || a.rtt.count == 0 ||
      b.rtt.count == 0)
    throw std::runtime_error("compare_protocols: a protocol delivered nothing");

  TrendDelta d;
  d.e2e_reduction_pct = 100.0 * (b.e2e.mean - a.e2e.mean) / b.e2e.mean;
  d.rtt_reduction_pct = 100.0 * (b.rtt.mean - a.rtt.mean) / b.rtt.mean;
  d.delivery_gain_pp = 100.0 * (a.delivery.mean - b.delivery.mean);
  return d;
}

}  // namespace rdsp
