#include "gpcov/batch.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "gpcov/config.hpp"

namespace gpcov {

namespace {

SummaryRow summarize(const SimConfig &c, const SimTrace &trace, const std::string &method, double seconds,
                     const std::string &file) {
  SummaryRow row;
  row.scenario = scenario_name(c.scenario.kind);
  row.n_agents = c.n_agents;
  row.seed = c.seed;
  row.method = method;
  row.beta = c.quadrature.beta;
  row.rounds = c.rounds;
  row.final_cost = trace.rows.empty() ? 0.0 : trace.rows.back().true_cost;
  for (std::size_t k = 0; k < kCostCheckpoints.size(); ++k) {
    const int after = kCostCheckpoints[k];
    if (after <= static_cast<int>(trace.rows.size()))
      row.checkpoints[k] = trace.rows[after - 1].true_cost;
  }
  row.wall_seconds = seconds;
  row.trace_file = file;
  return row;
}

std::string trace_name(std::size_t index, const SimConfig &c, const char *method) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "run%03zu_%s_n%d_seed%llu_%s.csv", index, scenario_name(c.scenario.kind).c_str(),
                c.n_agents, static_cast<unsigned long long>(c.seed), method);
  return buf;
}

} // namespace

BatchSummary run_batch(std::span<const SimConfig> configs, const std::filesystem::path &out_dir) {
  for (const auto &c : configs)
    c.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw std::runtime_error("cannot create output directory " + out_dir.string());

  BatchSummary summary;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const SimConfig &c = configs[i];
    {
      const auto start = std::chrono::steady_clock::now();
      const SimTrace trace = run(c);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const std::string name = trace_name(i, c, "gp");
      write_trace_csv(out_dir / name, trace);
      summary.rows.push_back(summarize(c, trace, "gp", secs, name));
    }
    if (c.baseline) {
      const auto start = std::chrono::steady_clock::now();
      const SimTrace trace = run_lloyd_baseline(c);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const std::string name = trace_name(i, c, "lloyd");
      write_trace_csv(out_dir / name, trace);
      summary.rows.push_back(summarize(c, trace, "lloyd", secs, name));
    }
  }
  std::stable_sort(summary.rows.begin(), summary.rows.end(), [](const SummaryRow &a, const SummaryRow &b) {
    return std::tie(a.scenario, a.n_agents, a.seed) < std::tie(b.scenario, b.n_agents, b.seed);
  });
  return summary;
}

void write_summary_csv(std::ostream &out, const BatchSummary &summary) {
  out << "scenario,n_agents,seed,method,beta,rounds,final_cost";
  for (int c : kCostCheckpoints)
    out << ",cost_" << c;
  out << ",wall_seconds,trace\n";
  for (const auto &r : summary.rows) {
    std::string line = r.scenario + ',' + std::to_string(r.n_agents) + ',' + std::to_string(r.seed) + ',' +
                       r.method + ',' + format_double(r.beta) + ',' + std::to_string(r.rounds) + ',' +
                       format_double(r.final_cost);
    for (const auto &cp : r.checkpoints)
      line += ',' + (cp ? format_double(*cp) : std::string());
    line += ',' + format_double(r.wall_seconds) + ',' + r.trace_file;
    out << line << '\n';
  }
}

void write_summary_csv(const std::filesystem::path &path, const BatchSummary &summary) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  write_summary_csv(out, summary);
}

} // namespace gpcov
