// gpcov: run coverage simulations, batches of them, or dump scenario fields.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "gpcov/batch.hpp"
#include "gpcov/config.hpp"
#include "gpcov/scenario.hpp"
#include "gpcov/sim.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> rounds;
  std::optional<int> agents;
  std::optional<double> beta;

  void apply(gpcov::SimConfig &c) const {
    if (seed)
      c.seed = *seed;
    if (rounds)
      c.rounds = *rounds;
    if (agents) {
      c.n_agents = *agents;
      if (c.init.kind == gpcov::InitKind::Explicit)
        c.init.kind = gpcov::InitKind::UniformRandom;
    }
    if (beta)
      c.quadrature.beta = *beta;
  }
};

void add_overrides(CLI::App *cmd, Overrides &o) {
  cmd->add_option("--seed", o.seed, "Master RNG seed");
  cmd->add_option("--rounds", o.rounds, "Number of rounds");
  cmd->add_option("--agents", o.agents, "Number of agents");
  cmd->add_option("--beta", o.beta, "Exploration weight");
}

int cmd_run(const std::optional<std::string> &config_path, const Overrides &o, const std::string &out,
            bool baseline) {
  std::vector<gpcov::SimConfig> configs =
      config_path ? gpcov::load_configs(*config_path) : std::vector<gpcov::SimConfig>{gpcov::SimConfig{}};
  gpcov::SimConfig c = configs.front();
  o.apply(c);
  c.baseline = c.baseline || baseline;
  c.validate();

  const fs::path out_path(out);
  gpcov::write_trace_csv(out_path, gpcov::run(c));
  std::cerr << "wrote " << out_path.string() << '\n';
  if (c.baseline) {
    fs::path lloyd = out_path;
    lloyd.replace_filename(out_path.stem().string() + "_lloyd" + out_path.extension().string());
    gpcov::write_trace_csv(lloyd, gpcov::run_lloyd_baseline(c));
    std::cerr << "wrote " << lloyd.string() << '\n';
  }
  return 0;
}

int cmd_batch(const std::string &dir, const Overrides &o, const std::string &out) {
  if (!fs::is_directory(dir))
    throw gpcov::ConfigError("config directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<gpcov::SimConfig> configs;
  for (const auto &f : files) {
    for (auto c : gpcov::load_configs(f)) {
      o.apply(c);
      configs.push_back(c);
    }
  }
  const gpcov::BatchSummary summary = gpcov::run_batch(configs, out);
  gpcov::write_summary_csv(fs::path(out) / "summary.csv", summary);
  std::cerr << "ran " << summary.rows.size() << " runs; summary in " << (fs::path(out) / "summary.csv").string()
            << '\n';
  return 0;
}

int cmd_dump(const std::optional<std::string> &config_path, const std::optional<std::string> &scenario,
             std::optional<int> width, std::optional<int> height, const std::string &out) {
  gpcov::SimConfig c = config_path ? gpcov::load_configs(*config_path).front() : gpcov::SimConfig{};
  if (scenario)
    c.scenario.kind = gpcov::parse_scenario_kind(*scenario);
  if (width || height)
    c.domain = gpcov::Domain(width.value_or(c.domain.width), height.value_or(c.domain.height), c.domain.cell_size);
  const gpcov::DensityField field = gpcov::build_scenario(c.scenario, c.domain);
  std::ofstream file(out, std::ios::binary);
  if (!file)
    throw std::runtime_error("cannot write " + out);
  gpcov::write_density_csv(file, field);
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Decentralized GP-UCB coverage control simulator"};
  app.require_subcommand(1);

  Overrides run_over;
  std::optional<std::string> run_config;
  std::string run_out = "trace.csv";
  bool run_baseline = false;
  CLI::App *run = app.add_subcommand("run", "Run a single configuration and write its trace CSV");
  run->add_option("--config", run_config, "JSON config file (defaults are used when omitted)");
  run->add_option("--out", run_out, "Trace CSV path");
  run->add_flag("--baseline", run_baseline, "Also run the ground-truth Lloyd baseline");
  add_overrides(run, run_over);

  Overrides batch_over;
  std::string batch_dir;
  std::string batch_out = "results";
  CLI::App *batch = app.add_subcommand("batch", "Run every *.json config in a directory");
  batch->add_option("--dir", batch_dir, "Directory of JSON configs")->required();
  batch->add_option("--out", batch_out, "Output directory for traces and summary.csv");
  add_overrides(batch, batch_over);

  std::optional<std::string> dump_config, dump_scenario;
  std::optional<int> dump_w, dump_h;
  std::string dump_out = "density.csv";
  CLI::App *dump = app.add_subcommand("scenario-dump", "Write a scenario density grid as CSV");
  dump->add_option("--config", dump_config, "JSON config file");
  dump->add_option("--scenario", dump_scenario, "four_gaussians | single_peak | uniform | hotspots");
  dump->add_option("--width", dump_w, "Grid width in pixels");
  dump->add_option("--height", dump_h, "Grid height in pixels");
  dump->add_option("--out", dump_out, "Output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run)
      return cmd_run(run_config, run_over, run_out, run_baseline);
    if (*batch)
      return cmd_batch(batch_dir, batch_over, batch_out);
    if (*dump)
      return cmd_dump(dump_config, dump_scenario, dump_w, dump_h, dump_out);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
