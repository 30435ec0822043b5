#ifndef GPCOV_BATCH_HPP
#define GPCOV_BATCH_HPP

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gpcov/sim.hpp"

namespace gpcov {

inline constexpr std::array<int, 4> kCostCheckpoints = {50, 100, 250, 500};

struct SummaryRow {
  std::string scenario;
  int n_agents = 0;
  std::uint64_t seed = 0;
  /// "gp" for the learning method, "lloyd" for the ground-truth baseline.
  std::string method;
  double beta = 0.0;
  int rounds = 0;
  double final_cost = 0.0;
  /// True cost after 50, 100, 250 and 500 rounds, when reached.
  std::array<std::optional<double>, kCostCheckpoints.size()> checkpoints;
  double wall_seconds = 0.0;
  std::string trace_file;
};

struct BatchSummary {
  std::vector<SummaryRow> rows;
};

/// Runs every config (plus its Lloyd baseline when requested), writes one
/// trace CSV per run into out_dir and returns the summary rows sorted by
/// (scenario, n_agents, seed). Throws on invalid configs or I/O failure.
BatchSummary run_batch(std::span<const SimConfig> configs, const std::filesystem::path &out_dir);

void write_summary_csv(std::ostream &out, const BatchSummary &summary);
void write_summary_csv(const std::filesystem::path &path, const BatchSummary &summary);

} // namespace gpcov

#endif // GPCOV_BATCH_HPP
