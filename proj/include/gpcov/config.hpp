#ifndef GPCOV_CONFIG_HPP
#define GPCOV_CONFIG_HPP

// Experiment configuration files (JSON) and the CSV outputs: per-round
// traces and density grids. All numeric output is locale-independent and
// uses the shortest round-trip decimal form.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpcov/density.hpp"
#include "gpcov/sim.hpp"

namespace gpcov {

/// Overlays the keys present in `j` onto `base`. Unknown keys are rejected.
SimConfig config_from_json(const nlohmann::json &j, SimConfig base = {});
nlohmann::json config_to_json(const SimConfig &config);

/// A config file may carry "seeds": [...]; it then expands to one config per
/// seed, in the listed order.
std::vector<SimConfig> load_configs(const std::filesystem::path &path);

std::string format_double(double v);

/// Header: step,true_cost,rmse,messages,agent0_x,agent0_y,...
std::string trace_header(int n_agents);
void write_trace_csv(std::ostream &out, const SimTrace &trace);
void write_trace_csv(const std::filesystem::path &path, const SimTrace &trace);

/// One CSV row per grid row (y ascending), one column per pixel.
void write_density_csv(std::ostream &out, const DensityField &field);

} // namespace gpcov

#endif // GPCOV_CONFIG_HPP
