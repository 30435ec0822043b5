#include "gpcov/scenario.hpp"

namespace gpcov {

ScenarioKind parse_scenario_kind(std::string_view name) {
  if (name == "four_gaussians")
    return ScenarioKind::FourGaussians;
  if (name == "single_peak")
    return ScenarioKind::SinglePeak;
  if (name == "uniform")
    return ScenarioKind::Uniform;
  if (name == "hotspots")
    return ScenarioKind::Hotspots;
  if (name == "custom")
    return ScenarioKind::Custom;
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

std::string scenario_name(ScenarioKind kind) {
  switch (kind) {
  case ScenarioKind::FourGaussians:
    return "four_gaussians";
  case ScenarioKind::SinglePeak:
    return "single_peak";
  case ScenarioKind::Uniform:
    return "uniform";
  case ScenarioKind::Hotspots:
    return "hotspots";
  case ScenarioKind::Custom:
    return "custom";
  }
  throw ConfigError("unknown scenario kind");
}

AnalyticDensity scenario_density(const ScenarioSpec &spec, const Domain &domain) {
  const double w = domain.world_width();
  const double h = domain.world_height();
  const double s = spec.scale > 0.0 ? spec.scale : w / 960.0;
  AnalyticDensity d;
  switch (spec.kind) {
  case ScenarioKind::FourGaussians:
    // Covariance 100 I on the 960x540 grid: sigma = 10 px per axis.
    for (const Point &c : {Point(100, 100), Point(850, 450), Point(100, 450), Point(850, 100)})
      d.bumps.push_back({s * c, s * 10.0, 1.0});
    break;
  case ScenarioKind::SinglePeak:
    d.bumps.push_back({Point(0.5 * w, 0.5 * h), s * 80.0, 150.0});
    break;
  case ScenarioKind::Uniform:
    d.background = 1.0;
    break;
  case ScenarioKind::Hotspots:
    d.bumps.push_back({Point(0.2 * w, 0.3 * h), s * 80.0, 150.0});
    d.bumps.push_back({Point(0.8 * w, 0.7 * h), s * 120.0, 150.0});
    d.bumps.push_back({Point(0.6 * w, 0.2 * h), s * 60.0, 150.0});
    d.background = 20.0;
    break;
  case ScenarioKind::Custom:
    d = spec.custom;
    break;
  }
  return d;
}

DensityField build_scenario(const ScenarioSpec &spec, const Domain &domain) {
  return DensityField(domain, scenario_density(spec, domain));
}

} // namespace gpcov
