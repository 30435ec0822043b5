#ifndef GPCOV_SCENARIO_HPP
#define GPCOV_SCENARIO_HPP

#include <string>
#include <string_view>

#include "gpcov/density.hpp"
#include "gpcov/geometry.hpp"

namespace gpcov {

enum class ScenarioKind { FourGaussians, SinglePeak, Uniform, Hotspots, Custom };

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::FourGaussians;
  /// Factor applied to the canonical 960x540 centers and spreads; a value
  /// <= 0 means world width / 960.
  double scale = 0.0;
  /// Used only by Custom.
  AnalyticDensity custom;
};

ScenarioKind parse_scenario_kind(std::string_view name);
std::string scenario_name(ScenarioKind kind);

/// Closed-form descriptor of a scenario on the given domain.
AnalyticDensity scenario_density(const ScenarioSpec &spec, const Domain &domain);

DensityField build_scenario(const ScenarioSpec &spec, const Domain &domain);

} // namespace gpcov

#endif // GPCOV_SCENARIO_HPP
