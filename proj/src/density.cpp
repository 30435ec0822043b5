#include "gpcov/density.hpp"

#include <algorithm>
#include <cmath>

namespace gpcov {

double AnalyticDensity::operator()(const Point &x) const {
  double v = background;
  for (const auto &b : bumps)
    v += b.amplitude * std::exp(-(x - b.center).squaredNorm() / (2.0 * b.sigma * b.sigma));
  return v;
}

DensityField::DensityField(Domain domain, std::vector<double> values)
    : domain_(domain), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != domain_.pixel_count())
    throw ConfigError("DensityField: value count does not match domain");
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConfigError("DensityField: values must be finite and non-negative");
  }
}

DensityField::DensityField(Domain domain, const AnalyticDensity &analytic)
    : domain_(domain), analytic_(analytic) {
  if (analytic.background < 0.0)
    throw ConfigError("DensityField: negative background");
  for (const auto &b : analytic.bumps) {
    if (!(b.sigma > 0.0) || !(b.amplitude >= 0.0))
      throw ConfigError("DensityField: bumps need positive sigma and non-negative amplitude");
  }
  values_.resize(domain_.pixel_count());
  for (int i = 0; i < domain_.pixel_count(); ++i)
    values_[i] = analytic(domain_.center(i));
}

double DensityField::max() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double DensityField::interpolate(const Point &p) const {
  const double u = std::clamp(p.x() / domain_.cell_size - 0.5, 0.0, domain_.width - 1.0);
  const double v = std::clamp(p.y() / domain_.cell_size - 0.5, 0.0, domain_.height - 1.0);
  const int x0 = static_cast<int>(std::floor(u));
  const int y0 = static_cast<int>(std::floor(v));
  const int x1 = std::min(x0 + 1, domain_.width - 1);
  const int y1 = std::min(y0 + 1, domain_.height - 1);
  const double fx = u - x0;
  const double fy = v - y0;
  const double bottom = (1.0 - fx) * at(x0, y0) + fx * at(x1, y0);
  const double top = (1.0 - fx) * at(x0, y1) + fx * at(x1, y1);
  return (1.0 - fy) * bottom + fy * top;
}

double sample_density(const DensityField &field, const Point &p, double noise_sigma, std::mt19937_64 &rng) {
  if (!field.domain().contains(p))
    throw DomainError("sample_density: position outside domain");
  const double phi = field.interpolate(p);
  if (noise_sigma <= 0.0)
    return phi;
  std::normal_distribution<double> noise(0.0, noise_sigma);
  return phi + noise(rng);
}

} // namespace gpcov
