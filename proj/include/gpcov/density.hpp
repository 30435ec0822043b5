#ifndef GPCOV_DENSITY_HPP
#define GPCOV_DENSITY_HPP

#include <optional>
#include <random>
#include <vector>

#include "gpcov/common.hpp"
#include "gpcov/geometry.hpp"

namespace gpcov {

struct GaussianBump {
  Point center;
  double sigma;
  double amplitude;
};

/// Sum of isotropic Gaussians over a constant background.
struct AnalyticDensity {
  std::vector<GaussianBump> bumps;
  double background = 0.0;

  double operator()(const Point &x) const;
};

/// Ground-truth density sampled at pixel centers. Values are non-negative.
class DensityField {
public:
  DensityField() = default;
  DensityField(Domain domain, std::vector<double> values);
  DensityField(Domain domain, const AnalyticDensity &analytic);

  const Domain &domain() const { return domain_; }
  const std::vector<double> &values() const { return values_; }
  const std::optional<AnalyticDensity> &analytic() const { return analytic_; }

  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * domain_.width + x]; }
  double max() const;

  /// Bilinear interpolation between pixel centers; positions within half a
  /// pixel of the border use the border values.
  double interpolate(const Point &p) const;

private:
  Domain domain_;
  std::vector<double> values_;
  std::optional<AnalyticDensity> analytic_;
};

/// Noisy measurement y = phi(p) + e, e ~ N(0, noise_sigma^2).
double sample_density(const DensityField &field, const Point &p, double noise_sigma, std::mt19937_64 &rng);

} // namespace gpcov

#endif // GPCOV_DENSITY_HPP
