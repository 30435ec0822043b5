#ifndef GPCOV_COST_HPP
#define GPCOV_COST_HPP

// Per-cell coverage cost under a GP density estimate: expected locational
// cost plus sqrt(beta) times the standard deviation of that cost, with
// analytic gradients in the agent position. Integrals are grid quadratures
// over the agent's Voronoi cell; the partition is held fixed when
// differentiating.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gpcov/common.hpp"
#include "gpcov/geometry.hpp"
#include "gpcov/gp.hpp"

namespace gpcov {

struct QuadratureSpec {
  /// Block size for the single integrals (1 = every pixel).
  int single_stride = 1;
  /// Maximum node count for the double integral.
  int pair_budget = 256;
  /// Exploration weight.
  double beta = 2.0;

  void validate() const {
    if (single_stride < 1)
      throw ConfigError("single_stride must be at least 1");
    if (pair_budget < 4)
      throw ConfigError("pair_budget must be at least 4");
    if (!(beta >= 0.0))
      throw ConfigError("beta must be non-negative");
  }
};

template <typename Scalar> struct Quadrature {
  Points2<Scalar> points;
  Vector<Scalar> weights;

  Eigen::Index size() const { return points.cols(); }
  Scalar area() const { return weights.sum(); }
};

/// Stratified quadrature over a cell: the grid is tiled into block x block
/// squares anchored at the origin; every square touching the cell contributes
/// one node at its cell pixel nearest the square's center, weighted by the
/// area of the cell inside the square. block = 1 reproduces the full grid.
template <typename Scalar>
Quadrature<Scalar> block_quadrature(std::span<const int> cell, const Domain &domain, int block) {
  if (block < 1)
    throw ConfigError("block_quadrature: block must be at least 1");
  Quadrature<Scalar> q;
  if (cell.empty()) {
    q.points.resize(2, 0);
    q.weights.resize(0);
    return q;
  }
  if (block == 1) {
    q.points.resize(2, static_cast<Eigen::Index>(cell.size()));
    q.weights = Vector<Scalar>::Constant(static_cast<Eigen::Index>(cell.size()),
                                         static_cast<Scalar>(domain.pixel_area()));
    for (std::size_t i = 0; i < cell.size(); ++i)
      q.points.col(static_cast<Eigen::Index>(i)) = domain.center(cell[i]).template cast<Scalar>();
    return q;
  }

  struct Slot {
    long key;
    int pixel;
    double d2;
    int count;
  };
  const long blocks_x = (domain.width + block - 1) / block;
  const double half = 0.5 * (block - 1);
  std::vector<Slot> slots;
  slots.reserve(cell.size() / (block * block) + 16);
  std::vector<std::pair<long, int>> keyed;
  keyed.reserve(cell.size());
  for (int idx : cell) {
    const int x = domain.pixel_x(idx);
    const int y = domain.pixel_y(idx);
    keyed.emplace_back(static_cast<long>(y / block) * blocks_x + x / block, idx);
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto &a, const auto &b) { return a.first < b.first; });
  for (const auto &[key, idx] : keyed) {
    const long bx = key % blocks_x;
    const long by = key / blocks_x;
    const double dx = domain.pixel_x(idx) - (bx * block + half);
    const double dy = domain.pixel_y(idx) - (by * block + half);
    const double d2 = dx * dx + dy * dy;
    if (slots.empty() || slots.back().key != key) {
      slots.push_back({key, idx, d2, 1});
    } else {
      Slot &s = slots.back();
      ++s.count;
      if (d2 < s.d2 || (d2 == s.d2 && idx < s.pixel)) {
        s.pixel = idx;
        s.d2 = d2;
      }
    }
  }
  q.points.resize(2, static_cast<Eigen::Index>(slots.size()));
  q.weights.resize(static_cast<Eigen::Index>(slots.size()));
  for (std::size_t i = 0; i < slots.size(); ++i) {
    q.points.col(static_cast<Eigen::Index>(i)) = domain.center(slots[i].pixel).template cast<Scalar>();
    q.weights(static_cast<Eigen::Index>(i)) =
        static_cast<Scalar>(slots[i].count * domain.pixel_area());
  }
  return q;
}

/// Block quadrature with the smallest block size yielding at most
/// `max_nodes` nodes.
template <typename Scalar>
Quadrature<Scalar> budget_quadrature(std::span<const int> cell, const Domain &domain, int max_nodes) {
  if (max_nodes < 1)
    throw ConfigError("budget_quadrature: max_nodes must be positive");
  if (static_cast<long>(cell.size()) <= max_nodes)
    return block_quadrature<Scalar>(cell, domain, 1);
  int block = std::max(2, static_cast<int>(std::sqrt(static_cast<double>(cell.size()) / max_nodes)));
  for (;; ++block) {
    Quadrature<Scalar> q = block_quadrature<Scalar>(cell, domain, block);
    if (q.size() <= max_nodes)
      return q;
  }
}

template <typename Scalar> struct MassCentroid {
  Scalar mass;
  Point2<Scalar> centroid;
};

/// Mass and centroid of the non-negative weights `density` over the nodes;
/// falls back to the unweighted node center when the mass is below 1e-12.
template <typename Scalar>
MassCentroid<Scalar> mass_centroid(const Quadrature<Scalar> &nodes, const Vector<Scalar> &density) {
  const Vector<Scalar> mw = density.cwiseProduct(nodes.weights);
  const Scalar mass = mw.sum();
  if (!(mass >= Scalar(1e-12))) {
    Point2<Scalar> center = Point2<Scalar>::Zero();
    if (nodes.size() > 0)
      center = (nodes.points * nodes.weights) / nodes.weights.sum();
    return {std::max(mass, Scalar(0)), center};
  }
  return {mass, (nodes.points * mw) / mass};
}

/// Mass and centroid of a per-pixel field (indexed like Domain pixels) over
/// the given cell pixels. Negative field values are clamped to zero.
inline MassCentroid<double> mass_centroid(std::span<const int> cell, std::span<const double> field,
                                          const Domain &domain) {
  const Quadrature<double> nodes = block_quadrature<double>(cell, domain, 1);
  Vector<double> values(nodes.size());
  for (std::size_t i = 0; i < cell.size(); ++i)
    values(static_cast<Eigen::Index>(i)) = std::max(field[cell[i]], 0.0);
  return mass_centroid(nodes, values);
}

/// Sum over agents of the grid integral of 0.5 |q - p_i|^2 phi(q) over V_i.
inline double true_locational_cost(std::span<const Point> positions, const VoronoiPartition &partition,
                                   std::span<const double> density, const Domain &domain) {
  double total = 0.0;
  for (std::size_t i = 0; i < partition.cells.size(); ++i) {
    double cell_sum = 0.0;
    for (int idx : partition.cells[i])
      cell_sum += 0.5 * (domain.center(idx) - positions[i]).squaredNorm() * density[idx];
    total += cell_sum * domain.pixel_area();
  }
  return total;
}

template <typename Scalar> struct ExpectedCost {
  Scalar value;
  Vector2<Scalar> gradient;
};

/// Expected cost from a precomputed clamped mean at the nodes.
template <typename Scalar>
ExpectedCost<Scalar> expected_cost_from_mean(const Quadrature<Scalar> &nodes, const Point2<Scalar> &agent,
                                             const Vector<Scalar> &clamped_mean) {
  const Points2<Scalar> diff = nodes.points.colwise() - agent;
  const Vector<Scalar> mw = clamped_mean.cwiseProduct(nodes.weights);
  const Vector<Scalar> half_d2 = Scalar(0.5) * diff.colwise().squaredNorm().transpose();
  return {half_d2.dot(mw), -(diff * mw)};
}

template <typename Scalar>
ExpectedCost<Scalar> expected_cost(const Quadrature<Scalar> &nodes, const Point2<Scalar> &agent,
                                   const SparseGP<Scalar> &gp) {
  return expected_cost_from_mean(nodes, agent, Vector<Scalar>(gp.mean(nodes.points).cwiseMax(Scalar(0))));
}

template <typename Scalar> struct VarianceCost {
  /// Quadrature variance before clamping at zero.
  Scalar variance;
  Scalar std;
  Vector2<Scalar> gradient;
};

/// Variance of the cell cost from a precomputed posterior covariance over
/// the nodes; the gradient is the exact derivative of the quadrature sum.
template <typename Scalar>
VarianceCost<Scalar> variance_cost_from_covariance(const Quadrature<Scalar> &nodes,
                                                   const Point2<Scalar> &agent,
                                                   const Matrix<Scalar> &covariance) {
  const Points2<Scalar> diff = nodes.points.colwise() - agent;
  const Vector<Scalar> d2w = diff.colwise().squaredNorm().transpose().cwiseProduct(nodes.weights);
  const Vector<Scalar> u = covariance * d2w;
  VarianceCost<Scalar> out;
  out.variance = Scalar(0.25) * d2w.dot(u);
  out.std = std::sqrt(std::max(out.variance, Scalar(0)));
  if (out.std < Scalar(1e-9)) {
    out.gradient.setZero();
    return out;
  }
  // d Var / dp = -sum_q (q - p) w_q u_q, and d std = d Var / (2 std).
  const Vector2<Scalar> grad_var = -(diff * u.cwiseProduct(nodes.weights));
  out.gradient = grad_var / (Scalar(2) * out.std);
  return out;
}

template <typename Scalar>
VarianceCost<Scalar> variance_cost(const Quadrature<Scalar> &nodes, const Point2<Scalar> &agent,
                                   const SparseGP<Scalar> &gp) {
  return variance_cost_from_covariance(nodes, agent, gp.covariance(nodes.points));
}

template <typename Scalar> struct CellCostReport {
  Scalar expected;
  Scalar std;
  Scalar total;
  Vector2<Scalar> grad_expected;
  Vector2<Scalar> grad_std;
  Scalar mass;
  Point2<Scalar> centroid;

  Vector2<Scalar> gradient(Scalar beta) const { return grad_expected + std::sqrt(beta) * grad_std; }
};

/// Cost report for one agent whose quadrature nodes were already built.
template <typename Scalar>
CellCostReport<Scalar> cell_cost_report(const Quadrature<Scalar> &single, const Quadrature<Scalar> &pair,
                                        const Point2<Scalar> &agent, const SparseGP<Scalar> &gp,
                                        Scalar beta) {
  const Vector<Scalar> clamped = gp.mean(single.points).cwiseMax(Scalar(0));
  const ExpectedCost<Scalar> e = expected_cost_from_mean(single, agent, clamped);
  const VarianceCost<Scalar> v = variance_cost(pair, agent, gp);
  const MassCentroid<Scalar> mc = mass_centroid(single, clamped);
  CellCostReport<Scalar> r;
  r.expected = e.value;
  r.std = v.std;
  r.total = e.value + std::sqrt(beta) * v.std;
  r.grad_expected = e.gradient;
  r.grad_std = v.gradient;
  r.mass = mc.mass;
  r.centroid = mc.centroid;
  return r;
}

template <typename Scalar>
CellCostReport<Scalar> cell_cost_report(std::span<const int> cell, const Point2<Scalar> &agent,
                                        const SparseGP<Scalar> &gp, const QuadratureSpec &quad,
                                        const Domain &domain) {
  quad.validate();
  return cell_cost_report(block_quadrature<Scalar>(cell, domain, quad.single_stride),
                          budget_quadrature<Scalar>(cell, domain, quad.pair_budget), agent, gp,
                          static_cast<Scalar>(quad.beta));
}

} // namespace gpcov

#endif // GPCOV_COST_HPP
