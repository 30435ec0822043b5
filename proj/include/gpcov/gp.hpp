#ifndef GPCOV_GP_HPP
#define GPCOV_GP_HPP

// Squared-exponential Gaussian process conditioned on a small set of
// inducing samples, plus the greedy variance-maximizing selection that keeps
// that set bounded.

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "gpcov/common.hpp"

namespace gpcov {

template <typename Scalar> struct Hyperparams {
  Scalar lengthscale = Scalar(1);
  Scalar signal_variance = Scalar(1);
  Scalar noise_variance = Scalar(0);
  Scalar prior_mean = Scalar(0);

  void validate() const {
    if (!(lengthscale > Scalar(0)) || !std::isfinite(lengthscale))
      throw ConfigError("lengthscale must be positive");
    if (!(signal_variance > Scalar(0)) || !std::isfinite(signal_variance))
      throw ConfigError("signal_variance must be positive");
    if (!(noise_variance >= Scalar(0)) || !std::isfinite(noise_variance))
      throw ConfigError("noise_variance must be non-negative");
    if (!std::isfinite(prior_mean))
      throw ConfigError("prior_mean must be finite");
  }

  /// Diagonal jitter added to every gram matrix before inversion.
  Scalar jitter() const { return Scalar(1e-8) * signal_variance; }
  /// Total diagonal term of the regularized gram: noise plus jitter.
  Scalar diagonal_term() const { return noise_variance + jitter(); }

  bool operator==(const Hyperparams &) const = default;
};

template <typename Scalar> struct Sample {
  Point2<Scalar> point;
  Scalar value;

  bool operator==(const Sample &other) const {
    return point == other.point && value == other.value;
  }
};

template <typename Scalar> using SampleList = std::vector<Sample<Scalar>>;

/// Measurements collected since the last model refresh.
template <typename Scalar> struct SampleBuffer {
  SampleList<Scalar> entries;

  void append(const Point2<Scalar> &p, Scalar y) { entries.push_back({p, y}); }
  void clear() { entries.clear(); }
  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

template <typename Scalar>
Points2<Scalar> points_of(std::span<const Sample<Scalar>> samples) {
  Points2<Scalar> pts(2, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i)
    pts.col(static_cast<Eigen::Index>(i)) = samples[i].point;
  return pts;
}

template <typename Scalar>
Vector<Scalar> values_of(std::span<const Sample<Scalar>> samples) {
  Vector<Scalar> y(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i)
    y(static_cast<Eigen::Index>(i)) = samples[i].value;
  return y;
}

/// k(a, b) = s * exp(-|a - b|^2 / (2 l^2)).
template <typename Scalar>
Scalar kernel(const Point2<Scalar> &a, const Point2<Scalar> &b, const Hyperparams<Scalar> &hyper) {
  const Scalar d2 = (a - b).squaredNorm();
  return hyper.signal_variance * std::exp(-d2 / (Scalar(2) * hyper.lengthscale * hyper.lengthscale));
}

template <typename Scalar>
Matrix<Scalar> cross_kernel(const Points2<Scalar> &a, const Points2<Scalar> &b,
                            const Hyperparams<Scalar> &hyper) {
  const Scalar neg_inv_two_l2 = Scalar(-1) / (Scalar(2) * hyper.lengthscale * hyper.lengthscale);
  Matrix<Scalar> k(a.cols(), b.cols());
  const auto ax = a.row(0).transpose().array();
  const auto ay = a.row(1).transpose().array();
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    k.col(j) = ((ax - b(0, j)).square() + (ay - b(1, j)).square()) * neg_inv_two_l2;
  k = hyper.signal_variance * k.array().exp();
  return k;
}

/// K_ZZ + (noise + jitter) I.
template <typename Scalar>
Matrix<Scalar> regularized_gram(const Points2<Scalar> &z, const Hyperparams<Scalar> &hyper) {
  Matrix<Scalar> g = cross_kernel(z, z, hyper);
  g.diagonal().array() += hyper.diagonal_term();
  return g;
}

template <typename Scalar> struct Posterior {
  Vector<Scalar> mean;
  Matrix<Scalar> covariance;
};

/// Subset-of-data sparse GP: exact conditioning on the inducing samples only.
/// Immutable once built; a refresh constructs a new value.
template <typename Scalar> class SparseGP {
public:
  SparseGP() : SparseGP(Hyperparams<Scalar>{}, {}) {}

  SparseGP(const Hyperparams<Scalar> &hyper, SampleList<Scalar> inducing)
      : hyper_(hyper), inducing_(std::move(inducing)) {
    hyper_.validate();
    points_ = points_of<Scalar>(inducing_);
    const Eigen::Index m = points_.cols();
    inv_gram_ = Matrix<Scalar>::Identity(m, m);
    if (m > 0) {
      Eigen::LLT<Matrix<Scalar>> llt(regularized_gram(points_, hyper_));
      if (llt.info() != Eigen::Success)
        throw SingularityError("SparseGP: regularized gram is not positive definite");
      llt.solveInPlace(inv_gram_);
    }
    cache_weights();
  }

  /// Adopts a precomputed inverse of the regularized gram (e.g. from the
  /// incremental updates of greedy selection).
  SparseGP(const Hyperparams<Scalar> &hyper, SampleList<Scalar> inducing, Matrix<Scalar> inv_gram)
      : hyper_(hyper), inducing_(std::move(inducing)), inv_gram_(std::move(inv_gram)) {
    hyper_.validate();
    points_ = points_of<Scalar>(inducing_);
    if (inv_gram_.rows() != points_.cols() || inv_gram_.cols() != points_.cols())
      throw InvariantError("SparseGP: inverse gram size does not match inducing set");
    cache_weights();
  }

  const Hyperparams<Scalar> &hyper() const { return hyper_; }
  const SampleList<Scalar> &inducing() const { return inducing_; }
  const Points2<Scalar> &inducing_points() const { return points_; }
  const Matrix<Scalar> &inv_gram() const { return inv_gram_; }
  std::size_t size() const { return inducing_.size(); }
  bool empty() const { return inducing_.empty(); }

  Vector<Scalar> mean(const Points2<Scalar> &query) const {
    Vector<Scalar> mu = Vector<Scalar>::Constant(query.cols(), hyper_.prior_mean);
    if (!empty())
      mu.noalias() += cross_kernel(query, points_, hyper_) * weights_;
    return mu;
  }

  Scalar mean(const Point2<Scalar> &q) const {
    Points2<Scalar> one(2, 1);
    one.col(0) = q;
    return mean(one)(0);
  }

  /// Pointwise posterior variance (diagonal of the covariance).
  Vector<Scalar> variance(const Points2<Scalar> &query) const {
    Vector<Scalar> var = Vector<Scalar>::Constant(query.cols(), hyper_.signal_variance);
    if (!empty()) {
      const Matrix<Scalar> kqz = cross_kernel(query, points_, hyper_);
      var -= ((kqz * inv_gram_).cwiseProduct(kqz)).rowwise().sum();
    }
    return var;
  }

  Matrix<Scalar> covariance(const Points2<Scalar> &query) const {
    Matrix<Scalar> cov = cross_kernel(query, query, hyper_);
    if (!empty()) {
      const Matrix<Scalar> kqz = cross_kernel(query, points_, hyper_);
      cov.noalias() -= kqz * (inv_gram_ * kqz.transpose());
      cov = Scalar(0.5) * (cov + cov.transpose()).eval();
    }
    return cov;
  }

  Posterior<Scalar> posterior(const Points2<Scalar> &query) const {
    return {mean(query), covariance(query)};
  }

  /// Frobenius norm of inv_gram * (K_ZZ + (noise + jitter) I) - I.
  Scalar inverse_residual() const {
    const Eigen::Index m = points_.cols();
    if (m == 0)
      return Scalar(0);
    return (inv_gram_ * regularized_gram(points_, hyper_) - Matrix<Scalar>::Identity(m, m)).norm();
  }

private:
  void cache_weights() {
    const Vector<Scalar> centered =
        values_of<Scalar>(inducing_).array() - hyper_.prior_mean;
    weights_ = inv_gram_ * centered;
  }

  Hyperparams<Scalar> hyper_;
  SampleList<Scalar> inducing_;
  Points2<Scalar> points_;
  Matrix<Scalar> inv_gram_;
  Vector<Scalar> weights_;
};

/// Block-inverse (Sherman-Morrison-Woodbury) extension of the regularized
/// gram inverse by one point, O(m^2). Throws SingularityError when the new
/// Schur complement is at the jitter floor, i.e. the point duplicates an
/// existing one and there is no observation noise.
template <typename Scalar>
Matrix<Scalar> smw_extend(const Matrix<Scalar> &inv_gram, const Points2<Scalar> &current,
                          const Point2<Scalar> &new_point, const Hyperparams<Scalar> &hyper) {
  const Eigen::Index m = current.cols();
  if (inv_gram.rows() != m || inv_gram.cols() != m)
    throw InvariantError("smw_extend: inverse size does not match point set");

  Points2<Scalar> x(2, 1);
  x.col(0) = new_point;
  const Scalar c = hyper.signal_variance + hyper.diagonal_term();
  Matrix<Scalar> out(m + 1, m + 1);
  if (m == 0) {
    out(0, 0) = Scalar(1) / c;
    return out;
  }
  const Vector<Scalar> b = cross_kernel(current, x, hyper).col(0);
  const Vector<Scalar> u = inv_gram * b;
  const Scalar schur = c - b.dot(u);
  if (!(schur > Scalar(1e-12) + Scalar(2) * hyper.jitter()))
    throw SingularityError("smw_extend: Schur complement below singularity floor");

  const Scalar inv_schur = Scalar(1) / schur;
  out.topLeftCorner(m, m) = inv_gram + inv_schur * u * u.transpose();
  out.topRightCorner(m, 1) = -inv_schur * u;
  out.bottomLeftCorner(1, m) = -inv_schur * u.transpose();
  out(m, m) = inv_schur;
  return out;
}

template <typename Scalar>
Matrix<Scalar> smw_extend(const Matrix<Scalar> &inv_gram, const SparseGP<Scalar> &gp,
                          const Point2<Scalar> &new_point) {
  return smw_extend(inv_gram, gp.inducing_points(), new_point, gp.hyper());
}

template <typename Scalar> struct GreedySelection {
  /// Chosen candidate indices in selection order.
  std::vector<std::size_t> order;
  SampleList<Scalar> selected;
  /// Inverse regularized gram over `selected`.
  Matrix<Scalar> inv_gram;
};

/// Greedy information-gain selection: repeatedly adds the candidate with the
/// largest posterior variance given the points chosen so far. Ties go to the
/// lowest candidate index. Candidates whose addition would be singular are
/// discarded.
template <typename Scalar>
GreedySelection<Scalar> greedy_select_detail(std::span<const Sample<Scalar>> candidates,
                                             std::size_t capacity,
                                             const Hyperparams<Scalar> &hyper) {
  if (capacity < 1)
    throw ConfigError("greedy_select: capacity must be at least 1");
  hyper.validate();

  GreedySelection<Scalar> result;
  const std::size_t n = candidates.size();
  if (n <= capacity) {
    result.selected.assign(candidates.begin(), candidates.end());
    for (std::size_t i = 0; i < n; ++i)
      result.order.push_back(i);
    result.inv_gram = SparseGP<Scalar>(hyper, result.selected).inv_gram();
    return result;
  }

  const Points2<Scalar> cand = points_of<Scalar>(candidates);
  // Cross-kernel columns are appended as points get selected.
  Matrix<Scalar> kcz(static_cast<Eigen::Index>(n), 0);
  Points2<Scalar> chosen(2, 0);
  Matrix<Scalar> inv(0, 0);
  std::vector<char> available(n, 1);

  while (result.selected.size() < capacity) {
    Vector<Scalar> var = Vector<Scalar>::Constant(static_cast<Eigen::Index>(n), hyper.signal_variance);
    if (chosen.cols() > 0)
      var -= ((kcz * inv).cwiseProduct(kcz)).rowwise().sum();

    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (available[i] && (best == n || var(static_cast<Eigen::Index>(i)) > var(static_cast<Eigen::Index>(best))))
        best = i;
    }
    if (best == n)
      break;
    available[best] = 0;

    Matrix<Scalar> extended;
    try {
      extended = smw_extend(inv, chosen, candidates[best].point, hyper);
    } catch (const SingularityError &) {
      continue;
    }
    inv = std::move(extended);
    chosen.conservativeResize(2, chosen.cols() + 1);
    chosen.col(chosen.cols() - 1) = candidates[best].point;
    Points2<Scalar> x(2, 1);
    x.col(0) = candidates[best].point;
    kcz.conservativeResize(Eigen::NoChange, kcz.cols() + 1);
    kcz.col(kcz.cols() - 1) = cross_kernel(cand, x, hyper).col(0);
    result.order.push_back(best);
    result.selected.push_back(candidates[best]);
  }
  result.inv_gram = std::move(inv);
  return result;
}

template <typename Scalar>
SampleList<Scalar> greedy_select(std::span<const Sample<Scalar>> candidates, std::size_t capacity,
                                 const Hyperparams<Scalar> &hyper) {
  return greedy_select_detail(candidates, capacity, hyper).selected;
}

/// Union of own inducing set, buffered samples and the neighbors' sets (given
/// in ascending agent index). The first occurrence of a location wins.
template <typename Scalar>
SampleList<Scalar> merge_inducing(std::span<const Sample<Scalar>> own,
                                  std::span<const Sample<Scalar>> buffer,
                                  std::span<const SampleList<Scalar>> neighbor_sets) {
  SampleList<Scalar> merged;
  std::set<std::pair<Scalar, Scalar>> seen;
  auto take = [&](std::span<const Sample<Scalar>> src) {
    for (const auto &s : src) {
      if (seen.emplace(s.point.x(), s.point.y()).second)
        merged.push_back(s);
    }
  };
  take(own);
  take(buffer);
  for (const auto &set : neighbor_sets)
    take(set);
  return merged;
}

template <typename Scalar> struct LogLikelihood {
  Scalar value;
  /// Derivatives with respect to (log lengthscale, log signal variance,
  /// log noise variance).
  Eigen::Matrix<Scalar, 3, 1> gradient;
};

/// Log marginal likelihood of the samples under the GP prior `hyper`.
template <typename Scalar>
LogLikelihood<Scalar> log_marginal_likelihood(std::span<const Sample<Scalar>> samples,
                                              const Hyperparams<Scalar> &hyper) {
  const Points2<Scalar> z = points_of<Scalar>(samples);
  const Eigen::Index n = z.cols();
  const Matrix<Scalar> kf = cross_kernel(z, z, hyper);
  Matrix<Scalar> g = kf;
  g.diagonal().array() += hyper.diagonal_term();

  LogLikelihood<Scalar> out{std::numeric_limits<Scalar>::quiet_NaN(),
                            Eigen::Matrix<Scalar, 3, 1>::Constant(std::numeric_limits<Scalar>::quiet_NaN())};
  Eigen::LLT<Matrix<Scalar>> llt(g);
  if (llt.info() != Eigen::Success)
    return out;

  const Vector<Scalar> r = values_of<Scalar>(samples).array() - hyper.prior_mean;
  const Vector<Scalar> alpha = llt.solve(r);
  const Matrix<Scalar> l = llt.matrixL();
  const Scalar log_det_half = l.diagonal().array().log().sum();
  out.value = -Scalar(0.5) * r.dot(alpha) - log_det_half -
              Scalar(0.5) * static_cast<Scalar>(n) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);

  const Matrix<Scalar> w = alpha * alpha.transpose() - llt.solve(Matrix<Scalar>::Identity(n, n));
  Matrix<Scalar> d2(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      d2(i, j) = (z.col(i) - z.col(j)).squaredNorm();
  const Scalar l2 = hyper.lengthscale * hyper.lengthscale;
  const Matrix<Scalar> dk_dlog_l = kf.cwiseProduct(d2) / l2;
  Matrix<Scalar> dk_dlog_s = kf;
  dk_dlog_s.diagonal().array() += hyper.jitter();

  out.gradient(0) = Scalar(0.5) * w.cwiseProduct(dk_dlog_l).sum();
  out.gradient(1) = Scalar(0.5) * w.cwiseProduct(dk_dlog_s).sum();
  out.gradient(2) = Scalar(0.5) * hyper.noise_variance * w.trace();
  return out;
}

/// Gradient ascent on the log marginal likelihood of the inducing data in
/// log-parameter space, with an adaptive step that only accepts improving
/// moves. The noise channel is frozen when the noise variance is zero.
/// Returns the input unchanged when steps == 0, fewer than two inducing
/// points exist, or the likelihood is not finite.
template <typename Scalar>
Hyperparams<Scalar> refit_hyperparams(const SparseGP<Scalar> &gp, int steps,
                                      Scalar initial_step = Scalar(0.1)) {
  const Hyperparams<Scalar> start = gp.hyper();
  if (steps <= 0 || gp.size() < 2)
    return start;

  const std::span<const Sample<Scalar>> data(gp.inducing());
  const bool fit_noise = start.noise_variance > Scalar(0);
  auto from_log = [&](const Eigen::Matrix<Scalar, 3, 1> &theta) {
    Hyperparams<Scalar> h = start;
    h.lengthscale = std::exp(theta(0));
    h.signal_variance = std::exp(theta(1));
    if (fit_noise)
      h.noise_variance = std::exp(theta(2));
    return h;
  };

  Eigen::Matrix<Scalar, 3, 1> theta(std::log(start.lengthscale), std::log(start.signal_variance),
                                    fit_noise ? std::log(start.noise_variance) : Scalar(0));
  LogLikelihood<Scalar> current = log_marginal_likelihood(data, start);
  if (!std::isfinite(current.value) || !current.gradient.allFinite())
    return start;

  Scalar step = initial_step;
  for (int it = 0; it < steps; ++it) {
    Eigen::Matrix<Scalar, 3, 1> dir = current.gradient;
    if (!fit_noise)
      dir(2) = Scalar(0);
    const Scalar norm = dir.norm();
    if (!(norm > Scalar(0)))
      break;
    const Eigen::Matrix<Scalar, 3, 1> proposal = theta + (step / norm) * dir;
    const LogLikelihood<Scalar> next = log_marginal_likelihood(data, from_log(proposal));
    if (std::isfinite(next.value) && next.gradient.allFinite() && next.value > current.value) {
      theta = proposal;
      current = next;
      step *= Scalar(1.2);
    } else {
      step *= Scalar(0.5);
    }
  }
  return from_log(theta);
}

} // namespace gpcov

#endif // GPCOV_GP_HPP
