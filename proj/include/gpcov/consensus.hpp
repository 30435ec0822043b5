#ifndef GPCOV_CONSENSUS_HPP
#define GPCOV_CONSENSUS_HPP

// Laplacian averaging of GP hyperparameters over the neighbor graph:
// theta_i <- theta_i - alpha * sum_j L_ij theta_j, one synchronous round per
// call. Positive channels are averaged in log space by default; the prior
// mean is always averaged linearly.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gpcov/common.hpp"
#include "gpcov/gp.hpp"

namespace gpcov {

struct ConsensusConfig {
  double alpha = 0.2;
  bool log_space = true;
};

inline constexpr int kHyperChannels = 4;

/// Channel values in the averaging space: lengthscale, signal variance,
/// noise variance, prior mean. Noise is kept linear when it is zero
/// (log undefined); `log_noise` selects which.
template <typename Scalar>
std::array<Scalar, kHyperChannels> to_channels(const Hyperparams<Scalar> &h, bool log_space, bool log_noise) {
  auto f = [&](Scalar v) { return log_space ? std::log(v) : v; };
  return {f(h.lengthscale), f(h.signal_variance),
          (log_space && log_noise) ? std::log(h.noise_variance) : h.noise_variance, h.prior_mean};
}

/// Applies per-channel increments (in the averaging space) to `base`.
/// Channels with a zero increment keep their exact original value.
template <typename Scalar>
Hyperparams<Scalar> apply_increments(const Hyperparams<Scalar> &base,
                                     const std::array<Scalar, kHyperChannels> &delta, bool log_space,
                                     bool log_noise) {
  const auto c = to_channels(base, log_space, log_noise);
  auto g = [&](int k, Scalar original, bool logged) {
    if (delta[k] == Scalar(0))
      return original;
    return logged ? std::exp(c[k] + delta[k]) : c[k] + delta[k];
  };
  Hyperparams<Scalar> h;
  h.lengthscale = g(0, base.lengthscale, log_space);
  h.signal_variance = g(1, base.signal_variance, log_space);
  h.noise_variance = g(2, base.noise_variance, log_space && log_noise);
  h.prior_mean = g(3, base.prior_mean, false);
  return h;
}

/// Largest allowed gain (exclusive) for a Laplacian: 1 / max degree.
inline double consensus_gain_bound(const Eigen::MatrixXi &laplacian) {
  const int d_max = laplacian.rows() > 0 ? laplacian.diagonal().maxCoeff() : 0;
  return d_max > 0 ? 1.0 / d_max : std::numeric_limits<double>::infinity();
}

/// Whether the noise channel may be averaged in log space: every value
/// must be strictly positive.
template <typename Scalar> bool noise_is_loggable(std::span<const Hyperparams<Scalar>> params) {
  return std::all_of(params.begin(), params.end(),
                     [](const auto &h) { return h.noise_variance > Scalar(0); });
}

/// One agent's update from its own value and the values received from its
/// neighbors.
template <typename Scalar>
Hyperparams<Scalar> local_consensus_update(const Hyperparams<Scalar> &own,
                                           std::span<const Hyperparams<Scalar>> received,
                                           const ConsensusConfig &cfg, bool log_noise) {
  const auto self = to_channels(own, cfg.log_space, log_noise);
  std::array<Scalar, kHyperChannels> delta{};
  for (const auto &h : received) {
    const auto other = to_channels(h, cfg.log_space, log_noise);
    for (int c = 0; c < kHyperChannels; ++c)
      delta[c] += other[c] - self[c];
  }
  for (auto &d : delta)
    d *= static_cast<Scalar>(cfg.alpha);
  return apply_increments(own, delta, cfg.log_space, log_noise);
}

/// Synchronous consensus round over all agents. Refuses gains at or above
/// 1 / max degree.
template <typename Scalar>
std::vector<Hyperparams<Scalar>> consensus_step(std::span<const Hyperparams<Scalar>> params,
                                                const Eigen::MatrixXi &laplacian,
                                                const ConsensusConfig &cfg) {
  const Eigen::Index n = static_cast<Eigen::Index>(params.size());
  if (laplacian.rows() != n || laplacian.cols() != n)
    throw InvariantError("consensus_step: laplacian size does not match agent count");
  if (n == 0)
    return {};
  if (laplacian != laplacian.transpose())
    throw InvariantError("consensus_step: laplacian is not symmetric");
  if (laplacian.rowwise().sum().cwiseAbs().maxCoeff() != 0)
    throw InvariantError("consensus_step: laplacian rows must sum to zero");
  if (!(cfg.alpha > 0.0) || !(cfg.alpha < consensus_gain_bound(laplacian)))
    throw ConfigError("consensus_step: alpha outside the stability bound");

  const bool log_noise = noise_is_loggable(params);
  std::vector<std::array<Scalar, kHyperChannels>> theta;
  theta.reserve(params.size());
  for (const auto &h : params)
    theta.push_back(to_channels(h, cfg.log_space, log_noise));

  // Read every time-t value before writing any time-(t+1) value. The sum
  // runs over off-diagonal entries, -L_ij (theta_j - theta_i), which is
  // algebraically -sum_j L_ij theta_j since rows of L sum to zero.
  std::vector<Hyperparams<Scalar>> out;
  out.reserve(params.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    std::array<Scalar, kHyperChannels> delta{};
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i || laplacian(i, j) == 0)
        continue;
      const Scalar w = -static_cast<Scalar>(laplacian(i, j));
      for (int k = 0; k < kHyperChannels; ++k)
        delta[k] += w * (theta[j][k] - theta[i][k]);
    }
    for (auto &d : delta)
      d *= static_cast<Scalar>(cfg.alpha);
    out.push_back(apply_increments(params[i], delta, cfg.log_space, log_noise));
  }
  return out;
}

} // namespace gpcov

#endif // GPCOV_CONSENSUS_HPP
