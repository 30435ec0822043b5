#include <doctest.h>

#include <cmath>
#include <random>

#include "gpcov/consensus.hpp"
#include "gpcov/geometry.hpp"

using namespace gpcov;

namespace {

using H = Hyperparams<double>;

std::vector<H> random_params(std::mt19937_64 &rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<H> out;
  for (int i = 0; i < n; ++i) {
    H h;
    h.lengthscale = 10.0 * std::exp(u(rng));
    h.signal_variance = 2.0 * std::exp(u(rng));
    h.noise_variance = 0.1 * std::exp(u(rng));
    h.prior_mean = u(rng);
    out.push_back(h);
  }
  return out;
}

std::array<double, kHyperChannels> channel_sum(const std::vector<H> &p, bool log_space) {
  std::array<double, kHyperChannels> s{};
  for (const auto &h : p) {
    const auto c = to_channels(h, log_space, true);
    for (int k = 0; k < kHyperChannels; ++k)
      s[k] += c[k];
  }
  return s;
}

double spread(const std::vector<H> &p, int k, bool log_space) {
  double lo = 1e300, hi = -1e300;
  for (const auto &h : p) {
    const double v = to_channels(h, log_space, true)[k];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

const Eigen::MatrixXi path4 = laplacian_of(NeighborSets{{1}, {0, 2}, {1, 3}, {2}});

} // namespace

TEST_CASE("identical parameters are a fixed point") {
  const H h{3.5, 1.25, 0.01, 0.4};
  const std::vector<H> p(4, h);
  const auto out = consensus_step<double>(p, path4, ConsensusConfig{0.2, true});
  for (const auto &o : out)
    CHECK(o == h);
}

TEST_CASE("two agents average in one step") {
  std::vector<H> p(2);
  p[0].lengthscale = 2.0;
  p[1].lengthscale = 4.0;
  const Eigen::MatrixXi l = laplacian_of(NeighborSets{{1}, {0}});
  const auto out = consensus_step<double>(p, l, ConsensusConfig{0.5, false});
  CHECK(out[0].lengthscale == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(out[1].lengthscale == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("path graph converges to the initial mean") {
  std::mt19937_64 rng(3);
  std::vector<H> p = random_params(rng, 4);
  for (bool log_space : {true, false}) {
    const ConsensusConfig cfg{0.2, log_space};
    const auto start = channel_sum(p, log_space);
    std::vector<H> cur = p;
    for (int it = 0; it < 200; ++it)
      cur = consensus_step<double>(cur, path4, cfg);
    for (const auto &h : cur) {
      const auto c = to_channels(h, log_space, true);
      for (int k = 0; k < kHyperChannels; ++k)
        CHECK(std::abs(c[k] - start[k] / 4.0) < 1e-6);
    }
  }
}

TEST_CASE("sums are preserved and spreads contract") {
  std::mt19937_64 rng(7);
  const Domain d(60, 40);
  std::uniform_real_distribution<double> ux(0.0, 60.0), uy(0.0, 40.0);
  std::vector<Point> pos;
  for (int i = 0; i < 6; ++i) {
    const double x = ux(rng);
    pos.emplace_back(x, uy(rng));
  }
  const Eigen::MatrixXi l = compute_partition(pos, d).laplacian;
  const double alpha = 0.9 * consensus_gain_bound(l);
  std::vector<H> cur = random_params(rng, 6);
  for (int it = 0; it < 50; ++it) {
    const auto next = consensus_step<double>(cur, l, ConsensusConfig{alpha, true});
    const auto s0 = channel_sum(cur, true), s1 = channel_sum(next, true);
    for (int k = 0; k < kHyperChannels; ++k) {
      CHECK(std::abs(s1[k] - s0[k]) < 1e-10);
      CHECK(spread(next, k, true) <= spread(cur, k, true) + 1e-12);
    }
    for (const auto &h : next) {
      CHECK(h.lengthscale > 0.0);
      CHECK(h.signal_variance > 0.0);
      CHECK(h.noise_variance > 0.0);
    }
    cur = next;
  }
}

TEST_CASE("zero noise is averaged linearly") {
  std::vector<H> p(2);
  p[0].noise_variance = 0.0;
  p[1].noise_variance = 0.2;
  const Eigen::MatrixXi l = laplacian_of(NeighborSets{{1}, {0}});
  const auto out = consensus_step<double>(p, l, ConsensusConfig{0.25, true});
  CHECK(out[0].noise_variance == doctest::Approx(0.05));
  CHECK(out[1].noise_variance == doctest::Approx(0.15));
}

TEST_CASE("local updates agree with the global step") {
  std::mt19937_64 rng(21);
  const std::vector<H> p = random_params(rng, 4);
  const ConsensusConfig cfg{0.2, true};
  const auto global = consensus_step<double>(p, path4, cfg);
  const NeighborSets nb{{1}, {0, 2}, {1, 3}, {2}};
  for (int i = 0; i < 4; ++i) {
    std::vector<H> received;
    for (int j : nb[i])
      received.push_back(p[j]);
    const H local = local_consensus_update<double>(p[i], received, cfg, true);
    CHECK(local.lengthscale == doctest::Approx(global[i].lengthscale).epsilon(1e-14));
    CHECK(local.signal_variance == doctest::Approx(global[i].signal_variance).epsilon(1e-14));
    CHECK(local.noise_variance == doctest::Approx(global[i].noise_variance).epsilon(1e-14));
    CHECK(local.prior_mean == doctest::Approx(global[i].prior_mean).epsilon(1e-14));
  }
}

TEST_CASE("consensus step errors") {
  const std::vector<H> p(4);
  CHECK_THROWS_AS(consensus_step<double>(p, path4, ConsensusConfig{0.5, true}), ConfigError);
  CHECK_THROWS_AS(consensus_step<double>(std::vector<H>(2), laplacian_of(NeighborSets{{1}, {0}}),
                                         ConsensusConfig{1.0, true}),
                  ConfigError);
  CHECK_THROWS_AS(consensus_step<double>(p, path4, ConsensusConfig{0.0, true}), ConfigError);
  CHECK_THROWS_AS(consensus_step<double>(p, Eigen::MatrixXi::Zero(3, 3), ConsensusConfig{}), InvariantError);
  Eigen::MatrixXi asym = path4;
  asym(0, 1) = 0;
  asym(0, 0) = 0;
  CHECK_THROWS_AS(consensus_step<double>(p, asym, ConsensusConfig{}), InvariantError);
  CHECK(consensus_step<double>(std::vector<H>{}, Eigen::MatrixXi(0, 0), ConsensusConfig{}).empty());
  CHECK(std::isinf(consensus_gain_bound(Eigen::MatrixXi::Zero(2, 2))));
}
