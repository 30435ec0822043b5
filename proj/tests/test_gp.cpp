#include <doctest.h>

#include <algorithm>
#include <random>

#include <Eigen/Dense>

#include "gpcov/gp.hpp"

using namespace gpcov;

namespace {

using H = Hyperparams<double>;
using S = Sample<double>;

SampleList<double> random_samples(std::mt19937_64 &rng, int n, double extent) {
  std::uniform_real_distribution<double> u(0.0, extent), v(-1.0, 2.0);
  SampleList<double> out;
  for (int i = 0; i < n; ++i) {
    const double x = u(rng);
    const double y = u(rng);
    out.push_back({Point(x, y), v(rng)});
  }
  return out;
}

Points2<double> grid9(double lo, double hi) {
  Points2<double> q(2, 9);
  for (int i = 0; i < 9; ++i)
    q.col(i) = Point(lo + (hi - lo) * (i % 3) / 2.0, lo + (hi - lo) * (i / 3) / 2.0);
  return q;
}

// Exact GP by dense linear solves, built element by element.
Posterior<double> dense_oracle(const SampleList<double> &data, const Points2<double> &q, const H &h) {
  const int n = static_cast<int>(data.size());
  Eigen::MatrixXd g(n, n), kqz(q.cols(), n), kqq(q.cols(), q.cols());
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    y(i) = data[i].value - h.prior_mean;
    for (int j = 0; j < n; ++j)
      g(i, j) = kernel<double>(data[i].point, data[j].point, h) + (i == j ? h.diagonal_term() : 0.0);
  }
  for (int a = 0; a < q.cols(); ++a) {
    for (int i = 0; i < n; ++i)
      kqz(a, i) = kernel<double>(q.col(a), data[i].point, h);
    for (int b = 0; b < q.cols(); ++b)
      kqq(a, b) = kernel<double>(q.col(a), q.col(b), h);
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  Posterior<double> p;
  p.mean = Eigen::VectorXd::Constant(q.cols(), h.prior_mean) + kqz * lu.solve(y);
  p.covariance = kqq - kqz * lu.solve(Eigen::MatrixXd(kqz.transpose()));
  return p;
}

// Greedy selection recomputing the inverse from scratch at each step.
std::vector<std::size_t> greedy_oracle(const SampleList<double> &cand, std::size_t m, const H &h) {
  std::vector<std::size_t> chosen;
  while (chosen.size() < m) {
    SampleList<double> z;
    for (auto i : chosen)
      z.push_back(cand[i]);
    std::size_t best = cand.size();
    double best_var = -1.0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end())
        continue;
      double var = h.signal_variance;
      if (!z.empty()) {
        const int k = static_cast<int>(z.size());
        Eigen::MatrixXd g(k, k);
        Eigen::VectorXd b(k);
        for (int a = 0; a < k; ++a) {
          b(a) = kernel<double>(cand[i].point, z[a].point, h);
          for (int c = 0; c < k; ++c)
            g(a, c) = kernel<double>(z[a].point, z[c].point, h) + (a == c ? h.diagonal_term() : 0.0);
        }
        var -= b.dot(g.inverse() * b);
      }
      if (var > best_var) {
        best_var = var;
        best = i;
      }
    }
    chosen.push_back(best);
  }
  return chosen;
}

} // namespace

TEST_CASE("kernel values") {
  const H h{2.0, 1.0, 0.0, 0.0};
  CHECK(kernel<double>(Point(1, 1), Point(1, 1), h) == 1.0);
  CHECK(kernel<double>(Point(0, 0), Point(2, 0), h) == doctest::Approx(0.60653065971).epsilon(1e-10));
  CHECK(kernel<double>(Point(0, 0), Point(1e3, 0), h) == 0.0);
  const H s{3.0, 4.5, 0.0, 0.0};
  CHECK(kernel<double>(Point(0, 0), Point(0, 0), s) == 4.5);
  CHECK(kernel<double>(Point(1, 2), Point(3, -1), s) == kernel<double>(Point(3, -1), Point(1, 2), s));
}

TEST_CASE("cross kernel agrees with the scalar kernel") {
  std::mt19937_64 rng(3);
  const auto a = random_samples(rng, 6, 10.0);
  const auto b = random_samples(rng, 4, 10.0);
  const H h{2.5, 1.7, 0.1, 0.0};
  const Matrix<double> k = cross_kernel<double>(points_of<double>(a), points_of<double>(b), h);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(k(i, j) == doctest::Approx(kernel<double>(a[i].point, b[j].point, h)).epsilon(1e-14));
}

TEST_CASE("empty inducing set recovers the prior") {
  const H h{5.0, 2.0, 0.1, 0.7};
  const SparseGP<double> gp(h, {});
  const Points2<double> q = grid9(0, 10);
  const Posterior<double> p = gp.posterior(q);
  CHECK((p.mean.array() == 0.7).all());
  CHECK((p.covariance.diagonal().array() == 2.0).all());
}

TEST_CASE("noiseless posterior interpolates a datum") {
  const H h{3.0, 1.0, 0.0, 0.0};
  const Point q0(4, 5);
  const SparseGP<double> gp(h, {{q0, 0.7}});
  Points2<double> q(2, 1);
  q.col(0) = q0;
  CHECK(std::abs(gp.mean(q0) - 0.7) < 1e-8);
  CHECK(std::abs(gp.variance(q)(0)) < 1e-8);
}

TEST_CASE("posterior matches a dense-solve oracle") {
  std::mt19937_64 rng(17);
  const auto data = random_samples(rng, 5, 20.0);
  const H h{6.0, 1.3, 0.05, 0.2};
  const SparseGP<double> gp(h, data);
  const Points2<double> q = grid9(0, 20);
  const Posterior<double> p = gp.posterior(q);
  const Posterior<double> o = dense_oracle(data, q, h);
  CHECK((p.mean - o.mean).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((p.covariance - o.covariance).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((p.covariance - p.covariance.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((p.covariance.diagonal() - gp.variance(q)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("sparse equals full when every sample is inducing") {
  std::mt19937_64 rng(29);
  const auto data = random_samples(rng, 40, 100.0);
  const H h{15.0, 2.0, 0.01, 0.5};
  const SparseGP<double> gp(h, data);
  const Points2<double> q = grid9(10, 90);
  const Posterior<double> p = gp.posterior(q);
  const Posterior<double> o = dense_oracle(data, q, h);
  CHECK((p.mean - o.mean).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((p.covariance - o.covariance).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(gp.inverse_residual() < 1e-8);
}

TEST_CASE("posterior variance is bounded by the prior and shrinks with data") {
  std::mt19937_64 rng(8);
  const auto data = random_samples(rng, 12, 30.0);
  const H h{4.0, 1.5, 0.02, 0.0};
  Points2<double> q(2, 25);
  for (int i = 0; i < 25; ++i)
    q.col(i) = Point(30.0 * (i % 5) / 4.0, 30.0 * (i / 5) / 4.0);
  Vector<double> prev = SparseGP<double>(h, {}).variance(q);
  for (std::size_t m = 1; m <= data.size(); ++m) {
    const SampleList<double> z(data.begin(), data.begin() + static_cast<long>(m));
    const Vector<double> var = SparseGP<double>(h, z).variance(q);
    CHECK((var.array() <= h.signal_variance + 1e-8).all());
    CHECK((var.array() <= prev.array() + 1e-8).all());
    prev = var;
  }
}

TEST_CASE("smw extension from an empty set") {
  const H h{1.0, 2.0, 0.5, 0.0};
  const Matrix<double> inv = smw_extend<double>(Matrix<double>(0, 0), Points2<double>(2, 0), Point(1, 1), h);
  REQUIRE(inv.rows() == 1);
  CHECK(inv(0, 0) == doctest::Approx(1.0 / 2.5).epsilon(1e-7));
}

TEST_CASE("smw extension multiplies back to identity") {
  std::mt19937_64 rng(4);
  const auto data = random_samples(rng, 3, 5.0);
  const H h{1.5, 1.0, 0.0, 0.0};
  const SparseGP<double> gp(h, data);
  const Point x(2.2, 3.3);
  const Matrix<double> inv = smw_extend(gp.inv_gram(), gp, x);
  auto z = data;
  z.push_back({x, 0.0});
  const Matrix<double> g = regularized_gram<double>(points_of<double>(z), h);
  CHECK((inv * g - Matrix<double>::Identity(4, 4)).norm() < 1e-8);
}

TEST_CASE("smw extension with a duplicate point") {
  const SampleList<double> z{{Point(1, 1), 0.0}, {Point(2, 1), 0.0}};
  const SparseGP<double> noiseless(H{1.0, 1.0, 0.0, 0.0}, z);
  CHECK_THROWS_AS(smw_extend(noiseless.inv_gram(), noiseless, Point(1, 1)), SingularityError);
  const SparseGP<double> noisy(H{1.0, 1.0, 0.1, 0.0}, z);
  CHECK_NOTHROW(smw_extend(noisy.inv_gram(), noisy, Point(1, 1)));
}

TEST_CASE("greedy selection passes small sets through") {
  const SampleList<double> c{{Point(0, 0), 1}, {Point(5, 0), 2}, {Point(0, 5), 3}};
  const SampleList<double> out = greedy_select<double>(c, 5, H{});
  CHECK(out == c);
}

TEST_CASE("greedy second pick is the farthest point") {
  const double l = 2.0;
  const H h{l, 1.0, 0.01, 0.0};
  const SampleList<double> c{{Point(0, 0), 0}, {Point(l, 0), 0}, {Point(2 * l, 0), 0}, {Point(10 * l, 0), 0}};
  const GreedySelection<double> sel = greedy_select_detail<double>(c, 2, h);
  CHECK(sel.order == std::vector<std::size_t>{0, 3});
}

TEST_CASE("greedy selection matches a from-scratch oracle") {
  for (std::uint64_t seed : {1, 2, 3}) {
    std::mt19937_64 rng(seed);
    const auto c = random_samples(rng, 12, 20.0);
    const H h{5.0, 1.0, 0.01, 0.0};
    const GreedySelection<double> sel = greedy_select_detail<double>(c, 4, h);
    CHECK(sel.order == greedy_oracle(c, 4, h));
    const SparseGP<double> gp(h, sel.selected);
    CHECK((sel.inv_gram - gp.inv_gram()).norm() < 1e-8);
  }
}

TEST_CASE("greedy selection is permutation invariant up to the first pick") {
  // Under an empty conditioning set every candidate ties, so the first pick is
  // the lowest index; later picks are tie-free on generic inputs.
  std::mt19937_64 rng(23);
  auto c = random_samples(rng, 16, 30.0);
  const H h{6.0, 1.0, 0.01, 0.0};
  auto key = [](const SampleList<double> &s) {
    std::vector<std::pair<double, double>> k;
    for (const auto &x : s)
      k.emplace_back(x.point.x(), x.point.y());
    std::sort(k.begin(), k.end());
    return k;
  };
  const auto base = key(greedy_select<double>(c, 5, h));
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(c.begin() + 1, c.end(), rng);
    CHECK(key(greedy_select<double>(c, 5, h)) == base);
  }
}

TEST_CASE("greedy selection discards singular candidates") {
  const H h{1.0, 1.0, 0.0, 0.0};
  const SampleList<double> c{{Point(0, 0), 1}, {Point(0, 0), 2}, {Point(0, 0), 3}, {Point(3, 0), 4}};
  const GreedySelection<double> sel = greedy_select_detail<double>(c, 3, h);
  CHECK(sel.order == std::vector<std::size_t>{0, 3});
  CHECK(sel.selected.size() == 2);
}

TEST_CASE("merge of inducing sets") {
  const std::vector<SampleList<double>> none;
  CHECK(merge_inducing<double>({}, {}, none).empty());

  const S a{Point(1, 1), 1.0};
  const std::vector<SampleList<double>> nb{{a}};
  const SampleList<double> own{a};
  CHECK(merge_inducing<double>(own, {}, nb).size() == 1);

  SampleList<double> mine, buf;
  std::vector<SampleList<double>> others(2);
  for (int i = 0; i < 3; ++i)
    mine.push_back({Point(i, 0), 0.0});
  for (int i = 0; i < 2; ++i)
    buf.push_back({Point(i, 1), 1.0});
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 3; ++i)
      others[j].push_back({Point(i, 2 + j), 2.0 + j});
  const SampleList<double> m = merge_inducing<double>(mine, buf, others);
  REQUIRE(m.size() == 11);
  SampleList<double> expected = mine;
  expected.insert(expected.end(), buf.begin(), buf.end());
  for (const auto &o : others)
    expected.insert(expected.end(), o.begin(), o.end());
  CHECK(m == expected);
}

TEST_CASE("likelihood gradient matches finite differences") {
  std::mt19937_64 rng(6);
  const auto data = random_samples(rng, 15, 40.0);
  const H h{7.0, 1.2, 0.05, 0.3};
  const LogLikelihood<double> ll = log_marginal_likelihood<double>(data, h);
  const double e = 1e-5;
  auto at = [&](int k, double d) {
    H x = h;
    if (k == 0)
      x.lengthscale *= std::exp(d);
    if (k == 1)
      x.signal_variance *= std::exp(d);
    if (k == 2)
      x.noise_variance *= std::exp(d);
    return log_marginal_likelihood<double>(data, x).value;
  };
  for (int k = 0; k < 3; ++k) {
    const double fd = (at(k, e) - at(k, -e)) / (2 * e);
    CHECK(ll.gradient(k) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("refit with zero steps is the identity") {
  std::mt19937_64 rng(1);
  const SparseGP<double> gp(H{3.0, 1.0, 0.1, 0.0}, random_samples(rng, 10, 10.0));
  CHECK(refit_hyperparams(gp, 0) == gp.hyper());
}

TEST_CASE("refit recovers a known lengthscale") {
  const H truth{50.0, 1.0, 0.01, 0.0};
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 300.0);
  std::normal_distribution<double> n01;
  SampleList<double> data;
  for (int i = 0; i < 40; ++i) {
    const double x = u(rng);
    data.push_back({Point(x, u(rng)), 0.0});
  }
  const Matrix<double> g = regularized_gram<double>(points_of<double>(data), truth);
  const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(g).matrixL();
  Eigen::VectorXd z(40);
  for (int i = 0; i < 40; ++i)
    z(i) = n01(rng);
  const Eigen::VectorXd y = l * z;
  for (int i = 0; i < 40; ++i)
    data[i].value = y(i);

  const H start{15.0, 0.5, 0.05, 0.0};
  const SparseGP<double> gp(start, data);
  const H fit = refit_hyperparams(gp, 200);
  CHECK(fit.lengthscale > 25.0);
  CHECK(fit.lengthscale < 100.0);

  const double g0 = log_marginal_likelihood<double>(data, start).gradient.norm();
  const double g1 = log_marginal_likelihood<double>(data, fit).gradient.norm();
  CHECK(g1 < g0);
  CHECK(log_marginal_likelihood<double>(data, fit).value > log_marginal_likelihood<double>(data, start).value);
}

TEST_CASE("refit keeps zero noise fixed") {
  std::mt19937_64 rng(9);
  const SparseGP<double> gp(H{3.0, 1.0, 0.0, 0.0}, random_samples(rng, 10, 10.0));
  CHECK(refit_hyperparams(gp, 20).noise_variance == 0.0);
}

TEST_CASE("hyperparameter validation") {
  CHECK_THROWS_AS(H({0.0, 1.0, 0.0, 0.0}).validate(), ConfigError);
  CHECK_THROWS_AS(H({1.0, -1.0, 0.0, 0.0}).validate(), ConfigError);
  CHECK_THROWS_AS(H({1.0, 1.0, -0.1, 0.0}).validate(), ConfigError);
  CHECK_THROWS_AS(greedy_select<double>(SampleList<double>{}, 0, H{}), ConfigError);
}
