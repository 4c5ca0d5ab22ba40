#include "robust_gait/errors.hpp"
#include "robust_gait/gp.hpp"
#include "robust_gait/random.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace robust_gait;

namespace
{

std::vector<Eigen::Vector2d> random_inputs(RandomStream & rng, int n)
{
  std::vector<Eigen::Vector2d> x;
  for(int i = 0; i < n; ++i) x.emplace_back(rng.uniform(), rng.uniform());
  return x;
}

Eigen::VectorXd random_targets(RandomStream & rng, int n)
{
  Eigen::VectorXd y(n);
  for(int i = 0; i < n; ++i) y[i] = rng.uniform(-1.0, 2.0);
  return y;
}

bo::Kernel random_kernel(RandomStream & rng)
{
  bo::Kernel k;
  k.signal_var = rng.uniform(0.2, 3.0);
  k.lengthscales = {rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)};
  k.noise_var = rng.uniform(1e-4, 1e-1);
  return k;
}

using test_support::dense_cov;

} // namespace

TEST_SUITE("gp")
{
  TEST_CASE("single point closed form")
  {
    bo::Kernel k;
    k.signal_var = 1.7;
    k.noise_var = 0.3;
    const bo::GpModel m = bo::gp_condition({{0.4, 0.6}}, Eigen::VectorXd::Zero(1), k);
    const double expected = -0.5 * std::log(2.0 * std::numbers::pi * (1.7 + 0.3));
    CHECK(bo::log_marginal_likelihood(m).value == doctest::Approx(expected).epsilon(1e-14));
  }

  TEST_CASE("log likelihood gradient matches central differences")
  {
    RandomStream rng(31);
    for(int trial = 0; trial < 20; ++trial)
    {
      const auto x = random_inputs(rng, 6);
      const Eigen::VectorXd y = random_targets(rng, 6);
      const bo::Kernel k = random_kernel(rng);
      const bo::LogLikelihood ll = bo::log_marginal_likelihood(bo::gp_condition(x, y, k));
      const Eigen::Vector4d theta = k.log_params();
      const double h = 1e-5;
      for(int i = 0; i < 4; ++i)
      {
        Eigen::Vector4d up = theta, down = theta;
        up[i] += h;
        down[i] -= h;
        const double fd = (bo::log_marginal_likelihood(bo::gp_condition(x, y, bo::Kernel::from_log_params(up))).value
                           - bo::log_marginal_likelihood(bo::gp_condition(x, y, bo::Kernel::from_log_params(down))).value)
                          / (2 * h);
        CHECK(std::abs(fd - ll.gradient[i]) <= 1e-4 * std::max(1.0, std::abs(fd)));
      }
    }
  }

  TEST_CASE("likelihood is invariant under reordering")
  {
    RandomStream rng(32);
    auto x = random_inputs(rng, 7);
    Eigen::VectorXd y = random_targets(rng, 7);
    const bo::Kernel k = random_kernel(rng);
    const double v = bo::log_marginal_likelihood(bo::gp_condition(x, y, k)).value;
    std::reverse(x.begin(), x.end());
    y.reverseInPlace();
    std::swap(x[1], x[4]);
    std::swap(y[1], y[4]);
    CHECK(bo::log_marginal_likelihood(bo::gp_condition(x, y, k)).value == doctest::Approx(v).epsilon(1e-12));
  }

  TEST_CASE("posterior agrees with a direct dense solve")
  {
    RandomStream rng(33);
    for(int trial = 0; trial < 10; ++trial)
    {
      const auto x = random_inputs(rng, 5);
      const Eigen::VectorXd y = random_targets(rng, 5);
      const bo::Kernel k = random_kernel(rng);
      const bo::GpModel m = bo::gp_condition(x, y, k);

      Eigen::MatrixXd K = dense_cov(x, k);
      const Eigen::MatrixXd Kn = K + k.noise_var * Eigen::MatrixXd::Identity(5, 5);
      CHECK((m.chol_factor * m.chol_factor.transpose() - Kn).cwiseAbs().maxCoeff() <= 1e-10);
      const double mean0 = y.mean();
      const Eigen::VectorXd w = Kn.fullPivLu().solve(Eigen::VectorXd(y.array() - mean0));
      CHECK((w - m.alpha_weights).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, w.cwiseAbs().maxCoeff()));

      for(int q = 0; q < 50; ++q)
      {
        const Eigen::Vector2d xs(rng.uniform(), rng.uniform());
        Eigen::VectorXd ks(5);
        for(int i = 0; i < 5; ++i) ks[i] = test_support::se_cov(x[static_cast<std::size_t>(i)], xs, k);
        const double mean = mean0 + ks.dot(w);
        const double var = std::max(0.0, k.signal_var - ks.dot(Kn.fullPivLu().solve(ks)));
        const bo::Posterior p = bo::gp_posterior(m, xs);
        CHECK(std::abs(p.mean - mean) <= 1e-8);
        CHECK(std::abs(p.var - var) <= 1e-8);
        CHECK(p.var >= 0.0);
        CHECK(p.var <= k.signal_var + k.noise_var);
      }
    }
  }

  TEST_CASE("interpolation and prior reversion")
  {
    RandomStream rng(34);
    const auto x = random_inputs(rng, 4);
    const Eigen::VectorXd y = random_targets(rng, 4);
    bo::Kernel k;
    k.signal_var = 1.0;
    k.lengthscales = {0.05, 0.05};
    k.noise_var = 1e-8;
    const bo::GpModel m = bo::gp_condition(x, y, k);
    for(int i = 0; i < 4; ++i)
    {
      const bo::Posterior p = bo::gp_posterior(m, x[static_cast<std::size_t>(i)]);
      CHECK(std::abs(p.mean - y[i]) <= 1e-3);
      CHECK(p.var <= 1e-3);
    }
    const bo::Posterior far = bo::gp_posterior(m, {50.0, -50.0});
    CHECK(far.mean == doctest::Approx(y.mean()).epsilon(1e-12));
    CHECK(far.var == doctest::Approx(k.signal_var).epsilon(1e-12));
  }

  TEST_CASE("constant data gives a constant mean")
  {
    const std::vector<Eigen::Vector2d> x = {{0.1, 0.1}, {0.5, 0.5}, {0.9, 0.9}};
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(3, 2.5);
    const bo::GpModel m = bo::gp_fit(x, y);
    RandomStream rng(35);
    for(int q = 0; q < 100; ++q)
      CHECK(std::abs(bo::gp_posterior(m, {rng.uniform(), rng.uniform()}).mean - 2.5) <= 1e-6);
  }

  TEST_CASE("fit never ends below its starting points")
  {
    RandomStream rng(36);
    for(int trial = 0; trial < 10; ++trial)
    {
      const int n = 3 + trial;
      const auto x = random_inputs(rng, n);
      const Eigen::VectorXd y = random_targets(rng, n);
      bo::FitReport report;
      const bo::GpModel m = bo::gp_fit(x, y, {}, &report);
      REQUIRE(report.start_points.size() == 8);
      const double fitted = bo::log_marginal_likelihood(m).value;
      CHECK(fitted == doctest::Approx(report.best_value).epsilon(1e-9));
      for(double v : report.start_values) CHECK(fitted >= v - 1e-12);
      CHECK(m.kernel.noise_var >= bo::Kernel::kNoiseFloor);
      CHECK(m.kernel.lengthscales.minCoeff() >= 0.2 * (1 - 1e-12));
    }
  }

  TEST_CASE("fit is reproducible bit for bit")
  {
    RandomStream rng(37);
    const auto x = random_inputs(rng, 9);
    const Eigen::VectorXd y = random_targets(rng, 9);
    const bo::GpModel a = bo::gp_fit(x, y);
    const bo::GpModel b = bo::gp_fit(x, y);
    CHECK(a.kernel.log_params() == b.kernel.log_params());
    CHECK(a.alpha_weights == b.alpha_weights);
  }

  TEST_CASE("duplicate inputs are absorbed by the noise floor")
  {
    const std::vector<Eigen::Vector2d> x = {{0.3, 0.3}, {0.3, 0.3}, {0.3, 0.3}};
    bo::Kernel k;
    k.noise_var = 0.0;
    const bo::GpModel m = bo::gp_condition(x, Eigen::Vector3d(1.0, 1.1, 0.9), k);
    CHECK(m.kernel.noise_var >= bo::Kernel::kNoiseFloor);
    CHECK_NOTHROW(bo::gp_fit(x, Eigen::Vector3d(1.0, 1.1, 0.9)));
  }

  TEST_CASE("argument checks")
  {
    CHECK_THROWS_AS(bo::gp_fit({{0.1, 0.1}}, Eigen::VectorXd::Ones(1)), InvalidParameter);
    CHECK_THROWS_AS(bo::gp_condition({{0.1, 0.1}}, Eigen::VectorXd::Ones(2), {}), InvalidParameter);
    bo::FitOptions bad;
    bad.min_lengthscale = 0.0;
    CHECK_THROWS_AS(bo::gp_fit({{0.1, 0.1}, {0.2, 0.2}}, Eigen::VectorXd::Ones(2), bad), InvalidParameter);
  }
}
