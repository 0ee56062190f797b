#include <doctest.h>

#include <cmath>
#include <vector>

#include "hopcalc/errors.hpp"
#include "hopcalc/relay_kernel.hpp"
#include "test_helpers.hpp"

using namespace hopcalc;

namespace {

RelayKernel poisson_kernel(double lambda, double R) {
  return RelayKernel::closed_form(InterdistanceModel::exponential(lambda), R);
}

InterdistanceModel fig2_model() {
  return InterdistanceModel::hyperexponential({0.95, 0.05}, {1.0 / 14.2, 1.0 / 43.2});
}

}  // namespace

TEST_CASE("Poisson tau_1: branch values and continuity at R") {
  auto k = poisson_kernel(0.02, 100.0);
  CHECK(k.tau1_cdf(100.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
  CHECK(k.tau1_cdf(50.0) ==
        doctest::Approx(std::exp(-1.0) * (1.0 - std::exp(-1.0))).epsilon(1e-12));
  CHECK(k.tau1_cdf(50.0) == doctest::Approx(0.232544).epsilon(1e-5));
  CHECK(k.tau1_cdf(0.0) == 0.0);
  CHECK(k.tau1_cdf(1e5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Poisson conditional: support edge and branch continuity") {
  auto k = poisson_kernel(0.02, 100.0);
  CHECK(k.tau_cond_cdf(80.0, 20.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(k.tau_cond_cdf(80.0, 100.0) ==
        doctest::Approx(1.0 - std::exp(-0.02 * 80.0)).epsilon(1e-12));
  CHECK(k.tau_cond_cdf(80.0, 100.0) == doctest::Approx(0.798103).epsilon(1e-5));
  CHECK_THROWS_AS(k.tau_cond_cdf(101.0, 150.0), std::invalid_argument);
  CHECK_THROWS_AS(k.tau_cond_cdf(0.0, 50.0), std::invalid_argument);
}

TEST_CASE("branch continuity across random closed-form configurations") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const double R = 50.0 + 100.0 * rng.uniform01();
    const bool poisson = trial % 2 == 0;
    InterdistanceModel model =
        poisson ? InterdistanceModel::exponential(1.0 / (5.0 + 30.0 * rng.uniform01()))
                : InterdistanceModel::hyperexponential(
                      {0.5 + 0.45 * rng.uniform01(), 0.0},  // placeholder, fixed below
                      {1.0, 1.0});
    if (!poisson) {
      const double a1 = 0.5 + 0.45 * rng.uniform01();
      model = InterdistanceModel::hyperexponential(
          {a1, 1.0 - a1},
          {1.0 / (5.0 + 20.0 * rng.uniform01()), 1.0 / (25.0 + 30.0 * rng.uniform01())});
    }
    auto k = RelayKernel::closed_form(model, R);
    const double xp = R * (0.05 + 0.9 * rng.uniform01());
    CHECK(std::abs(k.tau1_cdf(R * (1.0 - 1e-12)) - k.tau1_cdf(R * (1.0 + 1e-12))) <= 1e-12);
    CHECK(std::abs(k.tau_cond_cdf(xp, R * (1.0 - 1e-12)) -
                   k.tau_cond_cdf(xp, R * (1.0 + 1e-12))) <= 1e-12);
  }
}

TEST_CASE("degenerate mixture kernel equals the Poisson kernel") {
  const double R = 100.0, lam = 1.0 / 15.0;
  auto kp = poisson_kernel(lam, R);
  auto kh = RelayKernel::closed_form(
      InterdistanceModel::hyperexponential({1.0 - 1e-13, 1e-13}, {lam, 1.0 / 20.0}), R);
  for (int i = 0; i <= 300; ++i) {
    const double x = 0.6 * i;
    CHECK(kh.tau1_cdf(x) == doctest::Approx(kp.tau1_cdf(x)).epsilon(1e-10));
    CHECK(kh.tau_cond_cdf(70.0, x) ==
          doctest::Approx(kp.tau_cond_cdf(70.0, x)).epsilon(1e-10));
  }
}

TEST_CASE("renewal solver reproduces the Poisson closed forms (sup <= 1e-4)") {
  const double R = 100.0, lam = 0.02;
  auto kc = poisson_kernel(lam, R);
  auto kn = RelayKernel::numerical(InterdistanceModel::exponential(lam), R, R / 1000.0);
  double sup1 = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double x = R * i / 2000.0;
    sup1 = std::max(sup1, std::abs(kc.tau1_cdf(x) - kn.tau1_cdf(x)));
  }
  CHECK(sup1 <= 1e-4);
  for (double xp : {30.0, 80.0, 100.0}) {
    double sup = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double x = R * i / 2000.0;
      sup = std::max(sup, std::abs(kc.tau_cond_cdf(xp, x) - kn.tau_cond_cdf(xp, x)));
    }
    CHECK(sup <= 1e-4);
  }
  // branch continuity of the numeric kernel
  CHECK(std::abs(kn.tau_cond_cdf(80.0, R - 1e-9) - kn.tau_cond_cdf(80.0, R + 1e-9)) <=
        1e-6);
  CHECK(std::abs(kn.tau1_cdf(R - 1e-9) - kn.tau1_cdf(R + 1e-9)) <= 1e-6);
}

TEST_CASE("hyperexp closed form vs renewal solver (spec open question)") {
  const double R = 100.0;
  auto kc = RelayKernel::closed_form(fig2_model(), R);
  auto kn = RelayKernel::numerical(fig2_model(), R, R / 1000.0);
  double sup = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = R * i / 1000.0;
    sup = std::max(sup, std::abs(kc.tau1_cdf(x) - kn.tau1_cdf(x)));
  }
  CHECK(sup <= 1e-3);
  for (double xp : {40.0, 80.0}) {
    sup = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double x = R * i / 1000.0;
      sup = std::max(sup, std::abs(kc.tau_cond_cdf(xp, x) - kn.tau_cond_cdf(xp, x)));
    }
    CHECK(sup <= 1e-3);
  }
}

TEST_CASE("renewal_density: reconstruction matches the conditional closed form") {
  const double R = 100.0, lam = 0.02, xp = 80.0;
  auto kn = RelayKernel::numerical(InterdistanceModel::exponential(lam), R, R / 1000.0);
  auto kc = poisson_kernel(lam, R);
  const double a = R - xp;
  const int n = 1000;
  std::vector<double> grid(n + 1);
  for (int i = 0; i <= n; ++i) grid[i] = a + (R - a) * i / n;
  auto g = kn.renewal_density(xp, grid);
  // integrate g(u) (1 - F(R-u)) / (1 - F(a)) and compare against the closed CDF
  const auto& model = kn.model();
  const double norm = 1.0 - model.cdf(a);
  double acc = 0.0, sup = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double w0 = g[i - 1] * (1.0 - model.cdf(R - grid[i - 1]));
    const double w1 = g[i] * (1.0 - model.cdf(R - grid[i]));
    acc += 0.5 * (grid[i] - grid[i - 1]) * (w0 + w1);
    sup = std::max(sup, std::abs(acc / norm - kc.tau_cond_cdf(xp, grid[i])));
  }
  CHECK(sup <= 1e-4);
}

TEST_CASE("renewal_density: negligible mass below R collapses g to f") {
  // interdistance scale 1e6 >> R: convolution terms are O(F(R)) ~ 1e-4
  const double R = 100.0;
  auto m = InterdistanceModel::exponential(1e-6);
  auto kn = RelayKernel::numerical(m, R, R / 500.0);
  std::vector<double> grid{0.0, 25.0, 50.0, 75.0, 100.0};
  auto g = kn.renewal_density(R, grid);  // x_prev = R so the window is [0, R]
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(g[i] == doctest::Approx(*m.pdf(grid[i])).epsilon(2e-4));
}

TEST_CASE("renewal mode rejects out-of-domain queries and bad grids") {
  auto kn = RelayKernel::numerical(InterdistanceModel::exponential(0.05), 100.0);
  CHECK_THROWS_AS(kn.tau1_cdf(1e9), numerical_error);
  CHECK_THROWS_AS(RelayKernel::numerical(InterdistanceModel::exponential(0.05), 100.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      RelayKernel::numerical(InterdistanceModel::empirical({1.0, 2.0}), 100.0),
      std::invalid_argument);
}

TEST_CASE("sampling tau_1: 1e6 draws vs analytic CDF (KS <= 0.002)") {
  auto k = poisson_kernel(0.02, 100.0);
  SplitMix64 rng(77);
  std::vector<double> xs(1000000);
  for (auto& x : xs) x = k.sample_tau1(rng);
  CHECK(testutil::ks_distance(xs, [&](double x) { return k.tau1_cdf(x); }) <= 0.002);
}

TEST_CASE("sampling tau_cond: support bound and tail probability") {
  auto k = poisson_kernel(0.02, 100.0);
  const double xp = 60.0;
  SplitMix64 rng(5150);
  std::size_t beyond = 0;
  const std::size_t n = 1000000;
  double min_draw = 1e300;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = k.sample_tau_cond(xp, rng);
    min_draw = std::min(min_draw, x);
    if (x > 100.0) ++beyond;
  }
  CHECK(min_draw >= 100.0 - xp);
  const double p = std::exp(-0.02 * xp);
  const double se = std::sqrt(p * (1.0 - p) / n);
  CHECK(std::abs(static_cast<double>(beyond) / n - p) < 3.0 * se);
}

TEST_CASE("sampling through the numerical kernel stays faithful") {
  auto kn = RelayKernel::numerical(fig2_model(), 100.0, 0.2);
  auto kc = RelayKernel::closed_form(fig2_model(), 100.0);
  SplitMix64 rng(31);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = kn.sample_tau_cond(80.0, rng);
  CHECK(testutil::ks_distance(xs, [&](double x) { return kc.tau_cond_cdf(80.0, x); }) <=
        0.015);
}
