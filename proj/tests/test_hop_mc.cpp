#include <doctest.h>

#include <cmath>

#include "hopcalc/errors.hpp"
#include "hopcalc/hop_mc.hpp"
#include "hopcalc/poisson_analytic.hpp"
#include "hopcalc/road_sim.hpp"

using namespace hopcalc;

namespace {

RelayKernel poisson_kernel(double lambda_prime, double R = 100.0) {
  return RelayKernel::closed_form(InterdistanceModel::exponential(lambda_prime / R), R);
}

}  // namespace

TEST_CASE("chain MC reproduces the two exact Poisson anchors") {
  auto k = poisson_kernel(2.0);
  auto d = hop_pmf_montecarlo(k, 200000, 256, 42);
  CHECK(std::abs(d.pmf(1) - std::exp(-2.0)) < 3.0 * d.stderr_at(1));
  CHECK(std::abs(d.pmf(2) - 2.0 * std::exp(-2.0)) < 3.0 * d.stderr_at(2));
  double total = d.tail_mass;
  for (double p : d.p) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("chain MC is deterministic and schedule independent") {
  auto k = poisson_kernel(2.0);
  auto d1 = hop_pmf_montecarlo(k, 20000, 64, 7, 1);
  auto d2 = hop_pmf_montecarlo(k, 20000, 64, 7, 2);
  CHECK(d1.p == d2.p);
  auto d3 = hop_pmf_montecarlo(k, 20000, 64, 8, 2);
  CHECK(d1.p != d3.p);
  // two seeds agree within 4x combined stderr wherever mass is visible
  for (int kk = 1; kk <= 12; ++kk) {
    const double se = std::hypot(d1.stderr_at(kk), d3.stderr_at(kk));
    if (d1.pmf(kk) * 20000 < 5) continue;
    CHECK(std::abs(d1.pmf(kk) - d3.pmf(kk)) <= 4.0 * se);
  }
}

TEST_CASE("chain MC matches the road simulator per k (equivalence)") {
  auto k = poisson_kernel(2.0);
  auto d = hop_pmf_montecarlo(k, 200000, 256, 11);
  auto st = simulate_stats(InterdistanceModel::exponential(0.02), 100.0, 100000, 13);
  for (int kk = 1; kk <= 10; ++kk) {
    const double road_p = st.nb_pmf[kk - 1];
    const double road_se =
        std::sqrt(road_p * (1 - road_p) / static_cast<double>(st.n_components));
    const double se = std::hypot(d.stderr_at(kk), road_se);
    CHECK(std::abs(d.pmf(kk) - road_p) <= 4.0 * se);
  }
}

TEST_CASE("quadrature: k=1 is the complementary tau_1 CDF") {
  auto k = poisson_kernel(2.0);
  CHECK(hop_pmf_quadrature(k, 1, 0.1) ==
        doctest::Approx(1.0 - k.tau1_cdf(100.0)).epsilon(1e-12));
}

TEST_CASE("quadrature matches the Poisson recurrence at k=3") {
  auto k = poisson_kernel(2.0);
  const double q = hop_pmf_quadrature(k, 3, 100.0 / 2000.0);
  auto pmf = hop_pmf_poisson(PoissonParams(2.0), 8);
  CHECK(std::abs(q - pmf.pmf(3)) <= 1e-4);
}

TEST_CASE("quadrature matches chain MC for the hyperexponential kernel at k=2") {
  auto model = InterdistanceModel::hyperexponential({0.95, 0.05}, {1.0 / 14.2, 1.0 / 43.2});
  auto k = RelayKernel::closed_form(model, 100.0);
  const double q = hop_pmf_quadrature(k, 2, 100.0 / 2000.0);
  auto d = hop_pmf_montecarlo(k, 1000000, 512, 3);
  CHECK(std::abs(q - d.pmf(2)) <= 3.0 * d.stderr_at(2));
}

TEST_CASE("quadrature rejects out-of-range k") {
  auto k = poisson_kernel(2.0);
  CHECK_THROWS_AS(hop_pmf_quadrature(k, 6, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(hop_pmf_quadrature(k, 0, 0.1), std::invalid_argument);
}

TEST_CASE("mean_hops: degenerate pmf, tail guard, MC error bar") {
  HopDistribution d;
  d.method = HopMethod::PoissonRecurrence;
  d.k_max = 1;
  d.p = {1.0};
  d.tail_mass = 0.0;
  CHECK(mean_hops(d).mean == doctest::Approx(1.0));

  d.tail_mass = 0.5;
  CHECK_THROWS_AS(mean_hops(d), numerical_error);

  auto k = poisson_kernel(2.0);
  auto mc = hop_pmf_montecarlo(k, 100000, 512, 5);
  auto m = mean_hops(mc);
  CHECK(m.se > 0.0);
  CHECK(std::abs(m.mean - mean_hops_closed(PoissonParams(2.0))) < 4.0 * m.se);
}

TEST_CASE("mean hops grows with the coverage radius (Poisson)") {
  double prev = 0.0;
  for (double R : {40.0, 70.0, 100.0, 130.0}) {
    auto k = RelayKernel::closed_form(InterdistanceModel::exponential(0.02), R);
    auto d = hop_pmf_montecarlo(k, 100000, 1024, 9);
    const auto m = mean_hops(d);
    CHECK(m.mean > prev - 3.0 * m.se);
    prev = m.mean;
  }
}
