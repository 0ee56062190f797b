#include <doctest.h>

#include <cmath>

#include "hopcalc/component_stats.hpp"
#include "hopcalc/errors.hpp"
#include "hopcalc/poisson_analytic.hpp"
#include "hopcalc/road_sim.hpp"

using namespace hopcalc;

TEST_CASE("vehicle count PGF: degenerate, normalization, mean") {
  CHECK(vehicle_count_pgf(0.0, 0.3) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(vehicle_count_pgf(0.7, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  const double FR = 1.0 - std::exp(-2.0);
  CHECK(mean_vehicles(FR) == doctest::Approx(std::exp(2.0)).epsilon(1e-12));
  // mean via the PGF derivative
  const double d = (vehicle_count_pgf(FR, 1.0) - vehicle_count_pgf(FR, 1.0 - 1e-7)) / 1e-7;
  CHECK(d == doctest::Approx(std::exp(2.0)).epsilon(1e-5));
  CHECK_THROWS_AS(vehicle_count_pgf(1.0, 0.5), std::invalid_argument);
}

TEST_CASE("mean component length: Poisson anchor and degenerate mixture") {
  auto exp_model = InterdistanceModel::exponential(0.02);
  const double lcc = mean_component_length(exp_model, 100.0);
  CHECK(lcc == doctest::Approx((1.0 - std::exp(-2.0)) / (0.02 * std::exp(-2.0)))
                   .epsilon(1e-12));
  CHECK(lcc == doctest::Approx(319.45).epsilon(1e-4));

  auto h = InterdistanceModel::hyperexponential({1.0 - 1e-14, 1e-14},
                                                {1.0 / 15.0, 1.0 / 20.0});
  auto e = InterdistanceModel::exponential(1.0 / 15.0);
  CHECK(mean_component_length(h, 100.0) ==
        doctest::Approx(mean_component_length(e, 100.0)).epsilon(1e-12));

  CHECK_THROWS_AS(mean_component_length(InterdistanceModel::empirical({1.0, 2.0}), 100.0),
                  std::invalid_argument);
}

TEST_CASE("hyperexp mean length matches the road simulator within 2%") {
  auto m = InterdistanceModel::hyperexponential({0.95, 0.05}, {1.0 / 14.2, 1.0 / 43.2});
  const double closed = mean_component_length(m, 100.0);
  auto st = simulate_stats(m, 100.0, 20000, 33);
  CHECK(std::abs(st.mean_lcc - closed) / closed < 0.02);
}

TEST_CASE("hop density: unit anchor and the Poisson composition") {
  CHECK(hop_density(2.0, 200.0, 100.0) == doctest::Approx(1.0).epsilon(1e-15));
  const double mean = mean_hops_closed(PoissonParams(2.0));
  const double lcc = mean_component_length(InterdistanceModel::exponential(0.02), 100.0);
  const double dens = hop_density(mean, lcc, 100.0);
  CHECK(dens == doctest::Approx(1.29).epsilon(0.01));
  CHECK_THROWS_AS(hop_density(1.0, 0.0, 100.0), std::invalid_argument);
}

TEST_CASE("component vehicles dominate path nodes in expectation") {
  for (double lp : {1.0, 2.0, 3.0, 4.5, 6.0}) {
    const double FR = 1.0 - std::exp(-lp);
    CHECK(mean_vehicles(FR) >= mean_hops_closed(PoissonParams(lp)));
  }
}
