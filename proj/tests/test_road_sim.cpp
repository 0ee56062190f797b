#include <doctest.h>

#include <cmath>
#include <deque>
#include <vector>

#include "hopcalc/component_stats.hpp"
#include "hopcalc/relay_kernel.hpp"
#include "hopcalc/road_sim.hpp"
#include "test_helpers.hpp"

using namespace hopcalc;

namespace {

// oracle: BFS shortest path node count on the interval graph (edge iff
// distance <= R), from the first to the last vehicle of the component
int bfs_path_nodes(const std::vector<double>& pos, std::size_t lo, std::size_t hi,
                   double R) {
  std::vector<int> dist(hi - lo + 1, -1);
  std::deque<std::size_t> q{lo};
  dist[0] = 0;
  while (!q.empty()) {
    const std::size_t v = q.front();
    q.pop_front();
    for (std::size_t w = lo; w <= hi; ++w) {
      if (dist[w - lo] >= 0 || std::abs(pos[w] - pos[v]) > R) continue;
      dist[w - lo] = dist[v - lo] + 1;
      q.push_back(w);
    }
  }
  REQUIRE(dist[hi - lo] >= 0);
  return dist[hi - lo] + 1;
}

InterdistanceModel f8h() {
  return InterdistanceModel::hyperexponential({0.92, 0.08}, {1.0 / 12.1534, 1.0 / 40.4655});
}

}  // namespace

TEST_CASE("generate_road: determinism and gap law") {
  auto m = InterdistanceModel::exponential(0.05);
  auto r1 = generate_road(m, 100000, 9);
  auto r2 = generate_road(m, 100000, 9);
  CHECK(r1.positions == r2.positions);
  double mean = r1.positions.back() / static_cast<double>(r1.positions.size());
  CHECK(std::abs(mean - 20.0) < 3.0 * 20.0 / std::sqrt(1e5));

  auto rf = generate_road(f8h(), 100000, 10);
  std::vector<double> gaps(rf.positions.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < rf.positions.size(); ++i) {
    gaps[i] = rf.positions[i] - prev;
    prev = rf.positions[i];
  }
  auto model = f8h();
  CHECK(testutil::ks_distance(gaps, [&](double x) { return model.cdf(x); }) <= 0.006);
}

TEST_CASE("split_components: worked example and singleton roads") {
  RoadSnapshot s{{0.0, 50.0, 200.0, 230.0}, 0};
  auto comps = split_components(s, 100.0);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].start == 0);
  CHECK(comps[0].end == 1);
  CHECK(comps[1].start == 2);
  CHECK(comps[1].end == 3);
  CHECK(comps[0].length == doctest::Approx(50.0));
  CHECK(comps[1].n_vehicles == 2);

  RoadSnapshot iso{{0.0, 200.0, 500.0}, 0};
  auto singles = split_components(iso, 100.0);
  REQUIRE(singles.size() == 3);
  for (const auto& c : singles) {
    CHECK(c.n_vehicles == 1);
    CHECK(shortest_path_nodes(c, iso, 100.0) == 1);
  }
}

TEST_CASE("shortest_path_nodes: hand-traceable chain") {
  RoadSnapshot s{{0.0, 40.0, 90.0, 170.0}, 0};
  auto comps = split_components(s, 100.0);
  REQUIRE(comps.size() == 1);
  CHECK(shortest_path_nodes(comps[0], s, 100.0) == 3);
}

TEST_CASE("greedy equals BFS on random components, with the span bound") {
  SplitMix64 seeds(404);
  int checked = 0;
  int round = 0;
  while (checked < 10000) {
    const bool poisson = round % 2 == 0;
    auto model = poisson
                     ? InterdistanceModel::exponential(1.0 / (8.0 + 20.0 * seeds.uniform01()))
                     : f8h();
    const double R = 40.0 + 80.0 * seeds.uniform01();
    auto road = generate_road(model, 3000, 1000 + round);
    auto comps = split_components(road, R);
    for (std::size_t i = 1; i + 1 < comps.size() && checked < 10000; ++i) {
      const int greedy = shortest_path_nodes(comps[i], road, R);
      const int bfs = bfs_path_nodes(road.positions, comps[i].start, comps[i].end, R);
      CHECK(greedy == bfs);
      CHECK(greedy <= comps[i].n_vehicles);
      CHECK(greedy >= static_cast<int>(std::ceil(comps[i].length / R - 1e-9)) + 1);
      ++checked;
    }
    ++round;
  }
}

TEST_CASE("simulate_stats: Poisson anchors at lambda' = 2") {
  auto m = InterdistanceModel::exponential(0.02);
  auto st = simulate_stats(m, 100.0, 20000, 21);
  CHECK(st.n_components >= 20000);

  // closed-form mean from the analytic module, evaluated in-test
  const double s = std::sqrt(1.0 - 4.0 * std::exp(-2.0));
  const double c = 2.0 / (1.0 + s);
  const double mean_closed = (std::exp(s) - c * std::exp(-1.0)) / (std::exp(1.0) - c * std::exp(s));
  CHECK(st.nb_ci_lo <= mean_closed);
  CHECK(st.nb_ci_hi >= mean_closed);

  const double p1 = std::exp(-2.0);
  const double se = std::sqrt(p1 * (1 - p1) / static_cast<double>(st.n_components));
  CHECK(std::abs(st.nb_pmf[0] - p1) < 3.0 * se);

  CHECK(st.mean_vehicles == doctest::Approx(std::exp(2.0)).epsilon(0.02));
  CHECK(st.mean_lcc ==
        doctest::Approx((1.0 - std::exp(-2.0)) / (0.02 * std::exp(-2.0))).epsilon(0.02));
  CHECK(st.mean_lcc == doctest::Approx(st.mean_span + 100.0).epsilon(1e-12));
}

TEST_CASE("relay transitions harvested from the road match the kernel CDFs") {
  const double R = 100.0;
  SUBCASE("Poisson tau_1 and conditional") {
    auto m = InterdistanceModel::exponential(0.02);
    auto k = RelayKernel::closed_form(m, R);
    SplitMix64 rng(61);
    std::vector<double> t1(100000), tc(100000);
    for (auto& x : t1) x = sample_first_relay_gap(m, R, rng);
    for (auto& x : tc) x = sample_relay_transition(m, R, 80.0, rng);
    CHECK(testutil::ks_distance(t1, [&](double x) { return k.tau1_cdf(x); }) <= 0.01);
    CHECK(testutil::ks_distance(tc, [&](double x) { return k.tau_cond_cdf(80.0, x); }) <=
          0.01);
  }
  SUBCASE("Fig 2 configuration") {
    auto m = InterdistanceModel::hyperexponential({0.95, 0.05}, {1.0 / 14.2, 1.0 / 43.2});
    auto k = RelayKernel::closed_form(m, R);
    SplitMix64 rng(62);
    std::vector<double> tc(100000);
    for (auto& x : tc) x = sample_relay_transition(m, R, 80.0, rng);
    CHECK(testutil::ks_distance(tc, [&](double x) { return k.tau_cond_cdf(80.0, x); }) <=
          0.01);
  }
}

TEST_CASE("simulate_stats input validation") {
  auto m = InterdistanceModel::exponential(0.02);
  CHECK_THROWS_AS(simulate_stats(m, 100.0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_road(m, 1, 1), std::invalid_argument);
}
