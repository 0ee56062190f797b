#pragma once

#include <cstdint>
#include <vector>

#include "hopcalc/interdistance.hpp"

namespace hopcalc {

struct RoadSnapshot {
  std::vector<double> positions;  // strictly increasing
  std::uint64_t seed = 0;
};

// Maximal run of consecutive vehicles with every internal gap <= R.
struct Component {
  std::size_t start = 0, end = 0;  // indices into the snapshot, inclusive
  double length = 0.0;             // span: position[end] - position[start]
  int n_vehicles = 0;
  int n_path_nodes = 0;            // N_b, filled by shortest_path_nodes
};

RoadSnapshot generate_road(const InterdistanceModel& model, std::size_t n_vehicles,
                           std::uint64_t seed);

// All maximal runs, in order. Callers computing statistics drop the first
// and last (censored at the road edges).
std::vector<Component> split_components(const RoadSnapshot& snapshot, double R);

// Greedy chain from the component's first vehicle, always jumping to the
// farthest vehicle within R; returns the node count including the start.
int shortest_path_nodes(const Component& c, const RoadSnapshot& snapshot, double R);

struct SimStats {
  double mean_nb = 0, nb_ci_lo = 0, nb_ci_hi = 0;
  double mean_lcc = 0, lcc_ci_lo = 0, lcc_ci_hi = 0;  // span + R (busy period)
  double mean_span = 0;
  double mean_vehicles = 0, veh_ci_lo = 0, veh_ci_hi = 0;
  std::vector<double> nb_pmf;       // P(N_b = k), k = 1..pmf size
  std::vector<std::uint64_t> nb_counts;
  std::uint64_t n_components = 0;
};

// Generates roads in blocks until n_components_target interior components
// are collected; 95% CIs by normal approximation. mean_lcc is reported in
// the busy-period convention (span + R).
SimStats simulate_stats(const InterdistanceModel& model, double R,
                        std::uint64_t n_components_target, std::uint64_t seed,
                        unsigned threads = 0, std::size_t block_vehicles = 100000);

// Road-level single-transition samplers (ground truth for the kernel CDFs):
// place vehicles after a relay and apply the farthest-under-coverage rule.
double sample_first_relay_gap(const InterdistanceModel& model, double R, SplitMix64& rng);
double sample_relay_transition(const InterdistanceModel& model, double R, double x_prev,
                               SplitMix64& rng);

}  // namespace hopcalc
