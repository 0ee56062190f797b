#pragma once

#include <cstdint>
#include <vector>

#include "hopcalc/relay_kernel.hpp"

namespace hopcalc {

enum class HopMethod { MonteCarlo, Quadrature, PoissonRecurrence, PoissonClosedForm };

// Truncated law of N_b, the node count of the maximal shortest path.
// pmf(k) for k = 1..k_max; chains beyond k_max accrue to tail_mass.
struct HopDistribution {
  std::vector<double> p;       // p[k-1] = P(N_b = k)
  std::vector<double> se;     // per-k standard error (Monte Carlo only)
  int k_max = 0;
  double tail_mass = 0.0;
  HopMethod method = HopMethod::MonteCarlo;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;

  double pmf(int k) const { return p.at(static_cast<std::size_t>(k) - 1); }
  double stderr_at(int k) const { return se.at(static_cast<std::size_t>(k) - 1); }
};

struct MeanHops {
  double mean = 0.0;
  double se = 0.0;             // MonteCarlo only, else 0
  double tail_mean_lb = 0.0;   // at least this much mean is missing in the tail
};

// Theorem-2 event sampled as a relay chain: N_b = index of the first
// tau_k > R. Parallel across samples; per-sample substreams make the result
// independent of the schedule.
HopDistribution hop_pmf_montecarlo(const RelayKernel& kernel, std::uint64_t n_samples,
                                   int k_max, std::uint64_t seed,
                                   unsigned threads = 0);

// P(N_b = k) by iterated quadrature of the nested integral (k <= 5); the
// conditional transition measure comes from CDF increments at grid_step
// resolution.
double hop_pmf_quadrature(const RelayKernel& kernel, int k, double grid_step);

// Requires tail_mass <= 1e-3 (throws numerical_error otherwise).
MeanHops mean_hops(const HopDistribution& dist);

}  // namespace hopcalc
