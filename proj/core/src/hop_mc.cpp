#include "hopcalc/hop_mc.hpp"

#include <cmath>
#include <stdexcept>

#include "hopcalc/errors.hpp"
#include "hopcalc/parallel.hpp"

namespace hopcalc {

HopDistribution hop_pmf_montecarlo(const RelayKernel& kernel, std::uint64_t n_samples,
                                   int k_max, std::uint64_t seed, unsigned threads) {
  if (n_samples < 10000)
    throw std::invalid_argument("hop_pmf_montecarlo: need n_samples >= 1e4");
  if (k_max < 1) throw std::invalid_argument("hop_pmf_montecarlo: k_max >= 1");
  if (threads == 0) threads = default_threads();

  const double R = kernel.coverage_radius();
  std::vector<std::vector<std::uint64_t>> counts(
      threads, std::vector<std::uint64_t>(static_cast<std::size_t>(k_max) + 1, 0));

  parallel_chunks(n_samples, threads, [&](unsigned w, std::uint64_t b, std::uint64_t e) {
    auto& c = counts[w];
    for (std::uint64_t i = b; i < e; ++i) {
      SplitMix64 rng = substream(seed, i);
      double x = kernel.sample_tau1(rng);
      int k = 1;
      while (x <= R && k <= k_max) {
        x = kernel.sample_tau_cond(x, rng);
        ++k;
      }
      if (k > k_max) ++c[0];  // slot 0 collects the tail
      else ++c[static_cast<std::size_t>(k)];
    }
  });

  HopDistribution d;
  d.method = HopMethod::MonteCarlo;
  d.k_max = k_max;
  d.n_samples = n_samples;
  d.seed = seed;
  d.p.resize(k_max);
  d.se.resize(k_max);
  std::uint64_t tail = 0;
  for (auto& c : counts) tail += c[0];
  const double n = static_cast<double>(n_samples);
  for (int k = 1; k <= k_max; ++k) {
    std::uint64_t ck = 0;
    for (auto& c : counts) ck += c[static_cast<std::size_t>(k)];
    const double p = static_cast<double>(ck) / n;
    d.p[k - 1] = p;
    d.se[k - 1] = std::sqrt(p * (1.0 - p) / n);
  }
  d.tail_mass = static_cast<double>(tail) / n;
  return d;
}

double hop_pmf_quadrature(const RelayKernel& kernel, int k, double grid_step) {
  if (k < 1 || k > 5)
    throw std::invalid_argument("hop_pmf_quadrature: 1 <= k <= 5 (cost grows fast)");
  const double R = kernel.coverage_radius();
  if (k == 1) return 1.0 - kernel.tau1_cdf(R);
  if (!(grid_step > 0.0) || grid_step > R / 10.0)
    throw std::invalid_argument("hop_pmf_quadrature: grid_step in (0, R/10]");

  const std::size_t cells = static_cast<std::size_t>(std::ceil(R / grid_step));
  const double s = R / static_cast<double>(cells);

  // forward measure over grid cells: mass[j] ~ P(x_i in cell j, chain alive),
  // carried at cell midpoints; level 1 from dF_tau1, levels 2..k-1 from the
  // conditional CDF increments
  std::vector<double> mass(cells), next(cells);
  double prev = kernel.tau1_cdf(0.0);
  for (std::size_t j = 0; j < cells; ++j) {
    double cur = kernel.tau1_cdf(s * static_cast<double>(j + 1));
    mass[j] = cur - prev;
    prev = cur;
  }
  for (int level = 2; level <= k - 1; ++level) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t j = 0; j < cells; ++j) {
      if (mass[j] == 0.0) continue;
      const double xp = s * (static_cast<double>(j) + 0.5);
      const double a = R - xp;
      const std::size_t j0 = static_cast<std::size_t>(std::floor(a / s));
      double prevc = kernel.tau_cond_cdf(xp, s * static_cast<double>(j0));
      for (std::size_t j2 = j0; j2 < cells; ++j2) {
        double curc = kernel.tau_cond_cdf(xp, s * static_cast<double>(j2 + 1));
        next[j2] += mass[j] * (curc - prevc);
        prevc = curc;
      }
    }
    mass.swap(next);
  }
  // final weight: P(tau_k > R | x_{k-1})
  double total = 0.0;
  for (std::size_t j = 0; j < cells; ++j) {
    if (mass[j] == 0.0) continue;
    const double xp = s * (static_cast<double>(j) + 0.5);
    total += mass[j] * (1.0 - kernel.tau_cond_cdf(xp, R));
  }
  return total;
}

MeanHops mean_hops(const HopDistribution& dist) {
  if (dist.tail_mass > 1e-3)
    throw numerical_error("mean_hops: truncation-dominated estimate (tail above 1e-3)");
  MeanHops m;
  double s1 = 0.0, s2 = 0.0;
  for (int k = 1; k <= dist.k_max; ++k) {
    const double p = dist.p[k - 1];
    s1 += static_cast<double>(k) * p;
    s2 += static_cast<double>(k) * static_cast<double>(k) * p;
  }
  m.mean = s1;
  m.tail_mean_lb = dist.tail_mass * static_cast<double>(dist.k_max + 1);
  if (dist.method == HopMethod::MonteCarlo && dist.n_samples > 0) {
    const double var = s2 - s1 * s1;
    m.se = std::sqrt(std::max(var, 0.0) / static_cast<double>(dist.n_samples));
  }
  return m;
}

}  // namespace hopcalc
