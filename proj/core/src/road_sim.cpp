#include "hopcalc/road_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hopcalc/errors.hpp"
#include "hopcalc/parallel.hpp"

namespace hopcalc {

RoadSnapshot generate_road(const InterdistanceModel& model, std::size_t n_vehicles,
                           std::uint64_t seed) {
  if (n_vehicles < 2) throw std::invalid_argument("generate_road: n_vehicles >= 2");
  RoadSnapshot s;
  s.seed = seed;
  s.positions.resize(n_vehicles);
  SplitMix64 rng = substream(seed, 0);
  double pos = 0.0;
  for (std::size_t i = 0; i < n_vehicles; ++i) {
    pos += model.sample(rng);
    s.positions[i] = pos;
  }
  return s;
}

std::vector<Component> split_components(const RoadSnapshot& snapshot, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("split_components: R > 0");
  const auto& p = snapshot.positions;
  std::vector<Component> out;
  if (p.empty()) return out;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= p.size(); ++i) {
    if (i == p.size() || p[i] - p[i - 1] > R) {
      Component c;
      c.start = start;
      c.end = i - 1;
      c.length = p[c.end] - p[c.start];
      c.n_vehicles = static_cast<int>(c.end - c.start + 1);
      out.push_back(c);
      start = i;
    }
  }
  return out;
}

int shortest_path_nodes(const Component& c, const RoadSnapshot& snapshot, double R) {
  const auto& p = snapshot.positions;
  if (c.end >= p.size() || c.start > c.end)
    throw std::invalid_argument("shortest_path_nodes: component out of range");
  std::size_t i = c.start;
  int nodes = 1;
  while (i < c.end) {
    // farthest vehicle within coverage of p[i]
    auto it = std::upper_bound(p.begin() + i + 1, p.begin() + c.end + 1, p[i] + R);
    std::size_t j = static_cast<std::size_t>(it - p.begin()) - 1;
    if (j == i)
      throw std::invalid_argument("shortest_path_nodes: gap above R inside component");
    i = j;
    ++nodes;
  }
  return nodes;
}

SimStats simulate_stats(const InterdistanceModel& model, double R,
                        std::uint64_t n_components_target, std::uint64_t seed,
                        unsigned threads, std::size_t block_vehicles) {
  if (n_components_target < 1000)
    throw std::invalid_argument("simulate_stats: n_components_target >= 1e3");
  if (threads == 0) threads = default_threads();

  struct Acc {
    double nb = 0, nb2 = 0, sp = 0, sp2 = 0, veh = 0, veh2 = 0;
    std::uint64_t n = 0;
    std::vector<std::uint64_t> counts;
    void add(int k, double span, int vcount) {
      nb += k;
      nb2 += static_cast<double>(k) * k;
      sp += span;
      sp2 += span * span;
      veh += vcount;
      veh2 += static_cast<double>(vcount) * vcount;
      ++n;
      if (counts.size() < static_cast<std::size_t>(k)) counts.resize(k, 0);
      ++counts[k - 1];
    }
  };

  std::vector<Acc> accs(threads);
  std::uint64_t next_block = 0;
  std::size_t block = block_vehicles;
  std::uint64_t total = 0;

  while (total < n_components_target) {
    const std::uint64_t first = next_block;
    parallel_chunks(threads, threads, [&](unsigned w, std::uint64_t b, std::uint64_t e) {
      for (std::uint64_t bi = b; bi < e; ++bi) {
        RoadSnapshot road = generate_road(model, block, mix64(seed) + first + bi);
        auto comps = split_components(road, R);
        if (comps.size() <= 2) continue;
        for (std::size_t ci = 1; ci + 1 < comps.size(); ++ci) {
          int nb = shortest_path_nodes(comps[ci], road, R);
          accs[w].add(nb, comps[ci].length, comps[ci].n_vehicles);
        }
      }
    });
    next_block += threads;
    std::uint64_t t = 0;
    for (const auto& a : accs) t += a.n;
    if (t == total) {
      block *= 2;  // R too large for this block size; try longer roads
      if (block > 64 * block_vehicles)
        throw numerical_error("simulate_stats: components never complete; R too large");
    }
    total = t;
  }

  Acc sum;
  std::size_t kcap = 0;
  for (const auto& a : accs) kcap = std::max(kcap, a.counts.size());
  sum.counts.assign(kcap, 0);
  for (const auto& a : accs) {
    sum.nb += a.nb;
    sum.nb2 += a.nb2;
    sum.sp += a.sp;
    sum.sp2 += a.sp2;
    sum.veh += a.veh;
    sum.veh2 += a.veh2;
    sum.n += a.n;
    for (std::size_t i = 0; i < a.counts.size(); ++i) sum.counts[i] += a.counts[i];
  }

  const double n = static_cast<double>(sum.n);
  auto ci = [&](double s, double s2, double& lo, double& hi) {
    const double mean = s / n;
    const double var = std::max(0.0, s2 / n - mean * mean);
    const double half = 1.959963984540054 * std::sqrt(var / n);
    lo = mean - half;
    hi = mean + half;
    return mean;
  };

  SimStats st;
  st.n_components = sum.n;
  st.mean_nb = ci(sum.nb, sum.nb2, st.nb_ci_lo, st.nb_ci_hi);
  st.mean_span = sum.sp / n;
  double dummy_lo, dummy_hi;
  ci(sum.sp, sum.sp2, dummy_lo, dummy_hi);
  st.mean_lcc = st.mean_span + R;  // busy-period convention
  st.lcc_ci_lo = dummy_lo + R;
  st.lcc_ci_hi = dummy_hi + R;
  st.mean_vehicles = ci(sum.veh, sum.veh2, st.veh_ci_lo, st.veh_ci_hi);
  st.nb_counts = sum.counts;
  st.nb_pmf.resize(sum.counts.size());
  for (std::size_t i = 0; i < sum.counts.size(); ++i)
    st.nb_pmf[i] = static_cast<double>(sum.counts[i]) / n;
  return st;
}

namespace {

double sample_gap_above(const InterdistanceModel& model, double a, SplitMix64& rng) {
  if (a <= 0.0) return model.sample(rng);
  if (model.kind() == ModelKind::Empirical) {
    const auto& s = model.samples();
    auto it = std::upper_bound(s.begin(), s.end(), a);
    if (it == s.end())
      throw numerical_error("sample_gap_above: no empirical mass beyond R - x_prev");
    const std::size_t lo = static_cast<std::size_t>(it - s.begin());
    std::size_t i = lo + static_cast<std::size_t>(rng.uniform01() * (s.size() - lo));
    if (i >= s.size()) i = s.size() - 1;
    return s[i];
  }
  const double Fa = model.cdf(a);
  const double v = Fa + rng.uniform01() * (1.0 - Fa);
  double lo = a, hi = a + 4.0 * model.mean();
  while (model.cdf(hi) < v) hi *= 2.0;
  const double tol = 1e-9 * (a + model.mean());
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (model.cdf(mid) < v ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double farthest_under_coverage(const InterdistanceModel& model, double R, double first,
                               SplitMix64& rng) {
  if (first > R) return first;  // next node beyond coverage
  double reach = first;
  for (;;) {
    const double next = reach + model.sample(rng);
    if (next > R) return reach;
    reach = next;
  }
}

}  // namespace

double sample_first_relay_gap(const InterdistanceModel& model, double R, SplitMix64& rng) {
  return farthest_under_coverage(model, R, model.sample(rng), rng);
}

double sample_relay_transition(const InterdistanceModel& model, double R, double x_prev,
                               SplitMix64& rng) {
  if (!(x_prev > 0.0) || x_prev > R)
    throw std::invalid_argument("sample_relay_transition: need 0 < x_prev <= R");
  const double first = sample_gap_above(model, R - x_prev, rng);
  return farthest_under_coverage(model, R, first, rng);
}

}  // namespace hopcalc
