#include "hopcalc/trace_fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "hopcalc/errors.hpp"
#include "hopcalc/hop_mc.hpp"
#include "hopcalc/relay_kernel.hpp"
#include "hopcalc/road_sim.hpp"

namespace hopcalc {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

}  // namespace

TraceDataset load_traces(const std::filesystem::path& path, RowMapper mapper) {
  std::ifstream in(path);
  if (!in) throw io_error("load_traces: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("load_traces: empty file " + path.string());
  if (!mapper && line.find("time_s") == std::string::npos)
    throw std::invalid_argument("load_traces: missing canonical header in " + path.string());

  std::map<double, std::vector<double>> by_time;
  std::uint64_t bad = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cols = split_row(line);
    std::optional<std::pair<double, double>> parsed;
    if (mapper) {
      parsed = mapper(cols);
    } else if (cols.size() >= 3) {
      try {
        parsed = std::make_pair(std::stod(cols[0]), std::stod(cols[2]));
      } catch (const std::exception&) {
        parsed = std::nullopt;
      }
    }
    if (!parsed) {
      ++bad;
      continue;
    }
    by_time[parsed->first].push_back(parsed->second);
  }
  TraceDataset d;
  d.source = path.filename().string();
  d.malformed_rows = bad;
  for (auto& [t, pos] : by_time) {
    std::sort(pos.begin(), pos.end());
    d.snapshots.push_back({t, std::move(pos)});
  }
  if (d.snapshots.empty()) throw std::invalid_argument("load_traces: no rows parsed");
  return d;
}

void save_traces(const TraceDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("save_traces: cannot open " + path.string());
  out << "time_s,vehicle_id,position_m\n";
  char buf[96];
  for (const auto& s : dataset.snapshots) {
    for (std::size_t i = 0; i < s.positions.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g\n", s.time, i, s.positions[i]);
      out << buf;
    }
  }
}

TraceDataset merge_datasets(const TraceDataset& a, const TraceDataset& b) {
  TraceDataset d;
  d.source = a.source + "+" + b.source;
  d.malformed_rows = a.malformed_rows + b.malformed_rows;
  d.snapshots = a.snapshots;
  d.snapshots.insert(d.snapshots.end(), b.snapshots.begin(), b.snapshots.end());
  std::stable_sort(d.snapshots.begin(), d.snapshots.end(),
                   [](const auto& x, const auto& y) { return x.time < y.time; });
  return d;
}

TraceDataset preprocess(const TraceDataset& dataset, double warmup, double every) {
  if (warmup < 0.0) throw std::invalid_argument("preprocess: warmup >= 0");
  if (!(every > 0.0)) throw std::invalid_argument("preprocess: every > 0");
  TraceDataset d;
  d.source = dataset.source;
  d.malformed_rows = dataset.malformed_rows;
  double window_open = -std::numeric_limits<double>::infinity();
  for (const auto& s : dataset.snapshots) {
    if (s.time < warmup) continue;
    // earliest snapshot per window [warmup + j*every, warmup + (j+1)*every)
    const double wstart =
        warmup + std::floor((s.time - warmup) / every) * every;
    if (wstart > window_open) {
      d.snapshots.push_back(s);
      window_open = wstart;
    }
  }
  if (d.snapshots.empty()) throw numerical_error("preprocess: nothing retained");
  return d;
}

std::vector<double> interdistances(const TraceDataset& dataset) {
  if (dataset.snapshots.empty()) throw std::invalid_argument("interdistances: empty dataset");
  std::vector<double> gaps;
  for (const auto& s : dataset.snapshots)
    for (std::size_t i = 1; i < s.positions.size(); ++i)
      gaps.push_back(s.positions[i] - s.positions[i - 1]);
  return gaps;
}

CompareReport compare_report(const TraceDataset& dataset, std::span<const double> R_grid,
                             const CompareConfig& config) {
  auto gaps = interdistances(dataset);
  auto fit = fit_hyperexponential(gaps, config.mixture_components, {.seed = config.seed});
  CompareReport rep{fit.model, {}};

  for (double R : R_grid) {
    CompareRow row;
    row.R = R;

    // (a) component/path statistics straight off the trace snapshots
    std::uint64_t n = 0;
    double nb_sum = 0.0;
    for (const auto& s : dataset.snapshots) {
      if (s.positions.size() < 3) continue;
      RoadSnapshot road{s.positions, 0};
      auto comps = split_components(road, R);
      if (comps.size() <= 2) continue;
      for (std::size_t ci = 1; ci + 1 < comps.size(); ++ci) {
        nb_sum += shortest_path_nodes(comps[ci], road, R);
        ++n;
      }
    }
    if (n == 0) throw numerical_error("compare_report: no interior trace components at R=" +
                                      std::to_string(R));
    row.mean_nb_trace = nb_sum / static_cast<double>(n);
    row.trace_components = n;

    // (b) chain Monte Carlo on the fitted kernel
    RelayKernel kernel = RelayKernel::closed_form(fit.model, R);
    auto dist = hop_pmf_montecarlo(kernel, config.mc_samples, config.k_max,
                                   mix64(config.seed) + 17, config.threads);
    row.mean_nb_model = mean_hops(dist).mean;

    // (c) road simulation of the fitted model
    auto sim = simulate_stats(fit.model, R, config.sim_components,
                              mix64(config.seed) + 23, config.threads);
    row.mean_nb_sim = sim.mean_nb;

    rep.rows.push_back(row);
  }
  return rep;
}

TraceDataset generate_synthetic(const InterdistanceModel& model, double road_length,
                                double duration, double every, std::uint64_t seed) {
  if (!(road_length > 0.0) || !(every > 0.0) || duration < 0.0)
    throw std::invalid_argument("generate_synthetic: bad geometry");
  TraceDataset d;
  d.source = "synthetic";
  std::uint64_t idx = 0;
  for (double t = 0.0; t <= duration + 1e-9; t += every, ++idx) {
    SplitMix64 rng = substream(seed, idx);
    TraceDataset::Snapshot s;
    s.time = t;
    double pos = 0.0;
    for (;;) {
      pos += model.sample(rng);
      if (pos > road_length) break;
      s.positions.push_back(pos);
    }
    if (s.positions.size() >= 2) d.snapshots.push_back(std::move(s));
  }
  if (d.snapshots.empty()) throw numerical_error("generate_synthetic: nothing generated");
  return d;
}

}  // namespace hopcalc
