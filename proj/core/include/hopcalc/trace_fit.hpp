#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hopcalc/interdistance.hpp"

namespace hopcalc {

// Position snapshots of a road segment over time.
struct TraceDataset {
  struct Snapshot {
    double time = 0.0;               // seconds
    std::vector<double> positions;   // meters, sorted ascending
  };
  std::vector<Snapshot> snapshots;   // strictly increasing times
  std::string source;
  std::uint64_t malformed_rows = 0;
};

// Maps one raw CSV row (split on commas) to (time_s, position_m); return
// nullopt to drop the row. Hook point for foreign trace schemas.
using RowMapper =
    std::function<std::optional<std::pair<double, double>>(std::span<const std::string>)>;

// Canonical format: header "time_s,vehicle_id,position_m", one row per
// vehicle observation. Rows may arrive in any order.
TraceDataset load_traces(const std::filesystem::path& path, RowMapper mapper = {});
void save_traces(const TraceDataset& dataset, const std::filesystem::path& path);

// Merge preserving snapshot times from both (concatenating days); sources
// joined with '+'.
TraceDataset merge_datasets(const TraceDataset& a, const TraceDataset& b);

// Drops snapshots before `warmup` seconds, then keeps the earliest snapshot
// of every `every`-second window (window phase starts at the warmup edge).
TraceDataset preprocess(const TraceDataset& dataset, double warmup, double every);

// Consecutive position differences pooled across snapshots.
std::vector<double> interdistances(const TraceDataset& dataset);

struct CompareConfig {
  int mixture_components = 2;
  std::uint64_t mc_samples = 40000;       // model column chain count
  std::uint64_t sim_components = 20000;   // simulation column component count
  int k_max = 4096;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct CompareRow {
  double R = 0.0;
  double mean_nb_trace = 0.0;
  double mean_nb_model = 0.0;
  double mean_nb_sim = 0.0;
  std::uint64_t trace_components = 0;
};

struct CompareReport {
  InterdistanceModel fitted;
  std::vector<CompareRow> rows;
};

// Per R: (a) component/path statistics run directly on the trace snapshots,
// (b) chain Monte Carlo on the kernel of the fitted model, (c) road
// simulation driven by the fitted model.
CompareReport compare_report(const TraceDataset& dataset, std::span<const double> R_grid,
                             const CompareConfig& config = {});

// Synthetic dataset sampled from a model: one snapshot every `every` seconds
// on [0, duration], each an independent road of length road_length.
TraceDataset generate_synthetic(const InterdistanceModel& model, double road_length,
                                double duration, double every, std::uint64_t seed);

}  // namespace hopcalc
