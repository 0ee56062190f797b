#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hopcalc/rng.hpp"

namespace hopcalc {

enum class ModelKind { Exponential, Hyperexponential, Empirical };

// Law of the gap between consecutive vehicles. Immutable after construction;
// concurrent reads are safe. All distances in meters, rates in 1/meters.
class InterdistanceModel {
 public:
  static InterdistanceModel exponential(double rate);
  // weights > 0 summing to 1 (1e-12), rates > 0, same length K >= 1
  static InterdistanceModel hyperexponential(std::vector<double> weights,
                                             std::vector<double> rates);
  // nonnegative samples; stored sorted ascending
  static InterdistanceModel empirical(std::vector<double> samples);

  ModelKind kind() const { return kind_; }

  double cdf(double x) const;
  // Density; empty for the Empirical kind (step CDF has no density).
  std::optional<double> pdf(double x) const;
  double mean() const;
  double sample(SplitMix64& rng) const;

  // lambda_m = lambda_1(1-alpha_1) + lambda_2(1-alpha_2); two-component
  // hyperexponential only.
  double mixing_rate() const;

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& rates() const { return rates_; }
  const std::vector<double>& samples() const { return samples_; }

  // "kind=hyperexp; alphas=0.92,0.08; means=12.1534,40.4655" (means = 1/rate)
  std::string serialize() const;
  static InterdistanceModel parse(const std::string& text);

 private:
  InterdistanceModel() = default;
  ModelKind kind_ = ModelKind::Exponential;
  std::vector<double> weights_;  // hyperexp
  std::vector<double> rates_;    // exponential (size 1) or hyperexp
  std::vector<double> samples_;  // empirical, sorted
};

struct FitConfig {
  int max_iter = 2000;
  double tol = 1e-8;  // relative log-likelihood change
  std::uint64_t seed = 0;
};

struct FitResult {
  InterdistanceModel model = InterdistanceModel::exponential(1.0);
  int iterations = 0;
  double log_likelihood = 0.0;
  std::vector<double> ll_trace;  // per-iteration log-likelihood
};

// EM for exponential mixtures. Initial rates from a k-means style split of
// the log-samples, uniform initial weights. Throws numerical_error on
// degenerate input (all samples equal).
FitResult fit_hyperexponential(std::span<const double> samples, int k,
                               const FitConfig& config = {});

}  // namespace hopcalc
