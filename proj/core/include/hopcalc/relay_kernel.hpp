#pragma once

#include <span>
#include <vector>

#include "hopcalc/interdistance.hpp"
#include "hopcalc/rng.hpp"

namespace hopcalc {

enum class KernelMode { ClosedFormPoisson, ClosedFormHyperexp2, NumericalRenewal };

// Markov kernel of the relay-gap process tau_n under the farthest-reachable
// relay rule: CDF of tau_1 and of tau_n given tau_{n-1}. Closed forms for
// exponential and two-component hyperexponential gaps; a renewal-equation
// solver covers any other gap law. Immutable after construction (including
// precomputed grids); concurrent reads are safe.
class RelayKernel {
 public:
  // Picks the closed form matching the model kind; throws if none exists
  // (use numerical() for those).
  static RelayKernel closed_form(InterdistanceModel model, double R);

  // Renewal-equation solver on a uniform grid. step defaults to R/1000 and
  // must satisfy step <= R/200; x_max defaults to 20 mean gaps.
  static RelayKernel numerical(InterdistanceModel model, double R,
                               double step = 0.0, double x_max = 0.0);

  double tau1_cdf(double x) const;
  // Conditional CDF given tau_{n-1} = x_prev, 0 < x_prev <= R. Support
  // starts at R - x_prev.
  double tau_cond_cdf(double x_prev, double x) const;

  // Renewal density g on the given grid points (NumericalRenewal mode;
  // grid inside [R - x_prev, R]).
  std::vector<double> renewal_density(double x_prev, std::span<const double> grid) const;

  // Inverse-CDF sampling by bisection, absolute tolerance 1e-9 * R.
  double sample_tau1(SplitMix64& rng) const;
  double sample_tau_cond(double x_prev, SplitMix64& rng) const;

  double coverage_radius() const { return R_; }
  KernelMode mode() const { return mode_; }
  const InterdistanceModel& model() const { return model_; }
  double grid_step() const { return step_; }
  double x_max() const { return x_max_; }

 private:
  RelayKernel(InterdistanceModel model, double R, KernelMode mode);

  double tau1_cdf_poisson(double x) const;
  double tau_cond_cdf_poisson(double x_prev, double x) const;
  double tau1_cdf_hyper(double x) const;
  double tau_cond_cdf_hyper(double x_prev, double x) const;
  double tau1_cdf_numerical(double x) const;
  double tau_cond_cdf_numerical(double x_prev, double x) const;

  // cumulative of g*(1-F(R-u)) over [a, x] on the numeric grid, a = R - x_prev
  std::vector<double> cond_branch1_table(double x_prev) const;
  double invert_cdf(const std::vector<double>* table, double a, double v) const;

  InterdistanceModel model_;
  double R_ = 0.0;
  KernelMode mode_;

  // hyperexp-2 shortcuts
  double a1_ = 0, a2_ = 0, l1_ = 0, l2_ = 0, lm_ = 0;

  // numerical mode: plain renewal density h on [0, R] and the tau_1 CDF table
  double step_ = 0.0, x_max_ = 0.0;
  std::vector<double> h_;         // h[i] at u = i*step
  std::vector<double> tau1_tab_;  // tau1 CDF at u = i*step, renormalized at R
};

}  // namespace hopcalc
