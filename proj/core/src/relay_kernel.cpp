#include "hopcalc/relay_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hopcalc/errors.hpp"

namespace hopcalc {

namespace {

// (1 - e^{-e*x}) / e, stable for small e
double em1(double e, double x) {
  if (e == 0.0) return x;
  return -std::expm1(-e * x) / e;
}

double lerp_table(const std::vector<double>& tab, double step, double x) {
  if (x <= 0.0) return tab.front();
  double pos = x / step;
  auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= tab.size()) return tab.back();
  double frac = pos - static_cast<double>(i);
  return tab[i] + frac * (tab[i + 1] - tab[i]);
}

}  // namespace

RelayKernel::RelayKernel(InterdistanceModel model, double R, KernelMode mode)
    : model_(std::move(model)), R_(R), mode_(mode) {
  if (!(R > 0.0)) throw std::invalid_argument("relay kernel: R must be > 0");
  if (mode_ == KernelMode::ClosedFormHyperexp2) {
    a1_ = model_.weights()[0];
    a2_ = model_.weights()[1];
    l1_ = model_.rates()[0];
    l2_ = model_.rates()[1];
    lm_ = model_.mixing_rate();
  }
}

RelayKernel RelayKernel::closed_form(InterdistanceModel model, double R) {
  switch (model.kind()) {
    case ModelKind::Exponential:
      return RelayKernel(std::move(model), R, KernelMode::ClosedFormPoisson);
    case ModelKind::Hyperexponential:
      if (model.rates().size() == 2)
        return RelayKernel(std::move(model), R, KernelMode::ClosedFormHyperexp2);
      throw std::invalid_argument(
          "relay kernel: closed form exists only for K=2 mixtures; use numerical()");
    case ModelKind::Empirical:
      throw std::invalid_argument("relay kernel: no closed form for empirical models");
  }
  throw std::invalid_argument("relay kernel: unknown model kind");
}

RelayKernel RelayKernel::numerical(InterdistanceModel model, double R, double step,
                                   double x_max) {
  if (!model.pdf(0.0).has_value())
    throw std::invalid_argument("relay kernel: numerical mode needs a density");
  RelayKernel k(std::move(model), R, KernelMode::NumericalRenewal);
  if (step <= 0.0) step = R / 1000.0;
  if (step > R / 200.0)
    throw std::invalid_argument("relay kernel: grid step must be <= R/200");
  std::size_t cells = static_cast<std::size_t>(std::ceil(R / step));
  k.step_ = R / static_cast<double>(cells);
  k.x_max_ = x_max > 0.0 ? x_max : 20.0 * k.model_.mean();
  if (k.x_max_ < R) throw std::invalid_argument("relay kernel: x_max must be >= R");

  // plain renewal density h = sum of self-convolutions of f, as the
  // trapezoid-discretized Volterra equation h = f + f*h on [0, R]
  const std::size_t n = cells + 1;
  const double s = k.step_;
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = *k.model_.pdf(s * static_cast<double>(i));
  k.h_.assign(n, 0.0);
  k.h_[0] = f[0];
  const double denom = 1.0 - 0.5 * s * f[0];
  if (denom <= 0.0) throw numerical_error("renewal solve: step too coarse for f(0)");
  for (std::size_t i = 1; i < n; ++i) {
    double conv = 0.5 * f[i] * k.h_[0];
    for (std::size_t j = 1; j < i; ++j) conv += f[j] * k.h_[i - j];
    k.h_[i] = (f[i] + s * conv) / denom;
    if (!std::isfinite(k.h_[i]) || std::abs(k.h_[i]) > 1e12)
      throw numerical_error("renewal solve: divergent density");
  }

  // tau_1 CDF on [0, R]: integral of h(u) (1 - F(R-u)); pinned to F(R) at R
  k.tau1_tab_.assign(n, 0.0);
  auto W = [&](std::size_t i) {
    return 1.0 - k.model_.cdf(R - s * static_cast<double>(i));
  };
  double acc = 0.0, wprev = k.h_[0] * W(0);
  for (std::size_t i = 1; i < n; ++i) {
    double wcur = k.h_[i] * W(i);
    acc += 0.5 * s * (wprev + wcur);
    k.tau1_tab_[i] = acc;
    wprev = wcur;
  }
  const double FR = k.model_.cdf(R);
  if (acc > 0.0)
    for (double& v : k.tau1_tab_) v *= FR / acc;
  return k;
}

// ---------------------------------------------------------------- Poisson

double RelayKernel::tau1_cdf_poisson(double x) const {
  const double lam = model_.rates()[0];
  if (x >= R_) return -std::expm1(-lam * x);
  return std::exp(-lam * (R_ - x)) * -std::expm1(-lam * x);
}

double RelayKernel::tau_cond_cdf_poisson(double x_prev, double x) const {
  const double lam = model_.rates()[0];
  const double a = R_ - x_prev;
  if (x <= a) return 0.0;
  if (x >= R_) return -std::expm1(-lam * (x - a));
  return std::exp(-lam * (R_ - x)) - std::exp(-lam * x_prev);
}

// ---------------------------------------------------------------- hyperexp-2

double RelayKernel::tau1_cdf_hyper(double x) const {
  if (x >= R_) return model_.cdf(x);
  const double t1 = (l1_ * l2_ / lm_) *
                    (a1_ * std::exp(-l1_ * R_) / l1_ * std::expm1(l1_ * x) +
                     a2_ * std::exp(-l2_ * R_) / l2_ * std::expm1(l2_ * x));
  const double coef =
      a1_ * l1_ * (1.0 - l2_ / lm_) + a2_ * l2_ * (1.0 - l1_ / lm_);
  const double t2 = coef * (a1_ * std::exp(-l1_ * R_) * em1(lm_ - l1_, x) +
                            a2_ * std::exp(-l2_ * R_) * em1(lm_ - l2_, x));
  return t1 + t2;
}

double RelayKernel::tau_cond_cdf_hyper(double x_prev, double x) const {
  const double a = R_ - x_prev;
  if (x <= a) return 0.0;
  const double e1a = std::exp(-l1_ * a), e2a = std::exp(-l2_ * a);
  if (x >= R_)
    return 1.0 - (a1_ * std::exp(-l1_ * x) + a2_ * std::exp(-l2_ * x)) /
                     (a1_ * e1a + a2_ * e2a);
  const double t1 =
      a1_ * (l2_ / lm_) * (std::exp(-l1_ * (R_ - x)) - std::exp(-l1_ * x_prev)) +
      a2_ * (l1_ / lm_) * (std::exp(-l2_ * (R_ - x)) - std::exp(-l2_ * x_prev));
  const double num = a1_ * l1_ * (1.0 - l2_ / lm_) * e1a +
                     a2_ * l2_ * (1.0 - l1_ / lm_) * e2a;
  const double den = a1_ * e1a + a2_ * e2a;
  // bracket * e^{lm a} collapses to exp(-l_i x_prev) factors
  const double brak = a1_ * std::exp(-l1_ * x_prev) * em1(lm_ - l1_, x - a) +
                      a2_ * std::exp(-l2_ * x_prev) * em1(lm_ - l2_, x - a);
  return t1 + (num / den) * brak;
}

// ---------------------------------------------------------------- numerical

double RelayKernel::tau1_cdf_numerical(double x) const {
  if (x > x_max_) throw numerical_error("tau1_cdf: x beyond renewal domain cap");
  if (x >= R_) return model_.cdf(x);
  return lerp_table(tau1_tab_, step_, x);
}

std::vector<double> RelayKernel::cond_branch1_table(double x_prev) const {
  const double a = R_ - x_prev;
  const std::size_t cells = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil((R_ - a) / step_)));
  const double sl = (R_ - a) / static_cast<double>(cells);
  const std::size_t n = cells + 1;

  std::vector<double> f(n), g(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = *model_.pdf(a + sl * static_cast<double>(i));
  // g(x) = f(x) + int_a^x f(u) h(x-u) du
  for (std::size_t i = 0; i < n; ++i) {
    double conv = 0.0;
    if (i > 0) {
      conv = 0.5 * (f[0] * lerp_table(h_, step_, sl * static_cast<double>(i)) +
                    f[i] * h_[0]);
      for (std::size_t j = 1; j < i; ++j)
        conv += f[j] * lerp_table(h_, step_, sl * static_cast<double>(i - j));
      conv *= sl;
    }
    g[i] = f[i] + conv;
  }

  std::vector<double> cdf(n, 0.0);
  auto W = [&](std::size_t i) {
    return 1.0 - model_.cdf(R_ - (a + sl * static_cast<double>(i)));
  };
  const double norm = 1.0 - model_.cdf(a);
  double acc = 0.0, wprev = g[0] * W(0);
  for (std::size_t i = 1; i < n; ++i) {
    double wcur = g[i] * W(i);
    acc += 0.5 * sl * (wprev + wcur);
    cdf[i] = acc / norm;
    wprev = wcur;
  }
  // pin the branch joint to its exact value (branch continuity)
  const double joint = (model_.cdf(R_) - model_.cdf(a)) / norm;
  if (acc > 0.0) {
    const double scale = joint / cdf.back();
    for (double& v : cdf) v *= scale;
  }
  return cdf;
}

double RelayKernel::tau_cond_cdf_numerical(double x_prev, double x) const {
  const double a = R_ - x_prev;
  if (x <= a) return 0.0;
  if (x > x_max_) throw numerical_error("tau_cond_cdf: x beyond renewal domain cap");
  if (x >= R_)
    return (model_.cdf(x) - model_.cdf(a)) / (1.0 - model_.cdf(a));
  auto tab = cond_branch1_table(x_prev);
  const double sl = (R_ - a) / static_cast<double>(tab.size() - 1);
  return lerp_table(tab, sl, x - a);
}

// ---------------------------------------------------------------- dispatch

double RelayKernel::tau1_cdf(double x) const {
  if (x <= 0.0) return 0.0;
  switch (mode_) {
    case KernelMode::ClosedFormPoisson: return tau1_cdf_poisson(x);
    case KernelMode::ClosedFormHyperexp2: return tau1_cdf_hyper(x);
    case KernelMode::NumericalRenewal: return tau1_cdf_numerical(x);
  }
  return 0.0;
}

double RelayKernel::tau_cond_cdf(double x_prev, double x) const {
  if (!(x_prev > 0.0) || x_prev > R_)
    throw std::invalid_argument(
        "tau_cond_cdf: conditioning needs 0 < x_prev <= R (chain terminated otherwise)");
  if (x <= 0.0) return 0.0;
  switch (mode_) {
    case KernelMode::ClosedFormPoisson: return tau_cond_cdf_poisson(x_prev, x);
    case KernelMode::ClosedFormHyperexp2: return tau_cond_cdf_hyper(x_prev, x);
    case KernelMode::NumericalRenewal: return tau_cond_cdf_numerical(x_prev, x);
  }
  return 0.0;
}

std::vector<double> RelayKernel::renewal_density(double x_prev,
                                                 std::span<const double> grid) const {
  if (mode_ != KernelMode::NumericalRenewal)
    throw std::invalid_argument("renewal_density: NumericalRenewal mode only");
  if (!(x_prev > 0.0) || x_prev > R_)
    throw std::invalid_argument("renewal_density: need 0 < x_prev <= R");
  const double a = R_ - x_prev;
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) {
    if (x < a - 1e-12 * R_ || x > R_ + 1e-12 * R_)
      throw std::invalid_argument("renewal_density: grid point outside [R-x_prev, R]");
    x = std::clamp(x, a, R_);
    const double fx = *model_.pdf(x);
    double conv = 0.0;
    const std::size_t m =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((x - a) / step_)));
    if (x > a) {
      const double sl = (x - a) / static_cast<double>(m);
      double prev = *model_.pdf(a) * lerp_table(h_, step_, x - a);
      for (std::size_t j = 1; j <= m; ++j) {
        const double u = a + sl * static_cast<double>(j);
        const double cur = *model_.pdf(u) * lerp_table(h_, step_, x - u);
        conv += 0.5 * sl * (prev + cur);
        prev = cur;
      }
    }
    out.push_back(fx + conv);
  }
  return out;
}

double RelayKernel::sample_tau1(SplitMix64& rng) const {
  const double v = rng.uniform01();
  const double tol = 1e-9 * R_;
  if (mode_ == KernelMode::NumericalRenewal) {
    if (v <= tau1_tab_.back()) return invert_cdf(&tau1_tab_, 0.0, v);
    double lo = R_, hi = std::min(x_max_, 2.0 * R_ + 8.0 * model_.mean());
    while (model_.cdf(hi) < v && hi < x_max_) hi = std::min(x_max_, hi * 2.0);
    while (hi - lo > tol) {
      double mid = 0.5 * (lo + hi);
      (model_.cdf(mid) < v ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  double lo = 0.0, hi = R_ + 4.0 * model_.mean();
  while (tau1_cdf(hi) < v) hi *= 2.0;
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (tau1_cdf(mid) < v ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double RelayKernel::sample_tau_cond(double x_prev, SplitMix64& rng) const {
  if (!(x_prev > 0.0) || x_prev > R_)
    throw std::invalid_argument("sample_tau_cond: need 0 < x_prev <= R");
  const double v = rng.uniform01();
  const double tol = 1e-9 * R_;
  const double a = R_ - x_prev;

  if (mode_ == KernelMode::NumericalRenewal) {
    auto tab = cond_branch1_table(x_prev);
    if (v <= tab.back()) {
      // invert the precomputed branch-1 table
      const double sl = (R_ - a) / static_cast<double>(tab.size() - 1);
      auto it = std::lower_bound(tab.begin(), tab.end(), v);
      std::size_t i = it == tab.begin() ? 0 : (it - tab.begin()) - 1;
      double seg = tab[i + 1] - tab[i];
      double frac = seg > 0.0 ? (v - tab[i]) / seg : 0.0;
      return a + sl * (static_cast<double>(i) + frac);
    }
    const double Fa = model_.cdf(a);
    double lo = R_, hi = std::min(x_max_, 2.0 * R_ + 8.0 * model_.mean());
    auto branch2 = [&](double x) { return (model_.cdf(x) - Fa) / (1.0 - Fa); };
    while (branch2(hi) < v && hi < x_max_) hi = std::min(x_max_, hi * 2.0);
    while (hi - lo > tol) {
      double mid = 0.5 * (lo + hi);
      (branch2(mid) < v ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  double lo = a, hi = R_ + 4.0 * model_.mean();
  while (tau_cond_cdf(x_prev, hi) < v) hi *= 2.0;
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (tau_cond_cdf(x_prev, mid) < v ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double RelayKernel::invert_cdf(const std::vector<double>* table, double a, double v) const {
  const auto& tab = *table;
  const double sl = step_;
  auto it = std::lower_bound(tab.begin(), tab.end(), v);
  if (it == tab.begin()) return a;
  std::size_t i = (it - tab.begin()) - 1;
  if (i + 1 >= tab.size()) return a + sl * static_cast<double>(tab.size() - 1);
  double seg = tab[i + 1] - tab[i];
  double frac = seg > 0.0 ? (v - tab[i]) / seg : 0.0;
  return a + sl * (static_cast<double>(i) + frac);
}

}  // namespace hopcalc
