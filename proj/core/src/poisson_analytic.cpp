#include "hopcalc/poisson_analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hopcalc/errors.hpp"
#include "hopcalc/parallel.hpp"
#include "hopcalc/rng.hpp"

namespace hopcalc {

namespace {

constexpr double kLn4 = 1.3862943611198906;
constexpr int kMillerBuffer = 40;

// S_alpha = int_0^1 u^a e^{l u} du = sum_m l^m / (m! (a+1+m)); positive terms
double s_alpha(double lp, int alpha) {
  double sum = 0.0, term = 1.0;
  for (int m = 0;; ++m) {
    const double add = term / (alpha + 1 + m);
    sum += add;
    term *= lp / (m + 1);
    if (m > lp + 10 && add < 1e-20 * sum) break;
    if (m > 4000) throw numerical_error("s_alpha: series failed to converge");
  }
  return sum;
}

// C(n, k) as double; exact product below 60, log-gamma above
double binom(long long n, long long k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  if (n <= 60) {
    double r = 1.0;
    for (long long j = 1; j <= k; ++j) r = r * static_cast<double>(n - k + j) / j;
    return r;
  }
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

}  // namespace

PoissonParams::PoissonParams(double lp) : lambda_prime(lp) {
  if (!(lp > 0.0)) throw std::invalid_argument("PoissonParams: lambda' must be > 0");
  rho_prime = std::exp(-lp);
  rho = lp * rho_prime;
}

SeedPair seed_row_m(const PoissonParams& p, int alpha, SeedForm form) {
  if (alpha < 0) throw std::invalid_argument("seed_row_m: alpha >= 0");
  const double lp = p.lambda_prime;
  if (form == SeedForm::Adopted) {
    const double s = s_alpha(lp, alpha);
    return {p.rho * s, p.rho * (s - 1.0 / (alpha + 1))};
  }
  // as printed: sum_{i<=a} (-1)^i a!/(a-i)! / l^i  (+ differing rho' terms)
  double sum = 0.0, term = 1.0;  // term = (-1)^i a!/(a-i)! l^{-i}
  for (int i = 0; i <= alpha; ++i) {
    sum += term;
    term *= -(alpha - i) / lp;
  }
  const double sign = (alpha % 2 == 0) ? 1.0 : -1.0;
  double fact = 1.0;
  for (int i = 2; i <= alpha; ++i) fact *= i;
  const double m1 = sum - sign * fact / std::pow(lp, alpha) * p.rho_prime;
  const double m2 = sum - p.rho / (alpha + 1) - sign * fact / lp * p.rho_prime;
  return {m1, m2};
}

OracleEstimate m_alpha_k_oracle(const PoissonParams& p, int alpha, int k,
                                std::uint64_t n_samples, std::uint64_t seed,
                                unsigned threads) {
  if (alpha < 0 || alpha > 6) throw std::invalid_argument("oracle: alpha in [0,6]");
  if (k < 0 || k > 8) throw std::invalid_argument("oracle: k in [0,8]");
  if (k == 0) return {1.0, 0.0};  // empty integral
  if (threads == 0) threads = default_threads();
  const double lp = p.lambda_prime;

  std::vector<double> sum1(threads, 0.0), sum2(threads, 0.0);
  parallel_chunks(n_samples, threads, [&](unsigned w, std::uint64_t b, std::uint64_t e) {
    double s1 = 0.0, s2 = 0.0;
    for (std::uint64_t i = b; i < e; ++i) {
      SplitMix64 rng = substream(seed, i);
      double u = rng.uniform01();
      double vol = 1.0;
      double expsum = u;
      for (int j = 2; j <= k; ++j) {
        vol *= u;
        u = 1.0 - u + u * rng.uniform01();  // U(1 - u_prev, 1)
        expsum += u;
      }
      const double w0 = vol * std::exp(lp * expsum) * std::pow(u, alpha);
      s1 += w0;
      s2 += w0 * w0;
    }
    sum1[w] = s1;
    sum2[w] = s2;
  });

  double s1 = 0.0, s2 = 0.0;
  for (unsigned w = 0; w < threads; ++w) {
    s1 += sum1[w];
    s2 += sum2[w];
  }
  const double n = static_cast<double>(n_samples);
  const double mean = s1 / n;
  const double var = std::max(0.0, s2 / n - mean * mean);
  const double scale = std::pow(p.rho, k);
  return {scale * mean, scale * std::sqrt(var / n)};
}

AnalyticTables::AnalyticTables(PoissonParams p, int alpha_max, int k_max)
    : params_(p), alpha_max_(alpha_max), k_max_(k_max) {
  rows_ = alpha_max + kMillerBuffer + 2;
  cells_.assign(static_cast<std::size_t>(rows_) * (k_max_ + 1), 0.0);
}

AnalyticTables AnalyticTables::build(const PoissonParams& p, int alpha_max, int k_max) {
  if (k_max < 2) throw std::invalid_argument("build_tables: k_max >= 2");
  if (alpha_max < k_max / 2 + 2)
    throw std::invalid_argument(
        "build_tables: table underflow, need alpha_max >= k_max/2 + 2");
  AnalyticTables t(p, alpha_max, k_max);
  const double lp = p.lambda_prime, rho = p.rho;

  for (int a = 0; a < t.rows_; ++a) {
    t.at(a, 0) = 1.0;  // M_{a,0} = 1 by convention
    const double s = s_alpha(lp, a);
    t.at(a, 1) = rho * s;
    t.at(a, 2) = rho * (s - 1.0 / (a + 1));
  }

  // column k from column k-1 (alpha = 0) and column k-2 (alpha + 1):
  // backward in alpha so round-off contracts instead of amplifying
  const double start_coef = std::exp(lp) * rho;
  int top = t.rows_ - 1;  // internal staircase top for this column parity
  int top_prev = t.rows_ - 1;
  for (int k = 3; k <= k_max; ++k) {
    const int atop = ((k - 3) % 2 == 0 ? top : top_prev) - 1;
    ((k - 3) % 2 == 0 ? top : top_prev) = atop;
    if (atop < 1) throw std::invalid_argument("build_tables: table underflow");
    const double m0km1 = t.at(0, k - 1);
    t.at(atop, k) = start_coef / (atop + 1) * m0km1;
    for (int a = atop; a >= 1; --a)
      t.at(a - 1, k) =
          lp / a * (m0km1 - t.at(a, k) - rho * t.at(a + 1, k - 2) / (a + 1));
  }
  return t;
}

int AnalyticTables::alpha_limit(int k) const {
  if (k < 0 || k > k_max_) throw std::out_of_range("alpha_limit: k out of range");
  return alpha_max_ - (k <= 2 ? 0 : (k - 1) / 2);
}

double AnalyticTables::m(int alpha, int k) const {
  if (k < 0 || k > k_max_ || alpha < 0 || alpha > alpha_limit(k))
    throw std::out_of_range("AnalyticTables::m: cell outside the filled staircase");
  return at(alpha, k);
}

double AnalyticTables::u(int alpha, int k) const {
  const double lg =
      alpha * std::log(params_.lambda_prime) - std::lgamma(alpha + 1.0);
  return std::exp(lg) * m(alpha, k);
}

HopDistribution hop_pmf_poisson(const PoissonParams& p, int k_max) {
  if (k_max < 1) throw std::invalid_argument("hop_pmf_poisson: k_max >= 1");
  HopDistribution d;
  d.method = HopMethod::PoissonRecurrence;
  d.k_max = k_max;
  d.p.assign(k_max, 0.0);
  d.p[0] = p.rho_prime;
  if (k_max >= 2) d.p[1] = p.rho;
  if (k_max >= 3) {
    const int kt = k_max - 2;
    AnalyticTables t = AnalyticTables::build(p, kt / 2 + 2, std::max(kt, 2));
    for (int k = 3; k <= k_max; ++k) d.p[k - 1] = p.rho * t.m(1, k - 2);
  }
  double sum = 0.0;
  for (double v : d.p) sum += v;
  d.tail_mass = std::max(0.0, 1.0 - sum);
  return d;
}

HopDistribution hop_pmf_poisson_adaptive(const PoissonParams& p, double tail_target,
                                         int k_cap) {
  int k = 64;
  for (;;) {
    HopDistribution d = hop_pmf_poisson(p, k);
    if (d.tail_mass <= tail_target || k >= k_cap) return d;
    k = std::min(k_cap, k * 2);
  }
}

double m1_closed_form(const PoissonParams& p, double z, M1Form form) {
  if (p.lambda_prime < kLn4)
    throw numerical_error("m1_closed_form: requires lambda' >= ln 4");
  if (z < 0.0) throw std::invalid_argument("m1_closed_form: z >= 0");
  if (z == 0.0) return 0.0;
  const double rp = p.rho_prime, rho = p.rho, lp = p.lambda_prime;
  const double disc = 1.0 - 4.0 * rp * z * z;
  if (disc < 0.0)
    throw numerical_error("m1_closed_form: 1 - 4 rho' z^2 < 0 (radical branch)");
  const double S = std::sqrt(disc);
  const double E = std::exp(0.5 * lp * (S - 1.0));
  const double den_core = 1.0 + S - 2.0 * z * E;
  if (std::abs(den_core) < 1e-14)
    throw numerical_error("m1_closed_form: pole proximity (denominator ~ 0)");
  if (form == M1Form::AsPrinted) {
    const double h1 = S * ((1 - rp - rho) * z * z * z - (1 - rp) * z * z -
                           z * (1 - rho) + 2 - rp - rho);
    const double h2 = E * (2 * rho * z * z * z + 2 * rp * z * z - z - 1 + (z - 1) * S);
    const double h3 = z * z * z * (rp + rho - 1) + z * z * (1 - 3 * rp - 2 * rho) +
                      z * (1 - rho) + rp + rho;
    return (h1 + h2 + h3) / (rho * z * z * den_core);
  }
  const double sm = S - 1.0, sp = S + 1.0;
  const double br = sm * sm * sp + z * sp * sp * (lp * sm + 2.0) -
                    2.0 * z * E * (sp * sp + lp * z * (S * S - 1.0) - 2.0 * z * sm);
  return br / (4.0 * rho * z * z * z * den_core);
}

double q_transform(const PoissonParams& p, double z) {
  if (z == 0.0) return 0.0;
  return p.rho_prime * z + p.rho * z * z * (1.0 + m1_closed_form(p, z));
}

double mean_hops_closed(const PoissonParams& p) {
  double lp = p.lambda_prime;
  if (std::abs(lp - kLn4) < 1e-7) lp = kLn4 + 1e-7;  // 0/0 exactly at ln 4
  if (lp > kLn4) {
    const double s = std::sqrt(1.0 - 4.0 * std::exp(-lp));
    const double c = 2.0 / (1.0 + s);
    const double num = std::exp(0.5 * lp * s) - c * std::exp(-0.5 * lp);
    const double den = std::exp(0.5 * lp) - c * std::exp(0.5 * lp * s);
    if (std::abs(den) < 1e-300)
      throw numerical_error("mean_hops_closed: denominator ~ 0 at lambda' = " +
                            std::to_string(lp));
    return num / den;
  }
  const double w = std::sqrt(4.0 * std::exp(-lp) - 1.0);
  const double cw = std::cos(0.5 * lp * w), sw = std::sin(0.5 * lp * w);
  const double num = 2.0 * std::exp(-0.5 * lp) * cw - 1.0;
  const double den = 2.0 - std::exp(0.5 * lp) * (cw + w * sw);
  if (std::abs(den) < 1e-300)
    throw numerical_error("mean_hops_closed: denominator ~ 0 at lambda' = " +
                          std::to_string(lp));
  return num / den;
}

SeriesCoeffs series_coeffs(const PoissonParams& p, int i_max) {
  if (i_max < 0 || i_max > 100000) throw std::invalid_argument("series_coeffs: i_max");
  const double lp = p.lambda_prime, rp = p.rho_prime;
  SeriesCoeffs out;
  out.b.resize(i_max + 1);
  out.c.assign(i_max + 1, 0.0);
  double L = 1.0;  // rho'^i C(2i, i)
  for (int i = 0; i <= i_max; ++i) {
    if (i > 0) out.c[i] = 0.5 * L;
    // sum_j (-lp)^j / j! * C(2i-j, i) / C(2i, i)
    double sum = 0.0, t = 1.0, r = 1.0;
    for (int j = 0; j <= i; ++j) {
      sum += t * r;
      r *= static_cast<double>(i - j) / (2 * i - j);
      t *= -lp / (j + 1);
    }
    out.b[i] = L * sum;
    L *= rp * 2.0 * (2 * i + 1) / (i + 1);
  }
  return out;
}

double a_even_coeff(const PoissonParams& p, int k, int i) {
  const double sign = (i % 2 == 0) ? 1.0 : -1.0;
  return std::pow(p.rho_prime, k - 1) * sign * binom(2LL * k - i - 3, k - 2);
}

double a_odd_coeff(const PoissonParams& p, int k, int i) {
  const double sign = (i % 2 == 0) ? 1.0 : -1.0;
  return std::pow(p.rho_prime, k) * sign * binom(2LL * k - i - 1, k - 1);
}

double a_odd_transform(const PoissonParams& p, int i, double z, int trunc) {
  const int k0 = std::max(i, 1);
  const double rp = p.rho_prime, z2 = z * z;
  double term = a_odd_coeff(p, k0, i) * std::pow(z, 2 * k0 + 1);
  double acc = 0.0;
  for (int k = k0; k <= trunc; ++k) {
    acc += term;
    if (std::abs(term) < 1e-14 * (1.0 + std::abs(acc))) break;
    term *= rp * z2 * static_cast<double>(2 * k - i) * (2 * k - i + 1) /
            (static_cast<double>(k) * (k - i + 1));
  }
  return acc;
}

double a_even_transform(const PoissonParams& p, int i, double z, int trunc) {
  const int k0 = std::max(i + 1, 2);
  const double rp = p.rho_prime, z2 = z * z;
  double term = a_even_coeff(p, k0, i) * std::pow(z, 2 * k0);
  double acc = 0.0;
  for (int k = k0; k <= trunc; ++k) {
    acc += term;
    if (std::abs(term) < 1e-14 * (1.0 + std::abs(acc))) break;
    term *= rp * z2 * static_cast<double>(2 * k - i - 2) * (2 * k - i - 1) /
            (static_cast<double>(k - 1) * (k - i));
  }
  return acc;
}

double u_seed1(const PoissonParams& p, int alpha) {
  // (-1)^a [ sum_{j<=a} (-lp)^j/j! - rho' ]
  double s = 0.0, t = 1.0;
  for (int j = 0; j <= alpha; ++j) {
    s += t;
    t *= -p.lambda_prime / (j + 1);
  }
  const double sign = (alpha % 2 == 0) ? 1.0 : -1.0;
  return sign * (s - p.rho_prime);
}

double u_seed2(const PoissonParams& p, int alpha) {
  double s1 = 0.0, s2 = 0.0, t = 1.0;
  for (int j = 0; j <= alpha; ++j) {
    s1 += t;
    s2 += t / (j + 1);
    t *= -p.lambda_prime / (j + 1);
  }
  const double sign = (alpha % 2 == 0) ? 1.0 : -1.0;
  return sign * ((1.0 - p.rho_prime) * s1 - p.rho * s2);
}

double m1_series(const PoissonParams& p, double z, int trunc) {
  if (!(z > 0.0)) throw std::invalid_argument("m1_series: z > 0");
  if (trunc < 4 || trunc > 10000) throw std::invalid_argument("m1_series: trunc in [4, 1e4]");
  if (!(p.lambda_prime > kLn4 + 2.0 * std::log(z)))
    throw numerical_error("m1_series: convergence requires lambda' > ln4 + 2 ln z");
  const double rho = p.rho;

  SeriesCoeffs sc = series_coeffs(p, trunc);
  double sum_c = 0.0, sum_b1 = 0.0;  // sum c_i z^{2i}, sum_{i>=1} b_i z^{2i+1}
  double zi = 1.0;
  for (int i = 1; i <= trunc; ++i) {
    zi *= z * z;
    const double tc = sc.c[i] * zi;
    const double tb = sc.b[i] * zi * z;
    sum_c += tc;
    sum_b1 += tb;
    if (std::abs(tc) + std::abs(tb) < 1e-16 * (1.0 + std::abs(sum_c))) break;
  }
  const double den_bracket = 1.0 - sc.b[0] * z + sum_c - sum_b1;

  double sum_uA = 0.0;
  int quiet = 0;
  for (int i = 0; i <= trunc; ++i) {
    const double term = u_seed1(p, i) * a_odd_transform(p, i, z, trunc) +
                        u_seed2(p, i) * a_even_transform(p, i, z, trunc);
    sum_uA += term;
    if (std::abs(term) < 1e-14 * (1.0 + std::abs(sum_uA))) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
  }

  const double u01 = u_seed1(p, 0), u02 = u_seed2(p, 0);
  const double num = (z - 1.0) * sum_uA + (u01 * z + u02 * z * z - u01 * z * z) * sum_c -
                     u02 * z * z * sum_b1;
  const double den = rho * z * z * den_bracket;
  if (std::abs(den) < 1e-300) throw numerical_error("m1_series: denominator ~ 0");
  return num / den;
}

}  // namespace hopcalc
