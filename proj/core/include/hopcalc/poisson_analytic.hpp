#pragma once

#include <cstdint>
#include <vector>

#include "hopcalc/hop_mc.hpp"

namespace hopcalc {

// Dimensionless Poisson-case shorthand: lambda' = lambda*R, rho' = e^{-l'},
// rho = l' e^{-l'}.
struct PoissonParams {
  double lambda_prime;
  double rho_prime;
  double rho;
  explicit PoissonParams(double lp);
};

// The two printed seed formulas carry a suspected typo in the rho' term of
// the k=2 row; both variants stay implemented and the Monte-Carlo oracle
// adjudicates. Adopted = forms consistent with the integration-by-parts
// recurrences (and the oracle).
enum class SeedForm { Adopted, AsPrinted };

struct SeedPair {
  double m1;  // M_{alpha,1}
  double m2;  // M_{alpha,2}
};

SeedPair seed_row_m(const PoissonParams& p, int alpha, SeedForm form = SeedForm::Adopted);

struct OracleEstimate {
  double value;
  double se;
};

// Monte-Carlo evaluation of the defining nested integral of M_{alpha,k}:
// u_1 ~ U(0,1), u_i ~ U(1-u_{i-1}, 1), weighted by the region volume and
// the integrand. Independent of the recurrence/seed path.
OracleEstimate m_alpha_k_oracle(const PoissonParams& p, int alpha, int k,
                                std::uint64_t n_samples, std::uint64_t seed,
                                unsigned threads = 0);

// M_{alpha,k} table filled by the two printed recurrences from the seed
// rows. Columns k >= 3 are filled backward in alpha (Miller style) from an
// asymptotic start; usable alpha shrinks by one every second column.
class AnalyticTables {
 public:
  static AnalyticTables build(const PoissonParams& p, int alpha_max, int k_max);

  double m(int alpha, int k) const;
  double u(int alpha, int k) const;  // (lambda'^a / a!) M_{a,k}
  int alpha_limit(int k) const;
  int alpha_max() const { return alpha_max_; }
  int k_max() const { return k_max_; }
  const PoissonParams& params() const { return params_; }

 private:
  AnalyticTables(PoissonParams p, int alpha_max, int k_max);
  PoissonParams params_;
  int alpha_max_, k_max_;
  int rows_;  // allocated alpha rows (includes Miller buffer)
  std::vector<double> cells_;  // row-major [alpha][k], k = 0..k_max
  double& at(int a, int k) { return cells_[static_cast<std::size_t>(a) * (k_max_ + 1) + k]; }
  double at(int a, int k) const {
    return cells_[static_cast<std::size_t>(a) * (k_max_ + 1) + k];
  }
};

// pmf[1] = rho', pmf[2] = rho, pmf[k] = rho M_{1,k-2}; tail = 1 - sum.
HopDistribution hop_pmf_poisson(const PoissonParams& p, int k_max);
// grows k_max until tail <= tail_target
HopDistribution hop_pmf_poisson_adaptive(const PoissonParams& p, double tail_target,
                                         int k_cap = 1 << 16);

// The printed closed form of Theorem 3 disagrees with the series/table PGF
// away from z = 1; the corrected form (derived from the verified lemmas) is
// the default, the printed one stays available for the adjudication tests.
enum class M1Form { Corrected, AsPrinted };

double m1_closed_form(const PoissonParams& p, double z, M1Form form = M1Form::Corrected);
double q_transform(const PoissonParams& p, double z);

// E[N_b]: radical form for lambda' > ln 4, trigonometric continuation below.
double mean_hops_closed(const PoissonParams& p);

struct SeriesCoeffs {
  std::vector<double> b;  // b[i], i = 0..i_max
  std::vector<double> c;  // c[i], i = 1..i_max (c[0] = 0)
};

SeriesCoeffs series_coeffs(const PoissonParams& p, int i_max);

// coefficient families a_{2k,i} and a_{2k+1,i}
double a_even_coeff(const PoissonParams& p, int k, int i);
double a_odd_coeff(const PoissonParams& p, int k, int i);

// partial sums A_i^{(e)}(z), A_i^{(o)}(z) truncated at k <= trunc
double a_even_transform(const PoissonParams& p, int i, double z, int trunc);
double a_odd_transform(const PoissonParams& p, int i, double z, int trunc);

// series form of M_1(z) (partial sums of the lemma expansion, seeds from
// seed_row_m); requires lambda' > ln 4 + 2 ln z
double m1_series(const PoissonParams& p, double z, int trunc);

// stable u_{alpha,1}, u_{alpha,2} evaluated without the factorial ratio
double u_seed1(const PoissonParams& p, int alpha);
double u_seed2(const PoissonParams& p, int alpha);

}  // namespace hopcalc
