#include "hopcalc/component_stats.hpp"

#include <cmath>
#include <stdexcept>

#include "hopcalc/errors.hpp"

namespace hopcalc {

double vehicle_count_pgf(double FR, double z) {
  if (!(FR >= 0.0) || FR >= 1.0)
    throw std::invalid_argument("vehicle_count_pgf: F(R) in [0, 1)");
  if (std::abs(z) > 1.0) throw std::invalid_argument("vehicle_count_pgf: |z| <= 1");
  const double den = 1.0 - z * FR;
  if (std::abs(den) < 1e-300) throw numerical_error("vehicle_count_pgf: pole at z F(R) = 1");
  return z * (1.0 - FR) / den;
}

double mean_vehicles(double FR) {
  if (!(FR >= 0.0) || FR >= 1.0) throw std::invalid_argument("mean_vehicles: F(R) in [0, 1)");
  return 1.0 / (1.0 - FR);
}

double mean_component_length(const InterdistanceModel& model, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("mean_component_length: R > 0");
  switch (model.kind()) {
    case ModelKind::Exponential: {
      const double lam = model.rates()[0];
      return -std::expm1(-lam * R) / (lam * std::exp(-lam * R));
    }
    case ModelKind::Hyperexponential: {
      if (model.rates().size() != 2)
        throw std::invalid_argument(
            "mean_component_length: closed form needs K=2 (measure by simulation)");
      const double a1 = model.weights()[0], a2 = model.weights()[1];
      const double l1 = model.rates()[0], l2 = model.rates()[1];
      const double num = a1 * l2 * -std::expm1(-l1 * R) + a2 * l1 * -std::expm1(-l2 * R);
      const double den = a1 * std::exp(-l1 * R) + a2 * std::exp(-l2 * R);
      return num / (l1 * l2 * den);
    }
    case ModelKind::Empirical:
      throw std::invalid_argument(
          "mean_component_length: empirical models unsupported, use road simulation");
  }
  throw std::invalid_argument("mean_component_length: unknown model kind");
}

double hop_density(double mean_hops, double mean_length, double R) {
  if (!(mean_length > 0.0)) throw std::invalid_argument("hop_density: mean_length > 0");
  return mean_hops / (mean_length / R);
}

}  // namespace hopcalc
