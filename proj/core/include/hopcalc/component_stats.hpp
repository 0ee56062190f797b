#pragma once

#include "hopcalc/interdistance.hpp"

namespace hopcalc {

// Geometric PGF of the vehicle count in a component: z (1-F(R)) / (1 - z F(R)).
double vehicle_count_pgf(double FR, double z);

// mean of the geometric law, 1 / (1 - F(R))
double mean_vehicles(double FR);

// Mean component length in the connectivity-distance (busy period) sense:
// span between the extreme vehicles plus the trailing coverage interval R.
// Closed forms for Exponential and two-component Hyperexponential models.
double mean_component_length(const InterdistanceModel& model, double R);

// mean_hops / (mean_length / R): lengths in units of R
double hop_density(double mean_hops, double mean_length, double R);

}  // namespace hopcalc
