#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "realhom/common.hpp"

namespace realhom {

struct TailReport {
    std::vector<double> thresholds;
    std::vector<double> empirical;  // fraction of samples with estimate >= t
    std::vector<double> bound;      // theoretical tail bound at t
    index_t samples = 0;
    std::uint64_t seed = 0;
    double mean_log2_kappa = 0.0;   // sample mean of log2 of the estimate
};

// 4e * m^(n+2) * (n+1) * D^(n+1) * N / t, clamped to 1. Requires t > 0.
double theoretical_tail_bound(int n, int m, int max_degree, index_t coeff_dim, double t);

// Draws `samples` Kostlan-random systems, estimates kappa from below by grid
// maximization at mesh exponent k, and reports exceedance fractions against
// the theoretical bound. Deterministic in seed (sample s uses seed + s).
TailReport empirical_tail(int n, int m, const std::vector<int>& degrees, index_t samples,
                          const std::vector<double>& thresholds, int k, std::uint64_t seed,
                          int workers = 1, index_t point_budget = 500000000);

// CSV with header t,empirical,bound,samples,seed
std::string tail_csv(const TailReport& report);

}  // namespace realhom
