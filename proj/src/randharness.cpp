#include "realhom/randharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "realhom/grid.hpp"
#include "realhom/pointestimates.hpp"
#include "realhom/polysys.hpp"

namespace realhom {

double theoretical_tail_bound(int n, int m, int max_degree, index_t coeff_dim, double t) {
    if (!(t > 0.0)) throw invalid_input("theoretical_tail_bound: t must be positive");
    const double e = std::exp(1.0);
    double b = 4.0 * e * std::pow(double(m), n + 2) * (n + 1) *
               std::pow(double(max_degree), n + 1) * double(coeff_dim) / t;
    return std::min(1.0, b);
}

TailReport empirical_tail(int n, int m, const std::vector<int>& degrees, index_t samples,
                          const std::vector<double>& thresholds, int k, std::uint64_t seed,
                          int workers, index_t point_budget) {
    if (samples <= 0) throw invalid_input("empirical_tail: no samples");
    if (thresholds.empty()) throw invalid_input("empirical_tail: no thresholds");
    for (double t : thresholds)
        if (!(t > 0.0)) throw invalid_input("empirical_tail: thresholds must be positive");
    if (k < 0 || k > 40) throw invalid_input("empirical_tail: mesh exponent out of range");

    const index_t per_sample = grid_point_count(n, k);
    if (per_sample > point_budget / samples)
        throw budget_exceeded("empirical_tail: grid budget exceeded (" +
                              std::to_string(samples) + " samples x " +
                              std::to_string(per_sample) + " grid points)");

    std::vector<double> kappa(static_cast<std::size_t>(samples));
    auto run_range = [&](index_t s0, index_t s1) {
        for (index_t s = s0; s < s1; ++s) {
            PolynomialSystem f = sample_kostlan(n, m, degrees, seed + std::uint64_t(s));
            kappa[static_cast<std::size_t>(s)] = kappa_upper_estimate(f, k, point_budget);
        }
    };
    if (workers <= 1 || samples < 2) {
        run_range(0, samples);
    } else {
        std::atomic<index_t> next{0};
        auto worker_fn = [&]() {
            for (;;) {
                index_t s = next.fetch_add(1);
                if (s >= samples) return;
                run_range(s, s + 1);
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn);
        for (auto& t : pool) t.join();
    }

    int max_degree = 0;
    for (int d : degrees) max_degree = std::max(max_degree, d);
    index_t coeff_dim = 0;
    for (int d : degrees) coeff_dim += static_cast<index_t>(monomial_basis(n, d).size());

    TailReport rep;
    rep.thresholds = thresholds;
    std::sort(rep.thresholds.begin(), rep.thresholds.end());
    rep.samples = samples;
    rep.seed = seed;
    double sum_log2 = 0.0;
    for (double v : kappa) sum_log2 += std::log2(v);
    rep.mean_log2_kappa = sum_log2 / double(samples);
    for (double t : rep.thresholds) {
        index_t exceed = 0;
        for (double v : kappa)
            if (v >= t) ++exceed;
        rep.empirical.push_back(double(exceed) / double(samples));
        rep.bound.push_back(theoretical_tail_bound(n, m, max_degree, coeff_dim, t));
    }
    return rep;
}

std::string tail_csv(const TailReport& report) {
    std::ostringstream os;
    os << "t,empirical,bound,samples,seed\n";
    os.precision(17);
    for (std::size_t i = 0; i < report.thresholds.size(); ++i)
        os << report.thresholds[i] << ',' << report.empirical[i] << ',' << report.bound[i]
           << ',' << report.samples << ',' << report.seed << '\n';
    return os.str();
}

}  // namespace realhom
