// The covering loop: classify grid points at mesh eta, halve eta until every
// point is accepted or excluded, emit the certified point cloud X and radius
// epsilon. Deterministic across runs and worker counts.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "realhom/common.hpp"
#include "realhom/grid.hpp"
#include "realhom/pointestimates.hpp"
#include "realhom/polysys.hpp"

namespace realhom {

// Constant set driving the covering loop. certified = proof-strength
// constants; guarded = tolerances weakened by a factor of 2 (alpha0 halved,
// exclusion margin doubled); practical = user constants with thinning,
// forfeiting the worst-case guarantee.
struct Profile {
    std::string name = "certified";  // certified | guarded | practical
    double alpha0 = 0.125;
    double gamma_factor = 531.0;
    double beta_factor = 2.2;
    double epsilon_factor = 3.5;
    double exclusion_margin = 1.1;
    double thin_theta = 0.0;
    int max_k = -1;  // -1: initial_mesh_exponent(n) + 40
    index_t point_budget = 500'000'000;
    bool fast_exclude = true;

    static Profile certified();
    static Profile guarded();
    static Profile practical();
};

// Throws invalid_input if the profile violates its invariants for certified/
// guarded names (alpha0 cap, gamma/epsilon scaling under thinning).
void validate_profile(const Profile& p);

enum class Action { Accept, Exclude, Refine };

// estimates carries what the decision used; on the fast-exclude path only
// residual_norm is populated (the rest are NaN).
struct Classification {
    Action action;
    PointEstimates estimates;
};

struct PassStats {
    int k = 0;
    index_t scanned = 0;
    index_t accepted = 0;
    index_t excluded = 0;
    index_t refined = 0;
};

struct CoveringResult {
    // Unit points, sorted by integer cube coordinates, closed under x -> -x
    // (bit-exact; zero coordinates are +0.0 on both sides).
    std::vector<Eigen::VectorXd> points;
    std::vector<std::array<std::int64_t, 8>> cube_coords;  // parallel to points
    int dim = 0;

    double epsilon = 0.0;
    double eta = 0.0;
    double r = 0.0;
    int passes = 0;
    int final_k = 0;
    bool empty = true;
    std::vector<PassStats> pass_stats;

    // read-only diagnostics
    double epsilon_admissible_min = 0.0;
    double epsilon_admissible_max = 0.0;
    double tau_proxy = 0.0;        // 1/(87 max gamma_bar over X); 0 if X empty
    index_t accepted_raw = 0;      // accepted count before thinning
    std::string profile_name;
};

double sep(double eta, int n);
double exclusion_delta(const PolynomialSystem& f, double eta, double margin = 1.1);

// Classifies one grid point at mesh eta. Estimates are evaluated at the
// canonical representative (first nonzero cube coordinate positive) so the
// decision is bitwise antipodally symmetric.
Classification classify_point(const PolynomialSystem& f, const GridPoint& p, double eta,
                              const Profile& profile);

// Runs the covering loop. Returns a result with empty=true when no point is
// accepted (zero set certified empty). Throws budget_exceeded when max_k or
// the per-pass point budget is hit while Refine points remain.
CoveringResult run_covering(const PolynomialSystem& f, const Profile& profile, int workers = 1);

// Greedy net in sorted order over canonical representatives, mirrored back.
// A representative is kept iff no earlier-kept one lies within radius.
// Input must be antipodally closed; output is sorted and closed.
std::vector<Eigen::VectorXd> thin_to_net(const std::vector<Eigen::VectorXd>& points,
                                         double radius);

std::string serialize_covering(const CoveringResult& c);
// Reads back the covering JSON (points + eta/r/epsilon/profile).
CoveringResult parse_covering(const std::string& text);

}  // namespace realhom
