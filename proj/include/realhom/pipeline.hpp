#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "realhom/covering.hpp"
#include "realhom/homology.hpp"
#include "realhom/nerve.hpp"
#include "realhom/polysys.hpp"

namespace realhom {

struct RunConfig {
    std::string mode = "sphere";        // sphere | projective
    std::string profile = "certified";  // certified | guarded | practical
    std::optional<double> alpha0;
    std::optional<double> gamma_factor;
    std::optional<double> beta_factor;
    std::optional<double> epsilon_factor;
    std::optional<double> thin_theta;
    std::optional<int> max_k;
    std::optional<index_t> point_budget;
    index_t simplex_budget = 10'000'000;
    std::uint64_t seed = 0;
    int workers = 1;
    bool no_certificate = false;
};

// Applies profile defaults, thinning auto-scaling and explicit overrides,
// then validates. The practical profile demands no_certificate.
Profile resolve_profile(const RunConfig& cfg);

struct PipelineResult {
    std::string mode;
    bool empty = false;
    HomologyResult homology;
    int q_top = 0;
    CoveringResult covering;
    std::vector<index_t> simplices_per_dim;
    double runtime_ms = 0.0;
};

// covering -> nerve -> homology. Empty zero set yields empty=true with
// zero-length betti/torsion.
PipelineResult run_pipeline(const PolynomialSystem& f, const RunConfig& cfg);

// Result JSON; with_runtime=false drops the runtime_ms diagnostic so two
// runs can be compared byte for byte.
std::string serialize_result(const PipelineResult& r, bool with_runtime = true);

// {"betti": ..., "torsion": ...} for raw-complex entry points.
std::string serialize_homology(const HomologyResult& r);

}  // namespace realhom
