// Nerve of the ball cover {B(x, epsilon)}: a q-simplex exists iff the
// minimum enclosing ball of its q+1 centers has radius < epsilon. Spherical
// and projective (antipodal sign test) modes.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "realhom/common.hpp"

namespace realhom {

struct Ball {
    Eigen::VectorXd center;
    double radius = 0.0;
};

// simplices[q] is a flat array of sorted (q+1)-tuples of vertex indices,
// stride q+1, in lexicographic order; downward closed by construction.
struct NerveComplex {
    int vertex_count = 0;
    int q_max = 0;
    std::vector<std::vector<std::int32_t>> simplices;

    index_t count(int q) const {
        if (q < 0 || q > q_max || simplices.empty()) return 0;
        if (q >= static_cast<int>(simplices.size())) return 0;
        return static_cast<index_t>(simplices[q].size()) / (q + 1);
    }
};

struct NerveDiagnostics {
    index_t meb_calls = 0;
    index_t epsilon_ties = 0;  // |MEB radius - epsilon| <= 1e-12 events
};

// Smallest enclosing ball, Welzl recursion with a deterministic seeded
// shuffle (fixed internal seed).
Ball min_enclosing_ball(const std::vector<Eigen::VectorXd>& points);

NerveComplex build_nerve(const std::vector<Eigen::VectorXd>& points, double epsilon, int q_max,
                         index_t simplex_budget = 10'000'000, int workers = 1,
                         NerveDiagnostics* diag = nullptr);

// One representative per antipodal pair {x,-x}: the one whose first nonzero
// coordinate is positive. Input must be bit-exact antipodally closed.
std::vector<Eigen::VectorXd> projective_reduce(const std::vector<Eigen::VectorXd>& points);

// Nerve over projective classes: a q-simplex exists iff some sign vector
// (e_0 = +1) makes the MEB of the signed representatives smaller than
// epsilon. Requires epsilon < 1.
NerveComplex build_projective_nerve(const std::vector<Eigen::VectorXd>& representatives,
                                    double epsilon, int q_max,
                                    index_t simplex_budget = 10'000'000, int workers = 1,
                                    NerveDiagnostics* diag = nullptr);

std::string serialize_nerve(const NerveComplex& c);
NerveComplex parse_nerve(const std::string& text);

}  // namespace realhom
