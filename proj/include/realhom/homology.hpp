#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include <gmpxx.h>

#include "realhom/common.hpp"
#include "realhom/nerve.hpp"

namespace realhom {

// Boundary operator del_k in compressed-sparse-column form: one column per
// k-simplex, rows indexed by (k-1)-simplices, entries in {-1,0,1}.
struct BoundaryMatrix {
    int k = 0;
    index_t rows = 0;  // number of (k-1)-simplices
    index_t cols = 0;  // number of k-simplices
    std::vector<index_t> col_ptr;       // size cols+1
    std::vector<std::int32_t> row_idx;  // concatenated per column
    std::vector<std::int8_t> sign;      // parallel to row_idx
};

// Invariant factors d_1 | d_2 | ... | d_t of an integer matrix.
struct SmithForm {
    std::vector<mpz_class> diagonal;
    index_t rank = 0;
};

struct HomologyResult {
    std::vector<index_t> betti;                 // b_0 .. b_q_top
    std::vector<std::vector<mpz_class>> torsion;  // per dimension, factors > 1
};

using SparseEntry = std::tuple<index_t, index_t, long long>;

// Requires 1 <= k <= q_max; throws invalid_input if a facet of some k-simplex
// is absent from the (k-1)-simplex list.
BoundaryMatrix boundary_matrix(const NerveComplex& complex, int k);

// Exact check that the composite del_k . del_{k+1} vanishes.
bool composes_to_zero(const BoundaryMatrix& dk, const BoundaryMatrix& dk1);

SmithForm smith_normal_form(const BoundaryMatrix& m);
SmithForm smith_normal_form(index_t rows, index_t cols, const std::vector<SparseEntry>& entries);
SmithForm smith_normal_form_dense(const std::vector<std::vector<long long>>& rows);

// Exact rank over the rationals (fraction-free elimination); cross-check path.
index_t rational_rank(index_t rows, index_t cols, const std::vector<SparseEntry>& entries);
index_t rational_rank(const BoundaryMatrix& m);

// Betti numbers b_0..b_q_top and torsion coefficients. Requires
// q_top <= q_max; at q_top == q_max the complex is taken as complete, i.e.
// del_{q_max+1} is the empty matrix.
HomologyResult homology_from_complex(const NerveComplex& complex, int q_top);

}  // namespace realhom
