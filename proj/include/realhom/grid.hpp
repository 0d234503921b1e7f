// The cube-surface lattice U_eta and its projection G_eta to S^n:
// exact integer enumeration in lexicographic order, splittable into
// contiguous index ranges.
#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

#include "realhom/common.hpp"

namespace realhom {

struct GridSpec {
    int n = 0;  // sphere S^n in R^{n+1}
    int k = 0;  // mesh exponent, eta = 2^-k
    double eta = 0.0;
};

GridSpec make_grid_spec(int n, int k);

// Integer cube coordinates c (|c_j| <= M = 2^k, max|c_j| = M exactly) plus
// derived cube/sphere doubles. Coordinates are never accumulated in floating
// point, so streams are exactly reproducible and antipodally symmetric.
struct GridPoint {
    int dim = 0;
    std::array<std::int64_t, 8> c{};

    void cube(double eta, double* out) const {
        for (int j = 0; j < dim; ++j) out[j] = static_cast<double>(c[j]) * eta;
    }
    // Unit sphere point c*eta / ||c*eta||; zero coordinates stay +0.0.
    Eigen::VectorXd sphere(double eta) const;
};

// Smallest k >= 1 with 4^k >= 16(n+1), i.e. ceil(log2 4 sqrt(n+1)), in
// integer arithmetic.
int initial_mesh_exponent(int n);

// Exact number of surface lattice points for S^n at mesh exponent k.
// Throws budget_exceeded on 64-bit overflow.
index_t grid_point_count(int n, int k);

// The a-priori bound 2(n+1)(2/eta)^n, exact integer (128-bit accumulation;
// overflow -> budget_exceeded). For n = 1 this equals grid_point_count; for
// n >= 2 the true count can exceed it slightly.
index_t grid_cardinality_bound(int n, double eta);

// Streaming enumeration of grid indices [begin, end) in lexicographic order
// of integer coordinates. F is called as f(const GridPoint&, index_t index).
namespace detail {
bool grid_unrank(const GridSpec& spec, index_t idx, GridPoint& p);
bool grid_advance(const GridSpec& spec, GridPoint& p);
}  // namespace detail

template <class F>
void enumerate_grid_range(const GridSpec& spec, index_t begin, index_t end, F&& f) {
    if (begin >= end) return;
    GridPoint p;
    if (!detail::grid_unrank(spec, begin, p))
        throw invalid_input("enumerate_grid_range: begin out of range");
    for (index_t i = begin; i < end; ++i) {
        f(static_cast<const GridPoint&>(p), i);
        if (i + 1 < end && !detail::grid_advance(spec, p))
            throw internal_error("grid enumeration ended early");
    }
}

template <class F>
void enumerate_grid(const GridSpec& spec, index_t point_budget, F&& f) {
    index_t total = grid_point_count(spec.n, spec.k);
    if (point_budget >= 0 && total > point_budget)
        throw budget_exceeded("grid enumeration budget exceeded: " + std::to_string(total) +
                                  " points at k=" + std::to_string(spec.k),
                              spec.eta, -1);
    enumerate_grid_range(spec, 0, total, std::forward<F>(f));
}

// phi(y) = y/||y|| for ||y||_inf = 1 (checked to 1e-12), and its inverse
// x -> x/||x||_inf for x != 0.
Eigen::VectorXd project_cube_to_sphere(const Eigen::VectorXd& y);
Eigen::VectorXd project_sphere_to_cube(const Eigen::VectorXd& x);

}  // namespace realhom
