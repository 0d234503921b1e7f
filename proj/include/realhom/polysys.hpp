// Homogeneous polynomial systems: representation, evaluation, Weyl geometry,
// orthogonal pullback and Kostlan sampling.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "realhom/common.hpp"

namespace realhom {

// Multi-index of length n+1 whose entries sum to the owning degree.
using ExponentVector = std::vector<int>;

struct HomogeneousPolynomial {
    int degree = 0;
    std::map<ExponentVector, double> terms;
};

// f = (f_1,...,f_m), f_i homogeneous of degree d_i >= 2 in n+1 variables,
// 1 <= m <= n. Caches D = max d_i, N = sum_i binom(n+d_i, n), the Weyl norm,
// and a flattened evaluation plan (terms + differentiated terms).
struct PolynomialSystem {
    int n = 0;
    int m = 0;
    std::vector<HomogeneousPolynomial> polys;

    int D = 0;
    index_t N = 0;
    double weyl = 0.0;

    struct FlatTerm {
        double coeff;
        std::array<std::uint8_t, 8> e;
    };
    std::vector<std::vector<FlatTerm>> eval_terms;                 // per poly
    std::vector<std::array<std::vector<FlatTerm>, 8>> jac_terms;   // per poly, per var
    std::vector<int> degrees;
};

// Exact integer multinomial coefficient (d; a0,...,an), as a double.
double multinomial(int degree, const ExponentVector& a);

// Validates invariants, fills caches. Throws invalid_input.
PolynomialSystem make_system(int n, std::vector<HomogeneousPolynomial> polys);

double weyl_norm(const PolynomialSystem& f);
Eigen::VectorXd evaluate(const PolynomialSystem& f, const Eigen::VectorXd& x);
Eigen::MatrixXd jacobian(const PolynomialSystem& f, const Eigen::VectorXd& x);

// diag(||x||^{d_i - 1} sqrt(d_i)), m x m.
Eigen::MatrixXd delta_scaling(const PolynomialSystem& f, const Eigen::VectorXd& x);

// Coefficients of x -> f(Ux) for orthogonal U (checked to 1e-12).
PolynomialSystem pullback_orthogonal(const PolynomialSystem& f, const Eigen::MatrixXd& U);

/// Unnormalized Kostlan draw: coefficient of each monomial is an independent
// centered Gaussian with variance multinomial(d_i; a). Deterministic in seed
// (Box-Muller over mt19937_64; polynomials in order, exponents ascending).
std::vector<HomogeneousPolynomial> kostlan_raw(int n, int m, const std::vector<int>& degrees,
                                               std::uint64_t seed);

// kostlan_raw rescaled to unit Weyl norm.
PolynomialSystem sample_kostlan(int n, int m, const std::vector<int>& degrees,
                                std::uint64_t seed);

PolynomialSystem parse_system(const std::string& text);
std::string serialize_system(const PolynomialSystem& f);

// All exponent vectors of the given degree in n+1 variables, ascending.
std::vector<ExponentVector> monomial_basis(int n, int degree);

}  // namespace realhom
