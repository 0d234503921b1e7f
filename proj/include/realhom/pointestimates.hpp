// Condition numbers and point estimates: mu_norm, kappa, alpha/beta/gamma
// bars, Moore-Penrose Newton and certified refinement.
#pragma once

#include <Eigen/Dense>

#include "realhom/common.hpp"
#include "realhom/polysys.hpp"

namespace realhom {

// All quantities may be +infinity (rank-deficient scaled Jacobian).
struct PointEstimates {
    double mu = 0.0;
    double alpha_bar = 0.0;
    double beta_bar = 0.0;
    double gamma_bar = 0.0;
    double residual_norm = 0.0;
    double kappa = 0.0;
};

// ||f|| / sigma_min(Delta^{-1} Df(x)), the m-th singular value of the scaled
// m x (n+1) Jacobian; +infinity when sigma_min <= 1e-12 * max(1, sigma_max).
double mu_norm(const PolynomialSystem& f, const Eigen::VectorXd& x);

// ||f|| / sqrt(||f||^2 mu^-2 + ||f(x)||^2), with inf^-1 = 0.
double kappa_at(const PolynomialSystem& f, const Eigen::VectorXd& x);

PointEstimates point_estimates(const PolynomialSystem& f, const Eigen::VectorXd& x);

// One Moore-Penrose Newton step x - Df(x)^+ f(x). Throws invalid_input
// ("Newton undefined") on a rank-deficient Jacobian.
Eigen::VectorXd newton_mp(const PolynomialSystem& f, const Eigen::VectorXd& x);

// Newton iteration from a point with alpha_bar <= 0.125 until
// ||f(x)||/||f|| <= tol; at most 60 steps, with divergence detection.
Eigen::VectorXd refine_zero(const PolynomialSystem& f, const Eigen::VectorXd& x, double tol);

// max of kappa_at over the projected grid at mesh exponent k: a lower
// estimate of the sphere maximum kappa(f), for diagnostics and the tail
// harness only.
double kappa_upper_estimate(const PolynomialSystem& f, int k,
                            index_t point_budget = 500'000'000);

}  // namespace realhom
