#include "realhom/pointestimates.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "realhom/grid.hpp"

namespace realhom {

static const double INF = std::numeric_limits<double>::infinity();

static void check_unit(const Eigen::VectorXd& x) {
    if (std::abs(x.norm() - 1.0) > 1e-9)
        throw invalid_input("point must lie on the unit sphere (|norm-1| <= 1e-9)");
}

// Smallest/largest singular values of Delta^{-1} Df(x).
static void scaled_jacobian_sv(const PolynomialSystem& f, const Eigen::VectorXd& x,
                               double& smin, double& smax) {
    Eigen::MatrixXd J = jacobian(f, x);
    double nrm = x.norm();
    for (int i = 0; i < f.m; ++i)
        J.row(i) /= std::pow(nrm, f.degrees[i] - 1) * std::sqrt(double(f.degrees[i]));
    if (f.m == 1) {
        smin = smax = J.row(0).norm();
        return;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    smax = svd.singularValues()(0);
    smin = svd.singularValues()(f.m - 1);
}

double mu_norm(const PolynomialSystem& f, const Eigen::VectorXd& x) {
    check_unit(x);
    double smin, smax;
    scaled_jacobian_sv(f, x, smin, smax);
    double tol = 1e-12 * std::max(1.0, smax);
    if (smin <= tol) return INF;
    return f.weyl / smin;
}

double kappa_at(const PolynomialSystem& f, const Eigen::VectorXd& x) {
    double mu = mu_norm(f, x);
    double res = evaluate(f, x).norm();
    double muinv2 = std::isinf(mu) ? 0.0 : (f.weyl / mu) * (f.weyl / mu);
    double den = std::sqrt(muinv2 + res * res);
    if (den == 0.0) return INF;
    return f.weyl / den;
}

PointEstimates point_estimates(const PolynomialSystem& f, const Eigen::VectorXd& x) {
    check_unit(x);
    PointEstimates e;
    e.residual_norm = evaluate(f, x).norm();
    double smin, smax;
    scaled_jacobian_sv(f, x, smin, smax);
    double tol = 1e-12 * std::max(1.0, smax);
    if (smin <= tol) {
        e.mu = e.alpha_bar = e.beta_bar = e.gamma_bar = INF;
        e.kappa = (e.residual_norm == 0.0) ? INF : f.weyl / e.residual_norm;
        return e;
    }
    e.mu = f.weyl / smin;
    e.beta_bar = e.mu * e.residual_norm / f.weyl;
    e.gamma_bar = 0.5 * std::pow(double(f.D), 1.5) * e.mu;
    e.alpha_bar = e.beta_bar * e.gamma_bar;
    double muinv2 = smin * smin;
    e.kappa = f.weyl / std::sqrt(muinv2 + e.residual_norm * e.residual_norm);
    return e;
}

Eigen::VectorXd newton_mp(const PolynomialSystem& f, const Eigen::VectorXd& x) {
    Eigen::MatrixXd J = jacobian(f, x);
    Eigen::VectorXd fx = evaluate(f, x);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double tol = 1e-12 * std::max(1.0, sv(0));
    if (sv(f.m - 1) <= tol) throw invalid_input("Newton undefined: rank-deficient Jacobian");
    Eigen::VectorXd w = svd.matrixU().transpose() * fx;
    for (int i = 0; i < f.m; ++i) w(i) /= sv(i);
    return x - svd.matrixV() * w;
}

Eigen::VectorXd refine_zero(const PolynomialSystem& f, const Eigen::VectorXd& x, double tol) {
    PointEstimates e = point_estimates(f, x / x.norm());
    if (!(e.alpha_bar <= 0.125))
        throw invalid_input("refine_zero precondition violated: alpha_bar > 0.125");
    Eigen::VectorXd cur = x;
    double prev_step = INF;
    int growth = 0;
    for (int it = 0; it < 60; ++it) {
        if (evaluate(f, cur).norm() / f.weyl <= tol) return cur;
        Eigen::VectorXd nxt = newton_mp(f, cur);
        double step = (nxt - cur).norm();
        if (step > prev_step) {
            if (++growth >= 2)
                throw invalid_input("refine_zero: diverging Newton iteration");
        } else {
            growth = 0;
        }
        prev_step = step;
        cur = nxt;
    }
    if (evaluate(f, cur).norm() / f.weyl <= tol) return cur;
    throw invalid_input("refine_zero: no convergence within 60 iterations");
}

double kappa_upper_estimate(const PolynomialSystem& f, int k, index_t point_budget) {
    if (k < initial_mesh_exponent(f.n))
        throw invalid_input("kappa_upper_estimate: k below initial mesh exponent");
    GridSpec spec = make_grid_spec(f.n, k);
    double best = 0.0;
    enumerate_grid(spec, point_budget, [&](const GridPoint& p, index_t) {
        double v = kappa_at(f, p.sphere(spec.eta));
        if (v > best) best = v;
    });
    return best;
}

}  // namespace realhom
