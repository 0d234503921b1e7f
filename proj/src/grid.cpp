#include "realhom/grid.hpp"

#include <cmath>

namespace realhom {

GridSpec make_grid_spec(int n, int k) {
    if (n < 1 || n + 1 > 8) throw invalid_input("grid: n out of supported range [1,7]");
    if (k < 1 || k > 62) throw invalid_input("grid: mesh exponent k out of range [1,62]");
    GridSpec s;
    s.n = n;
    s.k = k;
    s.eta = std::ldexp(1.0, -k);
    return s;
}

int initial_mesh_exponent(int n) {
    if (n < 1) throw invalid_input("initial_mesh_exponent: n must be >= 1");
    // smallest k >= 1 with 4^k >= 16(n+1)
    int k = 1;
    unsigned __int128 pow4 = 4;
    while (pow4 < static_cast<unsigned __int128>(16) * (n + 1)) {
        pow4 *= 4;
        ++k;
    }
    return k;
}

namespace {

using i128 = __int128;

const i128 I128_CAP = (i128(1) << 100);

// B[j] = (2M+1)^j, S[j] = surface count for j dims; capped to avoid overflow.
struct Counts {
    i128 B[9];
    i128 S[9];
    std::int64_t M;
    int d;
};

Counts make_counts(int d, std::int64_t M) {
    Counts c;
    c.M = M;
    c.d = d;
    i128 side = i128(2) * M + 1;
    c.B[0] = 1;
    for (int j = 1; j <= d; ++j) {
        c.B[j] = c.B[j - 1] * side;
        if (c.B[j] > I128_CAP) c.B[j] = I128_CAP;
    }
    c.S[1] = 2;
    for (int j = 2; j <= d; ++j) {
        c.S[j] = 2 * c.B[j - 1] + (i128(2) * M - 1) * c.S[j - 1];
        if (c.S[j] > I128_CAP) c.S[j] = I128_CAP;
    }
    return c;
}

}  // namespace

index_t grid_point_count(int n, int k) {
    GridSpec s = make_grid_spec(n, k);
    (void)s;
    std::int64_t M = std::int64_t(1) << k;
    Counts c = make_counts(n + 1, M);
    if (c.S[n + 1] > i128(INT64_MAX))
        throw budget_exceeded("grid point count overflows 64 bits at k=" + std::to_string(k));
    return static_cast<index_t>(c.S[n + 1]);
}

index_t grid_cardinality_bound(int n, double eta) {
    if (n < 1) throw invalid_input("grid_cardinality_bound: n must be >= 1");
    int exp = 0;
    double frac = std::frexp(eta, &exp);
    if (frac != 0.5 || exp > 0) throw invalid_input("grid_cardinality_bound: eta must be 2^-k, k >= 1");
    int k = 1 - exp;  // eta = 2^-k
    // 2(n+1) * 2^{(k+1) n}
    if ((k + 1) * n > 100)
        throw budget_exceeded("grid cardinality bound overflows");
    i128 v = i128(2) * (n + 1);
    v <<= (k + 1) * n;
    if (v > i128(INT64_MAX)) throw budget_exceeded("grid cardinality bound overflows 64 bits");
    return static_cast<index_t>(v);
}

namespace detail {

// Unranks idx into the lexicographic enumeration of integer tuples with
// max-norm exactly M. Descends zone by zone: a coordinate at +-M frees the
// remaining suffix to a full box; otherwise the suffix must still touch.
bool grid_unrank(const GridSpec& spec, index_t idx, GridPoint& p) {
    int d = spec.n + 1;
    std::int64_t M = std::int64_t(1) << spec.k;
    Counts cnt = make_counts(d, M);
    if (idx < 0 || i128(idx) >= cnt.S[d]) return false;

    p.dim = d;
    i128 rem = idx;
    bool need_surface = true;
    for (int pos = 0; pos < d; ++pos) {
        int dd = d - pos;  // dims remaining including this one
        if (!need_surface) {
            i128 block = cnt.B[dd - 1];
            std::int64_t digit = static_cast<std::int64_t>(rem / block);
            p.c[pos] = digit - M;
            rem -= i128(digit) * block;
            continue;
        }
        if (dd == 1) {
            p.c[pos] = (rem == 0) ? -M : M;
            rem = 0;
            continue;
        }
        i128 boxA = cnt.B[dd - 1];
        if (rem < boxA) {
            p.c[pos] = -M;
            need_surface = false;
            continue;
        }
        rem -= boxA;
        i128 inner = cnt.S[dd - 1];
        i128 middle = (i128(2) * M - 1) * inner;
        if (rem < middle) {
            std::int64_t j = static_cast<std::int64_t>(rem / inner);
            p.c[pos] = -M + 1 + j;
            rem -= i128(j) * inner;
            continue;  // still need surface
        }
        rem -= middle;
        p.c[pos] = M;
        need_surface = false;
    }
    return true;
}

bool grid_advance(const GridSpec& spec, GridPoint& p) {
    int d = spec.n + 1;
    std::int64_t M = std::int64_t(1) << spec.k;
    for (int j = d - 1; j >= 0; --j) {
        bool prefix_touch = false;
        for (int i = 0; i < j; ++i)
            if (p.c[i] == M || p.c[i] == -M) prefix_touch = true;
        std::int64_t next;
        if (j < d - 1 || prefix_touch) {
            next = p.c[j] + 1;
            if (next > M) continue;
        } else {
            // last coordinate, prefix strictly inside: only +-M allowed
            if (p.c[j] != -M) continue;
            next = M;
        }
        p.c[j] = next;
        for (int i = j + 1; i < d; ++i) p.c[i] = -M;
        return true;
    }
    return false;
}

}  // namespace detail

Eigen::VectorXd GridPoint::sphere(double eta) const {
    Eigen::VectorXd v(dim);
    for (int j = 0; j < dim; ++j) v(j) = static_cast<double>(c[j]) * eta;
    return v / v.norm();
}

Eigen::VectorXd project_cube_to_sphere(const Eigen::VectorXd& y) {
    double mx = y.cwiseAbs().maxCoeff();
    if (std::abs(mx - 1.0) > 1e-12)
        throw invalid_input("project_cube_to_sphere: point not on the cube surface");
    return y / y.norm();
}

Eigen::VectorXd project_sphere_to_cube(const Eigen::VectorXd& x) {
    double mx = x.cwiseAbs().maxCoeff();
    if (mx == 0.0) throw invalid_input("project_sphere_to_cube: zero point");
    return x / mx;
}

}  // namespace realhom
