#include "realhom/polysys.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <nlohmann/json.hpp>

namespace realhom {

using json = nlohmann::ordered_json;

double multinomial(int degree, const ExponentVector& a) {
    // Product of binomials over partial sums; each factor fits in int64 at
    // desk-scale degrees, accumulate in long double to be safe beyond.
    long double result = 1.0L;
    int consumed = 0;
    for (int ai : a) {
        if (ai < 0) throw invalid_input("negative exponent");
        consumed += ai;
        // binom(consumed, ai)
        long double b = 1.0L;
        for (int j = 1; j <= ai; ++j) b = b * (consumed - ai + j) / j;
        result *= std::floor(b + 0.5L);
    }
    if (consumed != degree) throw invalid_input("exponent sum does not match degree");
    return static_cast<double>(result);
}

static index_t binom_ll(int n, int k) {
    if (k < 0 || k > n) return 0;
    long double b = 1.0L;
    for (int j = 1; j <= k; ++j) b = b * (n - k + j) / j;
    return static_cast<index_t>(std::floor(b + 0.5L));
}

static double weyl_norm_sq(const std::vector<HomogeneousPolynomial>& polys) {
    double s = 0.0;
    for (const auto& p : polys)
        for (const auto& [a, c] : p.terms) s += c * c / multinomial(p.degree, a);
    return s;
}

PolynomialSystem make_system(int n, std::vector<HomogeneousPolynomial> polys) {
    PolynomialSystem f;
    f.n = n;
    f.m = static_cast<int>(polys.size());
    if (n < 1 || n + 1 > 8) throw invalid_input("n out of supported range [1,7]");
    if (f.m < 1 || f.m > n) throw invalid_input("system must have 1 <= m <= n polynomials");
    for (const auto& p : polys) {
        if (p.degree < 2)
            throw invalid_input(
                "degree-1 polynomials are not supported: eliminate the linear "
                "equation by substitution and restate the system in the "
                "lower-dimensional variables");
        for (const auto& [a, c] : p.terms) {
            if (static_cast<int>(a.size()) != n + 1)
                throw invalid_input("exponent vector length must be n+1");
            int s = 0;
            for (int ai : a) {
                if (ai < 0) throw invalid_input("inconsistent term: negative exponent");
                s += ai;
            }
            if (s != p.degree) throw invalid_input("inconsistent term: exponent sum != degree");
        }
    }
    f.polys = std::move(polys);
    f.D = 0;
    f.N = 0;
    for (const auto& p : f.polys) {
        f.D = std::max(f.D, p.degree);
        f.N += binom_ll(n + p.degree, n);
        f.degrees.push_back(p.degree);
    }
    f.weyl = std::sqrt(weyl_norm_sq(f.polys));
    if (!(f.weyl > 0.0)) throw invalid_input("zero system: Weyl norm must be positive");

    // Flatten for evaluation; derivative terms per variable.
    f.eval_terms.resize(f.m);
    f.jac_terms.resize(f.m);
    for (int i = 0; i < f.m; ++i) {
        for (const auto& [a, c] : f.polys[i].terms) {
            PolynomialSystem::FlatTerm t{};
            t.coeff = c;
            for (int j = 0; j <= n; ++j) t.e[j] = static_cast<std::uint8_t>(a[j]);
            f.eval_terms[i].push_back(t);
            for (int j = 0; j <= n; ++j) {
                if (a[j] == 0) continue;
                PolynomialSystem::FlatTerm d = t;
                d.coeff = c * a[j];
                d.e[j] = static_cast<std::uint8_t>(a[j] - 1);
                f.jac_terms[i][j].push_back(d);
            }
        }
    }
    return f;
}

double weyl_norm(const PolynomialSystem& f) { return f.weyl; }

static inline double eval_terms(const std::vector<PolynomialSystem::FlatTerm>& terms,
                                const double* x, int dim) {
    double s = 0.0;
    for (const auto& t : terms) {
        double p = t.coeff;
        for (int j = 0; j < dim; ++j) {
            double xj = x[j];
            for (int e = t.e[j]; e > 0; --e) p *= xj;
        }
        s += p;
    }
    return s;
}

Eigen::VectorXd evaluate(const PolynomialSystem& f, const Eigen::VectorXd& x) {
    if (x.size() != f.n + 1) throw invalid_input("evaluate: point dimension mismatch");
    Eigen::VectorXd v(f.m);
    for (int i = 0; i < f.m; ++i) v(i) = eval_terms(f.eval_terms[i], x.data(), f.n + 1);
    return v;
}

Eigen::MatrixXd jacobian(const PolynomialSystem& f, const Eigen::VectorXd& x) {
    if (x.size() != f.n + 1) throw invalid_input("jacobian: point dimension mismatch");
    Eigen::MatrixXd J(f.m, f.n + 1);
    for (int i = 0; i < f.m; ++i)
        for (int j = 0; j <= f.n; ++j)
            J(i, j) = eval_terms(f.jac_terms[i][j], x.data(), f.n + 1);
    return J;
}

Eigen::MatrixXd delta_scaling(const PolynomialSystem& f, const Eigen::VectorXd& x) {
    if (x.size() != f.n + 1) throw invalid_input("delta_scaling: point dimension mismatch");
    double nrm = x.norm();
    if (nrm == 0.0) throw invalid_input("delta_scaling: zero point");
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(f.m, f.m);
    for (int i = 0; i < f.m; ++i)
        d(i, i) = std::pow(nrm, f.degrees[i] - 1) * std::sqrt(double(f.degrees[i]));
    return d;
}

PolynomialSystem pullback_orthogonal(const PolynomialSystem& f, const Eigen::MatrixXd& U) {
    int dim = f.n + 1;
    if (U.rows() != dim || U.cols() != dim)
        throw invalid_input("pullback_orthogonal: U must be (n+1)x(n+1)");
    double dev = (U.transpose() * U - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff();
    if (dev > 1e-12) throw invalid_input("pullback_orthogonal: U is not orthogonal");

    std::vector<HomogeneousPolynomial> out;
    for (const auto& p : f.polys) {
        // Expand f_i(Ux) by repeated multiplication with linear forms.
        std::map<ExponentVector, double> acc;
        for (const auto& [a, c] : p.terms) {
            std::map<ExponentVector, double> mono;
            mono[ExponentVector(dim, 0)] = c;
            for (int j = 0; j < dim; ++j) {
                for (int rep = 0; rep < a[j]; ++rep) {
                    std::map<ExponentVector, double> next;
                    for (const auto& [e, v] : mono) {
                        for (int k = 0; k < dim; ++k) {
                            if (U(j, k) == 0.0) continue;
                            ExponentVector e2 = e;
                            e2[k] += 1;
                            next[e2] += v * U(j, k);
                        }
                    }
                    mono.swap(next);
                }
            }
            for (const auto& [e, v] : mono) acc[e] += v;
        }
        HomogeneousPolynomial q;
        q.degree = p.degree;
        for (const auto& [e, v] : acc)
            if (v != 0.0) q.terms[e] = v;
        if (q.terms.empty()) {
            ExponentVector e(dim, 0);
            e[0] = p.degree;
            q.terms[e] = 0.0;
        }
        out.push_back(std::move(q));
    }
    return make_system(f.n, std::move(out));
}

std::vector<ExponentVector> monomial_basis(int n, int degree) {
    std::vector<ExponentVector> basis;
    ExponentVector cur(n + 1, 0);
    // Ascending lexicographic enumeration of all |a| = degree.
    std::function<void(int, int)> rec = [&](int pos, int rem) {
        if (pos == n) {
            cur[pos] = rem;
            basis.push_back(cur);
            return;
        }
        for (int v = 0; v <= rem; ++v) {
            cur[pos] = v;
            rec(pos + 1, rem - v);
        }
        cur[pos] = 0;
    };
    rec(0, degree);
    return basis;
}

namespace {

// Deterministic standard Gaussian stream: Box-Muller over mt19937_64.
class GaussStream {
  public:
    explicit GaussStream(std::uint64_t seed) : rng_(seed) {}
    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
        double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;          // [0,1)
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace

std::vector<HomogeneousPolynomial> kostlan_raw(int n, int m, const std::vector<int>& degrees,
                                               std::uint64_t seed) {
    if (n < 1 || m < 1 || m > n) throw invalid_input("kostlan sample: need 1 <= m <= n");
    if (static_cast<int>(degrees.size()) != m)
        throw invalid_input("kostlan sample: need one degree per polynomial");
    for (int d : degrees)
        if (d < 2) throw invalid_input("kostlan sample: degrees must be >= 2");

    GaussStream g(seed);
    std::vector<HomogeneousPolynomial> polys;
    for (int i = 0; i < m; ++i) {
        HomogeneousPolynomial p;
        p.degree = degrees[i];
        for (const auto& a : monomial_basis(n, degrees[i]))
            p.terms[a] = std::sqrt(multinomial(degrees[i], a)) * g.next();
        polys.push_back(std::move(p));
    }
    return polys;
}

PolynomialSystem sample_kostlan(int n, int m, const std::vector<int>& degrees,
                                std::uint64_t seed) {
    auto polys = kostlan_raw(n, m, degrees, seed);
    double nrm = std::sqrt(weyl_norm_sq(polys));
    if (!(nrm > 0.0)) throw invalid_input("kostlan sample: degenerate draw");
    for (auto& p : polys)
        for (auto& [a, c] : p.terms) c /= nrm;
    return make_system(n, std::move(polys));
}

PolynomialSystem parse_system(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw invalid_input(std::string("system JSON parse error: ") + e.what());
    }
    try {
        if (!j.is_object() || !j.contains("n") || !j.contains("m") || !j.contains("polynomials"))
            throw invalid_input("system JSON must have fields n, m, polynomials");
        int n = j.at("n").get<int>();
        int m = j.at("m").get<int>();
        const auto& jp = j.at("polynomials");
        if (!jp.is_array() || static_cast<int>(jp.size()) != m)
            throw invalid_input("polynomials array length must equal m");
        std::vector<HomogeneousPolynomial> polys;
        for (const auto& pj : jp) {
            HomogeneousPolynomial p;
            p.degree = pj.at("degree").get<int>();
            for (const auto& tj : pj.at("terms")) {
                ExponentVector a = tj.at("exponents").get<ExponentVector>();
                double c = tj.at("coeff").get<double>();
                if (p.terms.count(a)) throw invalid_input("inconsistent term: duplicate exponents");
                p.terms[a] = c;
            }
            if (p.terms.empty()) throw invalid_input("polynomial with no terms");
            polys.push_back(std::move(p));
        }
        return make_system(n, std::move(polys));
    } catch (const json::exception& e) {
        throw invalid_input(std::string("system JSON structure error: ") + e.what());
    }
}

std::string serialize_system(const PolynomialSystem& f) {
    json j;
    j["n"] = f.n;
    j["m"] = f.m;
    j["polynomials"] = json::array();
    for (const auto& p : f.polys) {
        json pj;
        pj["degree"] = p.degree;
        pj["terms"] = json::array();
        for (const auto& [a, c] : p.terms) {
            json tj;
            tj["exponents"] = a;
            tj["coeff"] = c;
            pj["terms"].push_back(std::move(tj));
        }
        j["polynomials"].push_back(std::move(pj));
    }
    return j.dump();
}

}  // namespace realhom
