#include "realhom/covering.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <limits>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace realhom {

using json = nlohmann::ordered_json;

static const double QNAN = std::numeric_limits<double>::quiet_NaN();

Profile Profile::certified() { return Profile{}; }

Profile Profile::guarded() {
    Profile p;
    p.name = "guarded";
    p.alpha0 = 0.0625;
    p.gamma_factor = 1000.0;
    p.beta_factor = 4.4;
    p.exclusion_margin = 2.2;
    return p;
}

Profile Profile::practical() {
    Profile p;
    p.name = "practical";
    return p;
}

void validate_profile(const Profile& p) {
    if (p.name != "certified" && p.name != "guarded" && p.name != "practical")
        throw invalid_input("profile name must be certified, guarded or practical");
    if (!(p.alpha0 > 0.0) || p.alpha0 > 0.125)
        throw invalid_input("profile: alpha0 must be in (0, 0.125]");
    if (!(p.thin_theta >= 0.0)) throw invalid_input("profile: thin_theta must be >= 0");
    if (!(p.gamma_factor > 0.0) || !(p.beta_factor > 0.0) || !(p.epsilon_factor > 0.0))
        throw invalid_input("profile: factors must be positive");
    if (p.exclusion_margin < 1.1 * (1.0 - 1e-12))
        throw invalid_input("profile: exclusion_margin below 1.1 is unsound");
    if (p.point_budget < 1) throw invalid_input("profile: point budget must be positive");
    if (p.max_k < -1) throw invalid_input("profile: max_k must be >= -1");
    double s = 1.0 + p.thin_theta;
    auto check_scaled = [&](double a0, double g, double b, double margin) {
        if (p.alpha0 > a0 * (1.0 + 1e-12))
            throw invalid_input("profile " + p.name + ": alpha0 too large");
        if (p.gamma_factor < g * s * (1.0 - 1e-12))
            throw invalid_input("profile " + p.name +
                                ": gamma_factor must be >= " + std::to_string(g) +
                                "*(1+thin_theta)");
        if (p.beta_factor < b * (1.0 - 1e-12))
            throw invalid_input("profile " + p.name + ": beta_factor too small");
        if (p.exclusion_margin < margin * (1.0 - 1e-12))
            throw invalid_input("profile " + p.name + ": exclusion_margin too small");
        if (p.epsilon_factor < 3.0 * s * (1.0 - 1e-12) ||
            p.epsilon_factor > 4.0 * s * (1.0 + 1e-12))
            throw invalid_input("profile " + p.name +
                                ": epsilon_factor must lie in [3,4]*(1+thin_theta)");
    };
    if (p.name == "certified") check_scaled(0.125, 531.0, 2.2, 1.1);
    if (p.name == "guarded") check_scaled(0.0625, 1000.0, 4.4, 2.2);
}

double sep(double eta, int n) {
    if (!(eta > 0.0)) throw invalid_input("sep: eta must be positive");
    return eta * std::sqrt(double(n + 1));
}

double exclusion_delta(const PolynomialSystem& f, double eta, double margin) {
    if (!(eta > 0.0)) throw invalid_input("exclusion_delta: eta must be positive");
    return margin * std::sqrt(double(f.D) * (f.n + 1)) * f.weyl * eta;
}

namespace {

// first nonzero coordinate positive
inline bool is_canonical(const GridPoint& p) {
    for (int j = 0; j < p.dim; ++j) {
        if (p.c[j] > 0) return true;
        if (p.c[j] < 0) return false;
    }
    throw internal_error("zero grid point");
}

inline GridPoint canonical_rep(const GridPoint& p) {
    if (is_canonical(p)) return p;
    GridPoint q = p;
    for (int j = 0; j < q.dim; ++j) q.c[j] = -q.c[j];
    return q;
}

// -v with +0.0 preserved, so mirrored tuples stay bit-exact negations.
inline void mirror_coords(const double* v, double* out, int dim) {
    for (int j = 0; j < dim; ++j) out[j] = (v[j] == 0.0) ? 0.0 : -v[j];
}

struct PassParams {
    double eta;
    double r;
    double delta;
};

// Classification core shared by classify_point and the pass loop. sphere_out,
// when non-null, receives the canonical-representative unit point.
Classification classify_core(const PolynomialSystem& f, const GridPoint& p,
                             const PassParams& pp, const Profile& prof,
                             Eigen::VectorXd* sphere_out) {
    GridPoint cp = canonical_rep(p);
    Eigen::VectorXd x = cp.sphere(pp.eta);
    if (sphere_out) *sphere_out = x;

    Classification c;
    if (prof.fast_exclude) {
        double res = evaluate(f, x).norm();
        if (res >= pp.delta) {
            c.action = Action::Exclude;
            c.estimates = PointEstimates{QNAN, QNAN, QNAN, QNAN, res, QNAN};
            return c;
        }
        c.estimates = point_estimates(f, x);
        bool accept = c.estimates.alpha_bar <= prof.alpha0 &&
                      1.0 / (prof.gamma_factor * c.estimates.gamma_bar) >= pp.r &&
                      prof.beta_factor * c.estimates.beta_bar < pp.r;
        c.action = accept ? Action::Accept : Action::Refine;
        return c;
    }
    c.estimates = point_estimates(f, x);
    bool accept = c.estimates.alpha_bar <= prof.alpha0 &&
                  1.0 / (prof.gamma_factor * c.estimates.gamma_bar) >= pp.r &&
                  prof.beta_factor * c.estimates.beta_bar < pp.r;
    if (accept)
        c.action = Action::Accept;
    else if (c.estimates.residual_norm >= pp.delta)
        c.action = Action::Exclude;
    else
        c.action = Action::Refine;
    return c;
}

struct ArrayHash {
    std::size_t operator()(const std::array<std::int64_t, 8>& a) const {
        std::size_t h = 1469598103934665603ull;
        for (auto v : a) {
            h ^= static_cast<std::size_t>(v);
            h *= 1099511628211ull;
        }
        return h;
    }
};

// Greedy net over a stream of canonical points arriving in sorted order.
// radius < 0 disables thinning (every offered point kept).
class OnlineThinner {
  public:
    OnlineThinner(int dim, double radius) : dim_(dim), radius_(radius) {}

    void offer(const std::int64_t* coords, const double* pt) {
        if (radius_ >= 0.0 && radius_ > 0.0) {
            if (near_kept(pt)) return;
            add_to_hash(pt, static_cast<std::int32_t>(kept_pts_.size() / dim_));
        }
        for (int j = 0; j < dim_; ++j) {
            kept_coords_.push_back(coords[j]);
            kept_pts_.push_back(pt[j]);
        }
    }

    index_t kept_count() const { return static_cast<index_t>(kept_pts_.size()) / dim_; }
    const std::vector<std::int64_t>& coords() const { return kept_coords_; }
    const std::vector<double>& pts() const { return kept_pts_; }

  private:
    using Cell = std::array<std::int64_t, 8>;

    Cell cell_of(const double* pt) const {
        Cell c{};
        for (int j = 0; j < dim_; ++j)
            c[j] = static_cast<std::int64_t>(std::floor(pt[j] / radius_));
        return c;
    }

    bool near_kept(const double* pt) const {
        Cell base = cell_of(pt);
        Cell probe = base;
        return probe_cells(pt, probe, 0);
    }

    bool probe_cells(const double* pt, Cell& probe, int j) const {
        if (j == dim_) {
            auto it = hash_.find(probe);
            if (it == hash_.end()) return false;
            for (std::int32_t idx : it->second) {
                const double* q = kept_pts_.data() + static_cast<std::size_t>(idx) * dim_;
                double d2 = 0.0;
                for (int t = 0; t < dim_; ++t) d2 += (pt[t] - q[t]) * (pt[t] - q[t]);
                if (d2 <= radius_ * radius_) return true;
            }
            return false;
        }
        std::int64_t b = probe[j];
        for (std::int64_t o = -1; o <= 1; ++o) {
            probe[j] = b + o;
            if (probe_cells(pt, probe, j + 1)) return true;
        }
        probe[j] = b;
        return false;
    }

    void add_to_hash(const double* pt, std::int32_t idx) {
        hash_[cell_of(pt)].push_back(idx);
    }

    int dim_;
    double radius_;
    std::vector<std::int64_t> kept_coords_;
    std::vector<double> kept_pts_;
    std::unordered_map<Cell, std::vector<std::int32_t>, ArrayHash> hash_;
};

struct ChunkOut {
    std::vector<std::int64_t> coords;  // canonical accepted, dim-strided
    std::vector<double> pts;
    index_t scanned = 0, accepted = 0, excluded = 0, refined = 0;
    bool refine_seen = false;
};

void process_chunk(const PolynomialSystem& f, const Profile& prof, const GridSpec& spec,
                   const PassParams& pp, index_t begin, index_t end, ChunkOut& out) {
    int dim = spec.n + 1;
    enumerate_grid_range(spec, begin, end, [&](const GridPoint& p, index_t) {
        ++out.scanned;
        Classification c = classify_core(f, p, pp, prof, nullptr);
        switch (c.action) {
            case Action::Accept: {
                ++out.accepted;
                if (is_canonical(p)) {
                    Eigen::VectorXd x = p.sphere(pp.eta);
                    for (int j = 0; j < dim; ++j) {
                        out.coords.push_back(p.c[j]);
                        out.pts.push_back(x(j));
                    }
                }
                break;
            }
            case Action::Exclude:
                ++out.excluded;
                break;
            case Action::Refine:
                ++out.refined;
                out.refine_seen = true;
                break;
        }
    });
}

// Runs one pass. Returns false as soon as a Refine point is merged (pass
// failed; eta must halve). Chunk partition and merge order are fixed,
// independent of worker count.
bool run_pass(const PolynomialSystem& f, const Profile& prof, const GridSpec& spec,
              const PassParams& pp, int workers, index_t total, OnlineThinner& thinner,
              PassStats& stats) {
    const index_t chunk_size = 1 << 16;
    const index_t nchunks = (total + chunk_size - 1) / chunk_size;
    int dim = spec.n + 1;

    auto merge_chunk = [&](const ChunkOut& co) -> bool {
        stats.scanned += co.scanned;
        stats.accepted += co.accepted;
        stats.excluded += co.excluded;
        stats.refined += co.refined;
        if (co.refine_seen) return false;
        const index_t k = static_cast<index_t>(co.coords.size()) / dim;
        for (index_t i = 0; i < k; ++i)
            thinner.offer(co.coords.data() + i * dim, co.pts.data() + i * dim);
        return true;
    };

    if (workers <= 1) {
        for (index_t ci = 0; ci < nchunks; ++ci) {
            ChunkOut co;
            process_chunk(f, prof, spec, pp, ci * chunk_size,
                          std::min(total, (ci + 1) * chunk_size), co);
            if (!merge_chunk(co)) return false;
        }
        return true;
    }

    std::mutex mu;
    std::condition_variable cv_ready, cv_space;
    std::vector<std::unique_ptr<ChunkOut>> results(static_cast<std::size_t>(nchunks));
    index_t next_claim = 0, merged = 0;
    bool aborted = false;
    const index_t inflight_cap = 8 * static_cast<index_t>(workers);

    auto worker_fn = [&]() {
        for (;;) {
            index_t ci;
            {
                std::unique_lock<std::mutex> lk(mu);
                cv_space.wait(lk, [&] { return aborted || next_claim - merged < inflight_cap; });
                if (aborted || next_claim >= nchunks) return;
                ci = next_claim++;
            }
            auto co = std::make_unique<ChunkOut>();
            process_chunk(f, prof, spec, pp, ci * chunk_size,
                          std::min(total, (ci + 1) * chunk_size), *co);
            {
                std::lock_guard<std::mutex> lk(mu);
                results[static_cast<std::size_t>(ci)] = std::move(co);
            }
            cv_ready.notify_all();
        }
    };

    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn);

    bool clean = true;
    for (index_t ci = 0; ci < nchunks; ++ci) {
        std::unique_ptr<ChunkOut> co;
        {
            std::unique_lock<std::mutex> lk(mu);
            cv_ready.wait(lk, [&] { return results[static_cast<std::size_t>(ci)] != nullptr; });
            co = std::move(results[static_cast<std::size_t>(ci)]);
            ++merged;
        }
        cv_space.notify_all();
        if (!merge_chunk(*co)) {
            clean = false;
            break;
        }
    }
    {
        std::lock_guard<std::mutex> lk(mu);
        aborted = true;
    }
    cv_space.notify_all();
    for (auto& t : pool) t.join();
    return clean;
}

}  // namespace

Classification classify_point(const PolynomialSystem& f, const GridPoint& p, double eta,
                              const Profile& profile) {
    std::int64_t M = static_cast<std::int64_t>(std::llround(1.0 / eta));
    std::int64_t mx = 0;
    for (int j = 0; j < p.dim; ++j) mx = std::max(mx, std::abs(p.c[j]));
    if (mx != M) throw invalid_input("classify_point: point not on the mesh-eta cube surface");
    PassParams pp{eta, std::sqrt(sep(eta, p.dim - 1)),
                  exclusion_delta(f, eta, profile.exclusion_margin)};
    return classify_core(f, p, pp, profile, nullptr);
}

CoveringResult run_covering(const PolynomialSystem& f, const Profile& profile, int workers) {
    validate_profile(profile);
    const int n = f.n;
    const int dim = n + 1;
    const int k0 = initial_mesh_exponent(n);
    const int max_k = profile.max_k < 0 ? k0 + 40 : profile.max_k;
    if (max_k < k0)
        throw budget_exceeded("covering: max_k below the initial mesh exponent " +
                                  std::to_string(k0),
                              std::ldexp(1.0, -k0), -1);

    CoveringResult result;
    result.dim = dim;
    result.profile_name = profile.name;

    for (int k = k0; k <= max_k; ++k) {
        GridSpec spec = make_grid_spec(n, k);
        PassParams pp{spec.eta, std::sqrt(sep(spec.eta, n)),
                      exclusion_delta(f, spec.eta, profile.exclusion_margin)};
        index_t total = grid_point_count(n, k);
        if (total > profile.point_budget)
            throw budget_exceeded("covering: pass at k=" + std::to_string(k) + " needs " +
                                      std::to_string(total) + " grid points, budget " +
                                      std::to_string(profile.point_budget),
                                  spec.eta, -1);

        double thin_radius = profile.thin_theta > 0.0 ? profile.thin_theta * pp.r : -1.0;
        OnlineThinner thinner(dim, thin_radius);
        PassStats stats;
        stats.k = k;
        bool clean = run_pass(f, profile, spec, pp, workers, total, thinner, stats);
        result.pass_stats.push_back(stats);
        ++result.passes;

        if (!clean) continue;

        if (profile.thin_theta == 0.0 && stats.accepted != 2 * thinner.kept_count())
            throw internal_error("covering: accepted set not antipodally paired");

        result.eta = spec.eta;
        result.r = pp.r;
        result.final_k = k;
        result.epsilon = profile.epsilon_factor * pp.r;
        result.epsilon_admissible_min = 3.0 * (1.0 + profile.thin_theta) * pp.r;
        result.epsilon_admissible_max = 4.0 * (1.0 + profile.thin_theta) * pp.r;
        result.accepted_raw = stats.accepted;

        const index_t kept = thinner.kept_count();
        result.points.reserve(static_cast<std::size_t>(2 * kept));
        std::vector<std::pair<std::array<std::int64_t, 8>, Eigen::VectorXd>> all;
        all.reserve(static_cast<std::size_t>(2 * kept));
        for (index_t i = 0; i < kept; ++i) {
            std::array<std::int64_t, 8> cc{};
            Eigen::VectorXd v(dim), w(dim);
            for (int j = 0; j < dim; ++j) {
                cc[j] = thinner.coords()[i * dim + j];
                v(j) = thinner.pts()[i * dim + j];
            }
            all.emplace_back(cc, v);
            std::array<std::int64_t, 8> mc{};
            for (int j = 0; j < dim; ++j) mc[j] = -cc[j];
            mirror_coords(v.data(), w.data(), dim);
            all.emplace_back(mc, w);
        }
        std::sort(all.begin(), all.end(), [dim](const auto& a, const auto& b) {
            for (int j = 0; j < dim; ++j) {
                if (a.first[j] != b.first[j]) return a.first[j] < b.first[j];
            }
            return false;
        });
        for (auto& [cc, v] : all) {
            result.cube_coords.push_back(cc);
            result.points.push_back(std::move(v));
        }
        result.empty = result.points.empty();

        double max_gamma = 0.0;
        for (const auto& p : result.points)
            max_gamma = std::max(max_gamma, point_estimates(f, p).gamma_bar);
        result.tau_proxy = (max_gamma > 0.0 && !result.points.empty())
                               ? 1.0 / (87.0 * max_gamma)
                               : 0.0;
        return result;
    }

    index_t last_refined = result.pass_stats.empty() ? -1 : result.pass_stats.back().refined;
    throw budget_exceeded("covering: mesh budget max_k=" + std::to_string(max_k) +
                              " exhausted with unresolved points",
                          std::ldexp(1.0, -max_k), last_refined);
}

std::vector<Eigen::VectorXd> thin_to_net(const std::vector<Eigen::VectorXd>& points,
                                         double radius) {
    if (!(radius >= 0.0)) throw invalid_input("thin_to_net: radius must be >= 0");
    if (points.empty()) return {};
    const int dim = static_cast<int>(points.front().size());

    // canonical representatives, sorted
    std::vector<const Eigen::VectorXd*> reps;
    for (const auto& p : points) {
        bool canon = false;
        for (int j = 0; j < dim; ++j) {
            if (p(j) > 0.0) {
                canon = true;
                break;
            }
            if (p(j) < 0.0) break;
        }
        if (canon) reps.push_back(&p);
    }
    std::sort(reps.begin(), reps.end(), [](const auto* a, const auto* b) {
        for (int j = 0; j < a->size(); ++j)
            if ((*a)(j) != (*b)(j)) return (*a)(j) < (*b)(j);
        return false;
    });

    OnlineThinner thinner(dim, radius > 0.0 ? radius : -1.0);
    std::array<std::int64_t, 8> dummy{};
    for (const auto* p : reps) thinner.offer(dummy.data(), p->data());

    std::vector<Eigen::VectorXd> out;
    const index_t kept = thinner.kept_count();
    for (index_t i = 0; i < kept; ++i) {
        Eigen::VectorXd v(dim), w(dim);
        for (int j = 0; j < dim; ++j) v(j) = thinner.pts()[i * dim + j];
        mirror_coords(v.data(), w.data(), dim);
        out.push_back(std::move(v));
        out.push_back(std::move(w));
    }
    std::sort(out.begin(), out.end(), [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        for (int j = 0; j < a.size(); ++j)
            if (a(j) != b(j)) return a(j) < b(j);
        return false;
    });
    return out;
}

std::string serialize_covering(const CoveringResult& c) {
    json j;
    j["eta"] = c.eta;
    j["r"] = c.r;
    j["epsilon"] = c.epsilon;
    j["profile"] = c.profile_name;
    j["points"] = json::array();
    for (const auto& p : c.points) {
        json row = json::array();
        for (int i = 0; i < p.size(); ++i) row.push_back(p(i));
        j["points"].push_back(std::move(row));
    }
    return j.dump();
}

CoveringResult parse_covering(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw invalid_input(std::string("covering JSON parse error: ") + e.what());
    }
    CoveringResult c;
    try {
        c.eta = j.at("eta").get<double>();
        c.r = j.at("r").get<double>();
        c.epsilon = j.at("epsilon").get<double>();
        c.profile_name = j.at("profile").get<std::string>();
        for (const auto& row : j.at("points")) {
            Eigen::VectorXd v(row.size());
            for (std::size_t i = 0; i < row.size(); ++i) v(i) = row[i].get<double>();
            if (c.dim == 0) c.dim = static_cast<int>(v.size());
            if (v.size() != c.dim)
                throw invalid_input("covering JSON: inhomogeneous point dimensions");
            c.points.push_back(std::move(v));
        }
    } catch (const json::exception& e) {
        throw invalid_input(std::string("covering JSON structure error: ") + e.what());
    }
    c.empty = c.points.empty();
    return c;
}

}  // namespace realhom
