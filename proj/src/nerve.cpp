#include "realhom/nerve.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstring>
#include <functional>
#include <random>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace realhom {

using json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t WELZL_SHUFFLE_SEED = 0x9E3779B97F4A7C15ull;

// Circumsphere of affinely independent support points (k <= dim+1); falls
// back to the minimal-norm least-squares center for degenerate supports.
Ball ball_from_support(const std::vector<const double*>& R, int dim) {
    Ball b;
    if (R.empty()) {
        b.radius = -1.0;
        return b;
    }
    Eigen::Map<const Eigen::VectorXd> p0(R[0], dim);
    if (R.size() == 1) {
        b.center = p0;
        b.radius = 0.0;
        return b;
    }
    const int k = static_cast<int>(R.size()) - 1;
    Eigen::MatrixXd U(k, dim);
    Eigen::VectorXd rhs(k);
    for (int i = 0; i < k; ++i) {
        Eigen::Map<const Eigen::VectorXd> pi(R[i + 1], dim);
        U.row(i) = (pi - p0).transpose();
        rhs(i) = 0.5 * U.row(i).squaredNorm();
    }
    // center = p0 + U^T lambda with (U U^T) lambda = rhs
    Eigen::MatrixXd G = U * U.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
    lu.setThreshold(1e-12);
    Eigen::VectorXd lambda;
    if (lu.rank() == k) {
        lambda = lu.solve(rhs);
    } else {
        lambda = G.completeOrthogonalDecomposition().solve(rhs);
    }
    b.center = p0 + U.transpose() * lambda;
    double r = 0.0;
    for (const double* q : R) {
        Eigen::Map<const Eigen::VectorXd> pq(q, dim);
        r = std::max(r, (pq - b.center).norm());
    }
    b.radius = r;
    return b;
}

inline bool ball_contains(const Ball& b, const double* p, int dim) {
    if (b.radius < 0.0) return false;
    Eigen::Map<const Eigen::VectorXd> v(p, dim);
    return (v - b.center).norm() <= b.radius + 1e-13 * (1.0 + b.radius);
}

Ball welzl(std::vector<const double*>& pts, std::size_t end, std::vector<const double*>& R,
           int dim) {
    if (end == 0 || static_cast<int>(R.size()) == dim + 1) return ball_from_support(R, dim);
    const double* p = pts[end - 1];
    Ball b = welzl(pts, end - 1, R, dim);
    if (ball_contains(b, p, dim)) return b;
    R.push_back(p);
    b = welzl(pts, end - 1, R, dim);
    R.pop_back();
    return b;
}

Ball meb_ptrs(std::vector<const double*> pts, int dim) {
    std::mt19937_64 rng(WELZL_SHUFFLE_SEED);
    std::shuffle(pts.begin(), pts.end(), rng);
    std::vector<const double*> R;
    R.reserve(dim + 2);
    return welzl(pts, pts.size(), R, dim);
}

struct CellHash {
    std::size_t operator()(const std::array<std::int64_t, 8>& a) const {
        std::size_t h = 1469598103934665603ull;
        for (auto v : a) {
            h ^= static_cast<std::size_t>(v);
            h *= 1099511628211ull;
        }
        return h;
    }
};

using Cell = std::array<std::int64_t, 8>;

Cell cell_of(const double* p, int dim, double cell) {
    Cell c{};
    for (int j = 0; j < dim; ++j) c[j] = static_cast<std::int64_t>(std::floor(p[j] / cell));
    return c;
}

// All indices hashed into cells within +-1 of the cell of p.
template <class F>
void probe_neighbors(const std::unordered_map<Cell, std::vector<std::int32_t>, CellHash>& hash,
                     const double* p, int dim, double cell, F&& f) {
    Cell base = cell_of(p, dim, cell);
    Cell probe = base;
    std::function<void(int)> rec = [&](int j) {
        if (j == dim) {
            auto it = hash.find(probe);
            if (it != hash.end())
                for (std::int32_t idx : it->second) f(idx);
            return;
        }
        for (std::int64_t o = -1; o <= 1; ++o) {
            probe[j] = base[j] + o;
            rec(j + 1);
        }
        probe[j] = base[j];
    };
    rec(0);
}

struct FlatPoints {
    const double* data;
    int dim;
    const double* operator[](std::int32_t i) const { return data + std::size_t(i) * dim; }
};

// Shared clique-extension driver. The simplex test is a callable
// (const std::int32_t* verts, int count) -> bool, also responsible for
// diagnostics.
template <class SimplexTest>
NerveComplex extend_cliques(int vertex_count, const std::vector<std::vector<std::int32_t>>& adj,
                            int q_max, index_t simplex_budget, int workers,
                            SimplexTest&& test) {
    NerveComplex nc;
    nc.vertex_count = vertex_count;
    nc.q_max = q_max;
    nc.simplices.assign(q_max + 1, {});

    index_t total = 0;
    auto charge = [&](index_t add) {
        total += add;
        if (total > simplex_budget)
            throw budget_exceeded("nerve simplex budget exceeded (" +
                                  std::to_string(simplex_budget) + ")");
    };

    for (std::int32_t v = 0; v < vertex_count; ++v) nc.simplices[0].push_back(v);
    charge(vertex_count);
    if (q_max == 0) return nc;

    for (std::int32_t u = 0; u < vertex_count; ++u)
        for (std::int32_t v : adj[u])
            if (v > u) {
                nc.simplices[1].push_back(u);
                nc.simplices[1].push_back(v);
            }
    charge(static_cast<index_t>(nc.simplices[1].size()) / 2);

    for (int q = 2; q <= q_max; ++q) {
        const auto& src = nc.simplices[q - 1];
        const index_t nsrc = static_cast<index_t>(src.size()) / q;
        if (nsrc == 0) break;
        auto extend_block = [&](index_t s0, index_t s1, std::vector<std::int32_t>& out) {
            std::vector<std::int32_t> verts(q + 1);
            for (index_t s = s0; s < s1; ++s) {
                const std::int32_t* sv = src.data() + s * q;
                for (int i = 0; i < q; ++i) verts[i] = sv[i];
                const std::int32_t back = sv[q - 1];
                const auto& cand_list = adj[sv[q - 1]];
                auto it = std::upper_bound(cand_list.begin(), cand_list.end(), back);
                for (; it != cand_list.end(); ++it) {
                    std::int32_t v = *it;
                    bool ok = true;
                    for (int i = 0; i + 1 < q && ok; ++i)
                        ok = std::binary_search(adj[sv[i]].begin(), adj[sv[i]].end(), v);
                    if (!ok) continue;
                    verts[q] = v;
                    if (test(verts.data(), q + 1)) out.insert(out.end(), verts.begin(), verts.end());
                }
            }
        };
        if (workers <= 1 || nsrc < 1024) {
            extend_block(0, nsrc, nc.simplices[q]);
        } else {
            const index_t nblocks = std::min<index_t>(nsrc, 8 * workers);
            const index_t bsz = (nsrc + nblocks - 1) / nblocks;
            std::vector<std::vector<std::int32_t>> outs(static_cast<std::size_t>(nblocks));
            std::atomic<index_t> next{0};
            auto worker_fn = [&]() {
                for (;;) {
                    index_t b = next.fetch_add(1);
                    if (b >= nblocks) return;
                    extend_block(b * bsz, std::min(nsrc, (b + 1) * bsz),
                                 outs[static_cast<std::size_t>(b)]);
                }
            };
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn);
            for (auto& t : pool) t.join();
            for (auto& o : outs)
                nc.simplices[q].insert(nc.simplices[q].end(), o.begin(), o.end());
        }
        charge(static_cast<index_t>(nc.simplices[q].size()) / (q + 1));
    }
    return nc;
}

void check_distinct(const std::vector<Eigen::VectorXd>& points) {
    if (points.empty()) return;
    std::vector<const Eigen::VectorXd*> sorted;
    for (const auto& p : points) sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
        for (int j = 0; j < a->size(); ++j)
            if ((*a)(j) != (*b)(j)) return (*a)(j) < (*b)(j);
        return false;
    });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (*sorted[i] == *sorted[i - 1])
            throw invalid_input("nerve: points must be pairwise distinct");
}

}  // namespace

Ball min_enclosing_ball(const std::vector<Eigen::VectorXd>& points) {
    if (points.empty()) throw invalid_input("min_enclosing_ball: empty input");
    const int dim = static_cast<int>(points.front().size());
    std::vector<const double*> ptrs;
    for (const auto& p : points) {
        if (p.size() != dim) throw invalid_input("min_enclosing_ball: dimension mismatch");
        ptrs.push_back(p.data());
    }
    return meb_ptrs(std::move(ptrs), dim);
}

NerveComplex build_nerve(const std::vector<Eigen::VectorXd>& points, double epsilon, int q_max,
                         index_t simplex_budget, int workers, NerveDiagnostics* diag) {
    if (!(epsilon > 0.0)) throw invalid_input("build_nerve: epsilon must be positive");
    if (q_max < 0) throw invalid_input("build_nerve: q_max must be >= 0");
    check_distinct(points);
    const int K = static_cast<int>(points.size());
    NerveDiagnostics local;
    NerveDiagnostics& d = diag ? *diag : local;

    if (K == 0) {
        NerveComplex nc;
        nc.q_max = q_max;
        nc.simplices.assign(q_max + 1, {});
        return nc;
    }
    const int dim = static_cast<int>(points.front().size());

    std::unordered_map<Cell, std::vector<std::int32_t>, CellHash> hash;
    for (std::int32_t i = 0; i < K; ++i)
        hash[cell_of(points[i].data(), dim, 2.0 * epsilon)].push_back(i);

    std::vector<std::vector<std::int32_t>> adj(K);
    for (std::int32_t i = 0; i < K; ++i) {
        probe_neighbors(hash, points[i].data(), dim, 2.0 * epsilon, [&](std::int32_t j) {
            if (j == i) return;
            double dist = (points[i] - points[j]).norm();
            if (std::abs(0.5 * dist - epsilon) <= 1e-12) ++d.epsilon_ties;
            if (dist < 2.0 * epsilon) adj[i].push_back(j);
        });
        std::sort(adj[i].begin(), adj[i].end());
        adj[i].erase(std::unique(adj[i].begin(), adj[i].end()), adj[i].end());
    }
    // edge ties counted once per unordered pair
    d.epsilon_ties /= 2;

    auto test = [&](const std::int32_t* verts, int count) {
        std::vector<const double*> ptrs(count);
        for (int i = 0; i < count; ++i) ptrs[i] = points[verts[i]].data();
        Ball b = meb_ptrs(std::move(ptrs), dim);
        ++d.meb_calls;
        if (std::abs(b.radius - epsilon) <= 1e-12) ++d.epsilon_ties;
        return b.radius < epsilon;
    };
    return extend_cliques(K, adj, q_max, simplex_budget, workers, test);
}

std::vector<Eigen::VectorXd> projective_reduce(const std::vector<Eigen::VectorXd>& points) {
    if (points.empty()) return {};
    const int dim = static_cast<int>(points.front().size());

    auto key = [dim](const Eigen::VectorXd& p) {
        std::string k(sizeof(double) * dim, '\0');
        std::memcpy(k.data(), p.data(), sizeof(double) * dim);
        return k;
    };
    std::unordered_set<std::string> all;
    for (const auto& p : points) all.insert(key(p));
    std::vector<Eigen::VectorXd> reps;
    for (const auto& p : points) {
        Eigen::VectorXd m(dim);
        for (int j = 0; j < dim; ++j) m(j) = (p(j) == 0.0) ? 0.0 : -p(j);
        if (!all.count(key(m)))
            throw invalid_input("projective_reduce: input not antipodally closed");
        bool canon = false;
        for (int j = 0; j < dim; ++j) {
            if (p(j) > 0.0) {
                canon = true;
                break;
            }
            if (p(j) < 0.0) break;
        }
        if (canon) reps.push_back(p);
    }
    if (reps.size() * 2 != points.size())
        throw invalid_input("projective_reduce: input not antipodally closed");
    return reps;
}

NerveComplex build_projective_nerve(const std::vector<Eigen::VectorXd>& representatives,
                                    double epsilon, int q_max, index_t simplex_budget,
                                    int workers, NerveDiagnostics* diag) {
    if (!(epsilon > 0.0)) throw invalid_input("build_projective_nerve: epsilon must be positive");
    if (epsilon >= 1.0) throw invalid_input("projective mode requires epsilon < 1");
    if (q_max < 0) throw invalid_input("build_projective_nerve: q_max must be >= 0");
    check_distinct(representatives);
    const int K = static_cast<int>(representatives.size());
    NerveDiagnostics local;
    NerveDiagnostics& d = diag ? *diag : local;

    if (K == 0) {
        NerveComplex nc;
        nc.q_max = q_max;
        nc.simplices.assign(q_max + 1, {});
        return nc;
    }
    const int dim = static_cast<int>(representatives.front().size());

    // hash both representatives and mirrors, mapping to the class index
    std::vector<Eigen::VectorXd> mirrors;
    mirrors.reserve(K);
    for (const auto& p : representatives) {
        Eigen::VectorXd m(dim);
        for (int j = 0; j < dim; ++j) m(j) = (p(j) == 0.0) ? 0.0 : -p(j);
        mirrors.push_back(std::move(m));
    }
    std::unordered_map<Cell, std::vector<std::int32_t>, CellHash> hash;
    for (std::int32_t i = 0; i < K; ++i) {
        hash[cell_of(representatives[i].data(), dim, 2.0 * epsilon)].push_back(i);
        hash[cell_of(mirrors[i].data(), dim, 2.0 * epsilon)].push_back(i);
    }

    std::vector<std::vector<std::int32_t>> adj(K);
    for (std::int32_t i = 0; i < K; ++i) {
        probe_neighbors(hash, representatives[i].data(), dim, 2.0 * epsilon,
                        [&](std::int32_t j) {
                            if (j == i) return;
                            double dm = std::min((representatives[i] - representatives[j]).norm(),
                                                 (representatives[i] + representatives[j]).norm());
                            if (std::abs(0.5 * dm - epsilon) <= 1e-12) ++d.epsilon_ties;
                            if (dm < 2.0 * epsilon) adj[i].push_back(j);
                        });
        std::sort(adj[i].begin(), adj[i].end());
        adj[i].erase(std::unique(adj[i].begin(), adj[i].end()), adj[i].end());
    }
    d.epsilon_ties /= 2;

    auto test = [&](const std::int32_t* verts, int count) {
        const int q = count - 1;
        std::vector<const double*> ptrs(count);
        ptrs[0] = representatives[verts[0]].data();
        bool tie_seen = false;
        for (std::uint32_t mask = 0; mask < (1u << q); ++mask) {
            for (int i = 1; i < count; ++i)
                ptrs[i] = (mask >> (i - 1)) & 1 ? mirrors[verts[i]].data()
                                                : representatives[verts[i]].data();
            Ball b = meb_ptrs(ptrs, dim);
            ++d.meb_calls;
            if (std::abs(b.radius - epsilon) <= 1e-12) tie_seen = true;
            if (b.radius < epsilon) {
                if (tie_seen) ++d.epsilon_ties;
                return true;
            }
        }
        if (tie_seen) ++d.epsilon_ties;
        return false;
    };
    return extend_cliques(K, adj, q_max, simplex_budget, workers, test);
}

std::string serialize_nerve(const NerveComplex& c) {
    json j;
    j["q_max"] = c.q_max;
    json simp = json::object();
    for (int q = 0; q <= c.q_max; ++q) {
        json list = json::array();
        const index_t cnt = c.count(q);
        for (index_t s = 0; s < cnt; ++s) {
            json tuple = json::array();
            for (int i = 0; i <= q; ++i) tuple.push_back(c.simplices[q][s * (q + 1) + i]);
            list.push_back(std::move(tuple));
        }
        simp[std::to_string(q)] = std::move(list);
    }
    j["simplices"] = std::move(simp);
    return j.dump();
}

NerveComplex parse_nerve(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw invalid_input(std::string("nerve JSON parse error: ") + e.what());
    }
    NerveComplex c;
    try {
        c.q_max = j.at("q_max").get<int>();
        if (c.q_max < 0 || c.q_max > 16) throw invalid_input("nerve JSON: q_max out of range");
        c.simplices.assign(c.q_max + 1, {});
        const auto& simp = j.at("simplices");
        for (int q = 0; q <= c.q_max; ++q) {
            auto key = std::to_string(q);
            if (!simp.contains(key)) continue;
            std::vector<std::vector<std::int32_t>> tuples;
            for (const auto& tj : simp.at(key)) {
                std::vector<std::int32_t> t = tj.get<std::vector<std::int32_t>>();
                if (static_cast<int>(t.size()) != q + 1)
                    throw invalid_input("nerve JSON: tuple length != q+1 in dimension " + key);
                for (std::size_t i = 1; i < t.size(); ++i)
                    if (t[i] <= t[i - 1])
                        throw invalid_input("nerve JSON: tuple not strictly increasing");
                tuples.push_back(std::move(t));
            }
            std::sort(tuples.begin(), tuples.end());
            tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
            for (const auto& t : tuples)
                c.simplices[q].insert(c.simplices[q].end(), t.begin(), t.end());
        }
        c.vertex_count = static_cast<int>(c.count(0));
        for (int q = 0; q <= c.q_max; ++q) {
            for (std::int32_t v : c.simplices[q])
                if (v < 0 || v >= c.vertex_count)
                    throw invalid_input("nerve JSON: vertex index out of range");
        }
        // 0-simplices must be exactly 0..V-1
        for (std::int32_t v = 0; v < c.vertex_count; ++v)
            if (c.simplices[0][v] != v)
                throw invalid_input("nerve JSON: vertex list must be 0..V-1");
    } catch (const json::exception& e) {
        throw invalid_input(std::string("nerve JSON structure error: ") + e.what());
    }
    return c;
}

}  // namespace realhom
