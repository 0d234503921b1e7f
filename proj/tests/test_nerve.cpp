#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "realhom/nerve.hpp"
#include "test_util.hpp"

using namespace realhom;

namespace {

Eigen::VectorXd v2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

// Reference MEB: every enclosing ball has radius >= the optimum, and the
// optimum is the circumscribed ball of some affinely independent subset of
// size <= dim+1 with center in the subset's affine hull. Enumerate all such
// candidates and take the smallest one that contains every point.
double brute_meb_radius(const std::vector<Eigen::VectorXd>& pts) {
    const int n = static_cast<int>(pts.size());
    const int d = static_cast<int>(pts[0].size());
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<int> idx;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        if (static_cast<int>(idx.size()) > d + 1) continue;
        const Eigen::VectorXd& p0 = pts[idx[0]];
        const int k = static_cast<int>(idx.size()) - 1;
        Eigen::MatrixXd A(d, k);
        for (int j = 0; j < k; ++j) A.col(j) = pts[idx[j + 1]] - p0;
        Eigen::MatrixXd G = A.transpose() * A;
        Eigen::VectorXd b(k);
        for (int j = 0; j < k; ++j) b(j) = 0.5 * A.col(j).squaredNorm();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
        lu.setThreshold(1e-10);
        if (!lu.isInvertible()) continue;
        Eigen::VectorXd c = p0 + A * lu.solve(b);
        double r = 0.0;
        for (int i : idx) r = std::max(r, (pts[i] - c).norm());
        bool encloses = true;
        for (const auto& p : pts)
            if ((p - c).norm() > r + 1e-9 * (1.0 + r)) {
                encloses = false;
                break;
            }
        if (encloses) best = std::min(best, r);
    }
    return best;
}

std::set<std::vector<std::int32_t>> simplex_set(const NerveComplex& c, int q) {
    std::set<std::vector<std::int32_t>> out;
    const auto& flat = c.simplices[q];
    for (std::size_t i = 0; i < flat.size(); i += q + 1)
        out.insert(std::vector<std::int32_t>(flat.begin() + i, flat.begin() + i + q + 1));
    return out;
}

Eigen::VectorXd canonical(const Eigen::VectorXd& v) {
    for (int j = 0; j < v.size(); ++j) {
        if (v(j) > 0.0) return v;
        if (v(j) < 0.0) return -v;
    }
    return v;
}

}  // namespace

TEST_CASE("min_enclosing_ball on closed-form inputs") {
    Ball b1 = min_enclosing_ball({v2(0.3, -0.7)});
    CHECK(b1.radius == doctest::Approx(0.0));
    CHECK(b1.center(0) == doctest::Approx(0.3));

    Ball b2 = min_enclosing_ball({v2(-1, 0), v2(1, 0)});
    CHECK(b2.radius == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b2.center.norm() == doctest::Approx(0.0).epsilon(1e-12));

    // unit equilateral triangle: circumradius 1/sqrt(3)
    Ball b3 = min_enclosing_ball({v2(0, 0), v2(1, 0), v2(0.5, std::sqrt(3.0) / 2.0)});
    CHECK(b3.radius == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));

    // obtuse triangle: the longest side is a diameter
    Ball b4 = min_enclosing_ball({v2(0, 0), v2(4, 0), v2(1, 1)});
    CHECK(b4.radius == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(b4.center(0) == doctest::Approx(2.0).epsilon(1e-12));

    Ball b5 = min_enclosing_ball({v2(2, 2), v2(2, 2), v2(2, 2)});
    CHECK(b5.radius == doctest::Approx(0.0));

    Ball b6 = min_enclosing_ball({v2(0, 0), v2(1, 0), v2(3, 0)});
    CHECK(b6.radius == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("min_enclosing_ball against subset enumeration") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        int d = 2 + int(rng() % 3);
        int n = 1 + int(rng() % 6);
        std::vector<Eigen::VectorXd> pts;
        for (int i = 0; i < n; ++i) {
            if (!pts.empty() && rng() % 8 == 0) {
                pts.push_back(pts[rng() % pts.size()]);  // duplicates allowed
                continue;
            }
            Eigen::VectorXd p(d);
            for (int j = 0; j < d; ++j) p(j) = U(rng);
            pts.push_back(p);
        }
        Ball w = min_enclosing_ball(pts);
        double ref = brute_meb_radius(pts);
        CHECK(std::abs(w.radius - ref) <= 1e-9 * (1.0 + ref));
        for (const auto& p : pts)
            CHECK((p - w.center).norm() <= w.radius + 1e-12 * (1.0 + w.radius));
    }
}

TEST_CASE("build_nerve on a distance-1 pair") {
    std::vector<Eigen::VectorXd> pts = {v2(0, 0), v2(1, 0)};
    NerveComplex with_edge = build_nerve(pts, 0.6, 1);
    CHECK(with_edge.count(0) == 2);
    CHECK(with_edge.count(1) == 1);
    NerveComplex no_edge = build_nerve(pts, 0.4, 1);
    CHECK(no_edge.count(0) == 2);
    CHECK(no_edge.count(1) == 0);
}

TEST_CASE("build_nerve on a unit triangle") {
    std::vector<Eigen::VectorXd> pts = {v2(0, 0), v2(1, 0), v2(0.5, std::sqrt(3.0) / 2.0)};
    NerveComplex full = build_nerve(pts, 0.6, 2);
    CHECK(full.count(1) == 3);
    CHECK(full.count(2) == 1);  // 1/sqrt(3) = 0.577 < 0.6
    NerveComplex hollow = build_nerve(pts, 0.55, 2);
    CHECK(hollow.count(1) == 3);
    CHECK(hollow.count(2) == 0);
    NerveComplex capped = build_nerve(pts, 0.6, 1);  // q_max respected
    CHECK(capped.q_max == 1);
    CHECK(static_cast<int>(capped.simplices.size()) == 2);
}

TEST_CASE("nerve tuples are sorted, unique and downward closed") {
    std::mt19937_64 rng(5150);
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(testutil::random_unit(rng, 3));
    NerveDiagnostics diag;
    NerveComplex c = build_nerve(pts, 0.5, 3, 10'000'000, 1, &diag);
    CHECK(diag.meb_calls > 0);
    for (int q = 0; q <= c.q_max; ++q) {
        auto set_q = simplex_set(c, q);
        CHECK(set_q.size() == static_cast<std::size_t>(c.count(q)));  // unique
        auto lower = q > 0 ? simplex_set(c, q - 1) : std::set<std::vector<std::int32_t>>{};
        const auto& flat = c.simplices[q];
        std::vector<std::int32_t> prev;
        for (std::size_t i = 0; i < flat.size(); i += q + 1) {
            std::vector<std::int32_t> tup(flat.begin() + i, flat.begin() + i + q + 1);
            for (int j = 0; j + 1 <= q; ++j) CHECK(tup[j] < tup[j + 1]);
            if (!prev.empty()) CHECK(prev < tup);  // lexicographic order
            bool facets_ok = true;
            for (int drop = 0; q > 0 && drop <= q; ++drop) {
                std::vector<std::int32_t> facet;
                for (int j = 0; j <= q; ++j)
                    if (j != drop) facet.push_back(tup[j]);
                if (!lower.count(facet)) facets_ok = false;
            }
            CHECK(facets_ok);
            prev = std::move(tup);
        }
    }
}

TEST_CASE("nerve grows monotonically with epsilon") {
    std::mt19937_64 rng(99);
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < 30; ++i) pts.push_back(testutil::random_unit(rng, 3));
    NerveComplex small = build_nerve(pts, 0.3, 2);
    NerveComplex large = build_nerve(pts, 0.5, 2);
    for (int q = 0; q <= 2; ++q) {
        auto s = simplex_set(small, q);
        auto l = simplex_set(large, q);
        for (const auto& tup : s) CHECK(l.count(tup) == 1);
    }
}

TEST_CASE("nerve simplex budget") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-0.01, 0.01);
    std::vector<Eigen::VectorXd> pts;  // 20 points inside a tiny ball
    for (int i = 0; i < 20; ++i) pts.push_back(v2(U(rng), U(rng)));
    CHECK_THROWS_AS(build_nerve(pts, 0.5, 4, 50), budget_exceeded);
}

TEST_CASE("nerve epsilon tie diagnostics") {
    std::vector<Eigen::VectorXd> pts = {v2(0, 0), v2(1, 0)};
    NerveDiagnostics diag;
    NerveComplex c = build_nerve(pts, 0.5, 1, 10'000'000, 1, &diag);
    CHECK(c.count(1) == 0);  // strict inequality: radius 0.5 is not < 0.5
    CHECK(diag.epsilon_ties == 1);
}

TEST_CASE("nerve determinism across workers") {
    std::mt19937_64 rng(31337);
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < 60; ++i) pts.push_back(testutil::random_unit(rng, 4));
    std::string a = serialize_nerve(build_nerve(pts, 0.6, 3, 10'000'000, 1));
    std::string b = serialize_nerve(build_nerve(pts, 0.6, 3, 10'000'000, 4));
    CHECK(a == b);
}

TEST_CASE("projective_reduce") {
    std::mt19937_64 rng(11);
    Eigen::VectorXd u = testutil::random_unit(rng, 3);
    Eigen::VectorXd w = testutil::random_unit(rng, 3);
    std::vector<Eigen::VectorXd> closed = {u, -u, w, -w};
    auto reps = projective_reduce(closed);
    REQUIRE(reps.size() == 2);
    for (const auto& r : reps) {
        bool first_pos = false;
        for (int j = 0; j < r.size(); ++j) {
            if (r(j) != 0.0) {
                first_pos = r(j) > 0.0;
                break;
            }
        }
        CHECK(first_pos);
    }
    CHECK_THROWS_AS(projective_reduce({u}), invalid_input);
    CHECK_THROWS_AS(projective_reduce({u, w}), invalid_input);
    CHECK_THROWS_AS(projective_reduce({u, u, -u}), invalid_input);
}

TEST_CASE("projective edge criterion") {
    std::mt19937_64 rng(4242);
    const double eps = 0.7;
    int checked = 0;
    while (checked < 200) {
        Eigen::VectorXd u = canonical(testutil::random_unit(rng, 3));
        Eigen::VectorXd w = canonical(testutil::random_unit(rng, 3));
        double dmin = std::min((u - w).norm(), (u + w).norm());
        if (std::abs(dmin - 2.0 * eps) < 1e-9) continue;  // skip knife-edge draws
        NerveComplex c = build_projective_nerve({u, w}, eps, 1);
        CHECK(c.count(1) == (dmin < 2.0 * eps ? 1 : 0));
        ++checked;
    }
}

TEST_CASE("projective triangle equals sign-enumerated MEB test") {
    std::mt19937_64 rng(606);
    const double eps = 0.8;
    int checked = 0;
    while (checked < 100) {
        std::vector<Eigen::VectorXd> reps;
        for (int i = 0; i < 3; ++i) reps.push_back(canonical(testutil::random_unit(rng, 3)));
        double best = std::numeric_limits<double>::infinity();
        for (int s1 : {-1, 1})
            for (int s2 : {-1, 1}) {
                best = std::min(best,
                                min_enclosing_ball({reps[0], s1 * reps[1], s2 * reps[2]}).radius);
            }
        if (std::abs(best - eps) < 1e-9) continue;
        bool pair_tie = false;
        for (int i = 0; i < 3 && !pair_tie; ++i)
            for (int j = i + 1; j < 3; ++j) {
                double dmin = std::min((reps[i] - reps[j]).norm(), (reps[i] + reps[j]).norm());
                if (std::abs(dmin - 2.0 * eps) < 1e-9) pair_tie = true;
            }
        if (pair_tie) continue;
        NerveComplex c = build_projective_nerve(reps, eps, 2);
        CHECK(c.count(2) == (best < eps ? 1 : 0));
        ++checked;
    }
}

TEST_CASE("projective nerve requires epsilon below one") {
    std::mt19937_64 rng(8);
    std::vector<Eigen::VectorXd> reps = {canonical(testutil::random_unit(rng, 3))};
    CHECK_THROWS_WITH_AS(build_projective_nerve(reps, 1.0, 1), doctest::Contains("epsilon < 1"),
                         invalid_input);
}

TEST_CASE("nerve JSON round trip") {
    std::string text = testutil::read_file(testutil::data_path("rp2_nerve.json"));
    NerveComplex c = parse_nerve(text);
    CHECK(c.vertex_count == 6);
    CHECK(c.q_max == 2);
    CHECK(c.count(0) == 6);
    CHECK(c.count(1) == 15);
    CHECK(c.count(2) == 10);
    NerveComplex back = parse_nerve(serialize_nerve(c));
    CHECK(back.simplices == c.simplices);
    CHECK(back.q_max == c.q_max);
}

TEST_CASE("parse_nerve rejects malformed input") {
    CHECK_THROWS_AS(parse_nerve("{"), invalid_input);
    CHECK_THROWS_AS(parse_nerve(R"({"simplices":{"0":[[0]]}})"), invalid_input);  // no q_max
    // tuple not strictly increasing
    CHECK_THROWS_AS(
        parse_nerve(R"({"q_max":1,"simplices":{"0":[[0],[1]],"1":[[1,0]]}})"),
        invalid_input);
    // dimension-0 layer must enumerate 0..V-1
    CHECK_THROWS_AS(parse_nerve(R"({"q_max":0,"simplices":{"0":[[0],[2]]}})"), invalid_input);
    // vertex index out of range
    CHECK_THROWS_AS(
        parse_nerve(R"({"q_max":1,"simplices":{"0":[[0],[1]],"1":[[0,5]]}})"),
        invalid_input);
    // duplicate lists are tolerated and deduplicated
    NerveComplex c =
        parse_nerve(R"({"q_max":1,"simplices":{"0":[[0],[1]],"1":[[0,1],[0,1]]}})");
    CHECK(c.count(1) == 1);
}
