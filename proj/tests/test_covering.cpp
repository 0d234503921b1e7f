#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <set>

#include "realhom/covering.hpp"
#include "test_util.hpp"

using namespace realhom;

namespace {

std::string byte_key(const Eigen::VectorXd& v) {
    std::string k(sizeof(double) * v.size(), '\0');
    std::memcpy(k.data(), v.data(), k.size());
    return k;
}

Eigen::VectorXd mirror(const Eigen::VectorXd& v) {
    Eigen::VectorXd m(v.size());
    for (int j = 0; j < v.size(); ++j) m(j) = (v(j) == 0.0) ? 0.0 : -v(j);
    return m;
}

}  // namespace

TEST_CASE("sep and delta formulas") {
    CHECK(sep(0.25, 1) == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-15));
    CHECK(sep(0.125, 2) == doctest::Approx(sep(0.25, 2) / 2.0).epsilon(1e-15));
    CHECK(sep(0.0625, 3) == doctest::Approx(0.5 * sep(0.125, 3)).epsilon(1e-15));

    PolynomialSystem f = testutil::make_empty_system();
    CHECK(exclusion_delta(f, 0.125) ==
          doctest::Approx(1.1 * std::sqrt(6.0) * std::sqrt(3.0) / 8.0).epsilon(1e-12));
    CHECK(exclusion_delta(f, 0.125, 2.2) == doctest::Approx(2.0 * exclusion_delta(f, 0.125)));
}

TEST_CASE("profile validation") {
    CHECK_NOTHROW(validate_profile(Profile::certified()));
    CHECK_NOTHROW(validate_profile(Profile::guarded()));
    Profile g = Profile::guarded();
    CHECK(g.alpha0 == doctest::Approx(0.0625));
    CHECK(g.gamma_factor == doctest::Approx(1000.0));
    CHECK(g.beta_factor == doctest::Approx(4.4));
    CHECK(g.exclusion_margin == doctest::Approx(2.2));

    Profile bad = Profile::certified();
    bad.alpha0 = 0.2;
    CHECK_THROWS_AS(validate_profile(bad), invalid_input);
    bad = Profile::certified();
    bad.gamma_factor = 100.0;
    CHECK_THROWS_AS(validate_profile(bad), invalid_input);
    bad = Profile::certified();
    bad.thin_theta = 0.5;  // needs gamma and epsilon rescaled by 1.5
    CHECK_THROWS_AS(validate_profile(bad), invalid_input);
    bad.gamma_factor = 531.0 * 1.5;
    bad.epsilon_factor = 3.5 * 1.5;
    CHECK_NOTHROW(validate_profile(bad));
}

TEST_CASE("classify_point on the empty system") {
    PolynomialSystem f = testutil::make_empty_system();
    GridSpec spec = make_grid_spec(2, 3);
    Profile prof = Profile::certified();
    enumerate_grid(spec, -1, [&](const GridPoint& p, index_t) {
        Classification c = classify_point(f, p, spec.eta, prof);
        CHECK(c.action == Action::Exclude);
    });
}

TEST_CASE("classify_point at an exact grid zero") {
    PolynomialSystem f = testutil::make_s1_system();
    Profile prof = Profile::certified();
    prof.fast_exclude = false;

    GridPoint corner;  // cube point (1,1) -> sphere zero (1/sqrt2, 1/sqrt2)
    corner.dim = 2;

    // at eta = 1/8: r = sqrt(sep) = 0.42 > 1/(531 gamma_bar) -> Refine
    corner.c = {8, 8};
    Classification coarse = classify_point(f, corner, 0.125, prof);
    CHECK(coarse.action == Action::Refine);
    CHECK(coarse.estimates.gamma_bar == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    // at eta = 2^-20: r = 1.16e-3 < 1/(531 sqrt2) = 1.33e-3 -> Accept
    corner.c = {1 << 20, 1 << 20};
    Classification fine = classify_point(f, corner, std::ldexp(1.0, -20), prof);
    CHECK(fine.action == Action::Accept);
    CHECK(fine.estimates.alpha_bar == doctest::Approx(0.0));
}

TEST_CASE("run_covering: empty zero set in one pass") {
    CoveringResult res = run_covering(testutil::make_empty_system(), Profile::certified());
    CHECK(res.empty);
    CHECK(res.points.empty());
    CHECK(res.passes == 1);
    CHECK(res.eta == doctest::Approx(0.125));
    REQUIRE(res.pass_stats.size() == 1);
    CHECK(res.pass_stats[0].scanned == 1538);
    CHECK(res.pass_stats[0].excluded == 1538);
}

TEST_CASE("run_covering: four zeros on the circle") {
    PolynomialSystem f = testutil::make_s1_system();
    CoveringResult res = run_covering(f, Profile::certified());
    REQUIRE_FALSE(res.empty);
    CHECK(res.eta == doctest::Approx(std::ldexp(1.0, -20)));
    CHECK(res.r == doctest::Approx(std::sqrt(sep(res.eta, 1))));
    CHECK(res.epsilon == doctest::Approx(3.5 * res.r));
    CHECK(res.epsilon_admissible_min == doctest::Approx(3.0 * res.r));
    CHECK(res.epsilon_admissible_max == doctest::Approx(4.0 * res.r));

    // accepted points obey the beta test and cluster around the 4 zeros
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<Eigen::VectorXd> zeros;
    for (double a : {s, -s})
        for (double b : {s, -s}) {
            Eigen::VectorXd z(2);
            z << a, b;
            zeros.push_back(z);
        }
    std::set<int> hit;
    for (const auto& x : res.points) {
        CHECK(evaluate(f, x).norm() / f.weyl < res.r / 2.2);
        double best = 1e300;
        int arg = -1;
        for (int i = 0; i < 4; ++i) {
            double d = (x - zeros[i]).norm();
            if (d < best) {
                best = d;
                arg = i;
            }
        }
        CHECK(best <= res.r + 1e-12);  // Hausdorff, X -> zero set
        hit.insert(arg);
    }
    CHECK(hit.size() == 4);  // zero set -> X at the cluster level

    // antipodal closure, bit-exact
    std::set<std::string> keys;
    for (const auto& x : res.points) keys.insert(byte_key(x));
    CHECK(keys.size() == res.points.size());
    for (const auto& x : res.points) CHECK(keys.count(byte_key(mirror(x))) == 1);

    // sorted by integer cube coordinates
    for (std::size_t i = 1; i < res.cube_coords.size(); ++i)
        CHECK(res.cube_coords[i - 1] < res.cube_coords[i]);
}

TEST_CASE("run_covering: budget exhaustion reports the last eta") {
    PolynomialSystem f = testutil::make_s1_system();
    Profile prof = Profile::certified();
    prof.max_k = 3;
    try {
        run_covering(f, prof);
        FAIL("expected budget_exceeded");
    } catch (const budget_exceeded& e) {
        CHECK(e.last_eta == doctest::Approx(0.125));
        CHECK(e.refine_count > 0);
    }
}

TEST_CASE("thin_to_net") {
    std::vector<Eigen::VectorXd> pts;
    auto add_pair = [&](double a, double b) {
        Eigen::VectorXd v(2);
        v << a, b;
        pts.push_back(v);
        pts.push_back(mirror(v));
    };
    add_pair(1.0, 0.0);
    add_pair(std::sqrt(1.0 - 0.05 * 0.05), 0.05);  // distance ~0.05 from first

    CHECK(thin_to_net(pts, 0.0).size() == 4);  // theta = 0 -> identity
    auto net = thin_to_net(pts, 0.2);
    CHECK(net.size() == 2);  // one representative plus its mirror

    // greedy-simulation oracle on a random antipodally closed set
    std::mt19937_64 rng(77);
    std::vector<Eigen::VectorXd> cloud;
    for (int t = 0; t < 300; ++t) {
        Eigen::VectorXd u = testutil::random_unit(rng, 3);
        cloud.push_back(u);
        cloud.push_back(mirror(u));
    }
    const double radius = 0.35;
    auto out = thin_to_net(cloud, radius);

    auto canonical = [](const Eigen::VectorXd& v) {
        for (int j = 0; j < v.size(); ++j) {
            if (v(j) > 0.0) return true;
            if (v(j) < 0.0) return false;
        }
        return false;
    };
    std::vector<Eigen::VectorXd> reps;
    for (const auto& p : cloud)
        if (canonical(p)) reps.push_back(p);
    std::sort(reps.begin(), reps.end(), [](const auto& a, const auto& b) {
        for (int j = 0; j < a.size(); ++j)
            if (a(j) != b(j)) return a(j) < b(j);
        return false;
    });
    std::vector<Eigen::VectorXd> kept;
    for (const auto& p : reps) {
        bool covered = false;
        for (const auto& q : kept)
            if ((p - q).norm() <= radius) {
                covered = true;
                break;
            }
        if (!covered) kept.push_back(p);
    }
    CHECK(out.size() == 2 * kept.size());
    std::set<std::string> outkeys;
    for (const auto& p : out) outkeys.insert(byte_key(p));
    for (const auto& p : kept) {
        CHECK(outkeys.count(byte_key(p)) == 1);
        CHECK(outkeys.count(byte_key(mirror(p))) == 1);
    }
    // every discarded point is within radius of a kept point
    for (const auto& p : reps) {
        double best = 1e300;
        for (const auto& q : kept) best = std::min(best, (p - q).norm());
        CHECK(best <= radius + 1e-15);
    }
}

TEST_CASE("covering determinism across runs and workers") {
    PolynomialSystem f = testutil::make_s1_system();
    Profile prof = Profile::certified();
    std::string a = serialize_covering(run_covering(f, prof, 1));
    std::string b = serialize_covering(run_covering(f, prof, 1));
    std::string c = serialize_covering(run_covering(f, prof, 4));
    CHECK(a == b);
    CHECK(a == c);
}

TEST_CASE("covering JSON round trip") {
    PolynomialSystem f = testutil::make_s1_system();
    CoveringResult res = run_covering(f, Profile::certified());
    std::string text = serialize_covering(res);
    CoveringResult back = parse_covering(text);
    CHECK(back.eta == res.eta);
    CHECK(back.r == res.r);
    CHECK(back.epsilon == res.epsilon);
    REQUIRE(back.points.size() == res.points.size());
    for (std::size_t i = 0; i < res.points.size(); ++i)
        CHECK(byte_key(back.points[i]) == byte_key(res.points[i]));
    CHECK_THROWS_AS(parse_covering("{"), invalid_input);
}
