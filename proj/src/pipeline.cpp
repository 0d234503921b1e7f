#include "realhom/pipeline.hpp"

#include <chrono>

#include <nlohmann/json.hpp>

namespace realhom {

using json = nlohmann::ordered_json;

Profile resolve_profile(const RunConfig& cfg) {
    Profile p;
    if (cfg.profile == "certified")
        p = Profile::certified();
    else if (cfg.profile == "guarded")
        p = Profile::guarded();
    else if (cfg.profile == "practical")
        p = Profile::practical();
    else
        throw invalid_input("unknown profile: " + cfg.profile);
    if (cfg.profile == "practical" && !cfg.no_certificate)
        throw invalid_input("practical profile requires --no-certificate");

    const double theta = cfg.thin_theta.value_or(p.thin_theta);
    if (theta > 0.0 && cfg.profile != "practical") {
        // keep the covering guarantee: the net is theta*r-coarser, so the
        // acceptance radius and ball factor must grow by (1+theta)
        if (!cfg.gamma_factor) p.gamma_factor *= 1.0 + theta;
        if (!cfg.epsilon_factor) p.epsilon_factor *= 1.0 + theta;
    }
    p.thin_theta = theta;
    if (cfg.alpha0) p.alpha0 = *cfg.alpha0;
    if (cfg.gamma_factor) p.gamma_factor = *cfg.gamma_factor;
    if (cfg.beta_factor) p.beta_factor = *cfg.beta_factor;
    if (cfg.epsilon_factor) p.epsilon_factor = *cfg.epsilon_factor;
    if (cfg.max_k) p.max_k = *cfg.max_k;
    if (cfg.point_budget) p.point_budget = *cfg.point_budget;
    validate_profile(p);
    return p;
}

PipelineResult run_pipeline(const PolynomialSystem& f, const RunConfig& cfg) {
    if (cfg.mode != "sphere" && cfg.mode != "projective")
        throw invalid_input("unknown mode: " + cfg.mode);
    const auto t0 = std::chrono::steady_clock::now();
    Profile profile = resolve_profile(cfg);

    PipelineResult res;
    res.mode = cfg.mode;
    res.q_top = f.n - f.m;
    res.covering = run_covering(f, profile, cfg.workers);

    if (!res.covering.empty) {
        const int q_max = res.q_top + 1;
        NerveComplex nerve;
        if (cfg.mode == "sphere") {
            nerve = build_nerve(res.covering.points, res.covering.epsilon, q_max,
                                cfg.simplex_budget, cfg.workers);
        } else {
            std::vector<Eigen::VectorXd> reps = projective_reduce(res.covering.points);
            nerve = build_projective_nerve(reps, res.covering.epsilon, q_max,
                                           cfg.simplex_budget, cfg.workers);
        }
        for (int q = 0; q <= nerve.q_max; ++q)
            res.simplices_per_dim.push_back(nerve.count(q));
        res.homology = homology_from_complex(nerve, res.q_top);
        res.empty = false;
    } else {
        res.empty = true;
    }
    res.runtime_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    return res;
}

namespace {

json torsion_to_json(const std::vector<std::vector<mpz_class>>& torsion) {
    json t = json::array();
    for (const auto& dim : torsion) {
        json list = json::array();
        for (const auto& d : dim) {
            if (d.fits_slong_p())
                list.push_back(d.get_si());
            else
                list.push_back(d.get_str());
        }
        t.push_back(std::move(list));
    }
    return t;
}

}  // namespace

std::string serialize_result(const PipelineResult& r, bool with_runtime) {
    json j;
    j["mode"] = r.mode;
    if (r.empty) j["empty"] = true;
    j["betti"] = r.homology.betti;
    j["torsion"] = torsion_to_json(r.homology.torsion);
    json d;
    d["eta"] = r.covering.eta;
    d["epsilon"] = r.covering.epsilon;
    d["points"] = r.simplices_per_dim.empty() ? 0 : r.simplices_per_dim[0];
    d["simplices_per_dim"] = r.simplices_per_dim;
    d["passes"] = r.covering.passes;
    if (with_runtime) d["runtime_ms"] = r.runtime_ms;
    j["diagnostics"] = std::move(d);
    return j.dump();
}

std::string serialize_homology(const HomologyResult& r) {
    json j;
    j["betti"] = r.betti;
    j["torsion"] = torsion_to_json(r.torsion);
    return j.dump();
}

}  // namespace realhom
