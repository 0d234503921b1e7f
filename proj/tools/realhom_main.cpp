// realhom: certified homology of real zero sets on S^n and P^n.
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "realhom/pipeline.hpp"
#include "realhom/randharness.hpp"

namespace {

using namespace realhom;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_input("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content << "\n";
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw invalid_input("cannot write file: " + out_path);
    out << content << "\n";
}

struct ProfileFlags {
    std::string mode = "sphere";
    std::string profile = "certified";
    double alpha0 = 0.0;
    double gamma_factor = 0.0;
    double beta_factor = 0.0;
    double epsilon_factor = 0.0;
    double thin_theta = 0.0;
    int max_k = 0;
    long long point_budget = 0;
    long long simplex_budget = 10'000'000;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out;
    bool no_certificate = false;
};

void add_run_flags(CLI::App* sub, ProfileFlags& f) {
    sub->add_option("--mode", f.mode, "sphere | projective");
    sub->add_option("--profile", f.profile, "certified | guarded | practical");
    sub->add_option("--alpha0", f.alpha0, "alpha-theory acceptance threshold");
    sub->add_option("--gamma-factor", f.gamma_factor, "radius safety factor (1/(c*gamma))");
    sub->add_option("--beta-factor", f.beta_factor, "Newton-step acceptance factor");
    sub->add_option("--epsilon-factor", f.epsilon_factor, "ball radius as multiple of r");
    sub->add_option("--thin-theta", f.thin_theta, "greedy net radius as fraction of r");
    sub->add_option("--max-k", f.max_k, "finest mesh exponent before giving up");
    sub->add_option("--point-budget", f.point_budget, "max grid points per pass");
    sub->add_option("--simplex-budget", f.simplex_budget, "max simplices in the nerve");
    sub->add_option("--seed", f.seed, "random seed (sampling entry points)");
    sub->add_option("--workers", f.workers, "worker threads (default REALHOM_WORKERS)");
    sub->add_option("--out", f.out, "output path (default stdout)");
    sub->add_flag("--no-certificate", f.no_certificate,
                  "acknowledge that the practical profile forfeits the certificate");
}

int resolve_workers(const CLI::App* sub, int flag_value) {
    if (sub->count("--workers")) {
        if (flag_value < 1) throw invalid_input("--workers must be >= 1");
        return flag_value;
    }
    if (const char* env = std::getenv("REALHOM_WORKERS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw invalid_input("REALHOM_WORKERS must be a positive integer");
        return static_cast<int>(v);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

RunConfig make_config(const CLI::App* sub, const ProfileFlags& f) {
    RunConfig cfg;
    cfg.mode = f.mode;
    cfg.profile = f.profile;
    if (sub->count("--alpha0")) cfg.alpha0 = f.alpha0;
    if (sub->count("--gamma-factor")) cfg.gamma_factor = f.gamma_factor;
    if (sub->count("--beta-factor")) cfg.beta_factor = f.beta_factor;
    if (sub->count("--epsilon-factor")) cfg.epsilon_factor = f.epsilon_factor;
    if (sub->count("--thin-theta")) cfg.thin_theta = f.thin_theta;
    if (sub->count("--max-k")) cfg.max_k = f.max_k;
    if (sub->count("--point-budget")) cfg.point_budget = f.point_budget;
    cfg.simplex_budget = f.simplex_budget;
    cfg.seed = f.seed;
    cfg.workers = resolve_workers(sub, f.workers);
    cfg.no_certificate = f.no_certificate;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"homology (Betti numbers and torsion) of real zero sets of "
                 "homogeneous polynomial systems on S^n and P^n"};
    app.require_subcommand(1);

    // homology: full pipeline
    auto* sub_hom = app.add_subcommand("homology", "covering -> nerve -> homology");
    std::string hom_system;
    ProfileFlags hom_flags;
    sub_hom->add_option("system", hom_system, "system JSON file")->required();
    add_run_flags(sub_hom, hom_flags);

    // covering
    auto* sub_cov = app.add_subcommand("covering", "certified point cloud X and radius epsilon");
    std::string cov_system;
    ProfileFlags cov_flags;
    sub_cov->add_option("system", cov_system, "system JSON file")->required();
    add_run_flags(sub_cov, cov_flags);

    // nerve
    auto* sub_nrv = app.add_subcommand("nerve", "nerve complex of a covering");
    std::string nrv_covering, nrv_system, nrv_mode = "sphere", nrv_out;
    int nrv_qmax = -1, nrv_workers = 1;
    long long nrv_budget = 10'000'000;
    sub_nrv->add_option("covering", nrv_covering, "covering JSON file")->required();
    sub_nrv->add_option("--mode", nrv_mode, "sphere | projective");
    sub_nrv->add_option("--system", nrv_system, "system JSON file (derives --q-max = n-m+1)");
    sub_nrv->add_option("--q-max", nrv_qmax, "top simplex dimension");
    sub_nrv->add_option("--simplex-budget", nrv_budget, "max simplices in the nerve");
    sub_nrv->add_option("--workers", nrv_workers, "worker threads");
    sub_nrv->add_option("--out", nrv_out, "output path (default stdout)");

    // homology-from-nerve
    auto* sub_hfn = app.add_subcommand("homology-from-nerve",
                                       "Betti numbers and torsion of a raw complex");
    std::string hfn_nerve, hfn_out;
    int hfn_qtop = -1;
    sub_hfn->add_option("nerve", hfn_nerve, "nerve JSON file")->required();
    sub_hfn->add_option("--q-top", hfn_qtop, "top homology degree (default q_max - 1)");
    sub_hfn->add_option("--out", hfn_out, "output path (default stdout)");

    // condition
    auto* sub_cond = app.add_subcommand("condition", "grid lower estimate of kappa(f)");
    std::string cond_system, cond_out;
    int cond_k = 8;
    long long cond_budget = 500'000'000;
    sub_cond->add_option("system", cond_system, "system JSON file")->required();
    sub_cond->add_option("--k", cond_k, "mesh exponent (eta = 2^-k)");
    sub_cond->add_option("--point-budget", cond_budget, "max grid points");
    sub_cond->add_option("--out", cond_out, "output path (default stdout)");

    // tail-bench
    auto* sub_tail = app.add_subcommand("tail-bench",
                                        "empirical tail of the condition number vs the bound");
    int tail_n = 1, tail_m = 1, tail_k = 6, tail_workers = 1;
    long long tail_samples = 100, tail_budget = 500'000'000;
    std::uint64_t tail_seed = 0;
    std::vector<int> tail_degrees{2};
    std::vector<double> tail_thresholds{500.0, 1000.0, 5000.0};
    std::string tail_out;
    sub_tail->add_option("--n", tail_n, "sphere dimension");
    sub_tail->add_option("--m", tail_m, "number of polynomials");
    sub_tail->add_option("--degrees", tail_degrees, "degrees d_1..d_m")->delimiter(',');
    sub_tail->add_option("--samples", tail_samples, "number of random systems");
    sub_tail->add_option("--thresholds", tail_thresholds, "tail thresholds t")->delimiter(',');
    sub_tail->add_option("--k", tail_k, "mesh exponent for the kappa estimate");
    sub_tail->add_option("--seed", tail_seed, "random seed");
    sub_tail->add_option("--workers", tail_workers, "worker threads");
    sub_tail->add_option("--point-budget", tail_budget, "max grid points across all samples");
    sub_tail->add_option("--out", tail_out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        if (app.got_subcommand(sub_hom)) {
            PolynomialSystem f = parse_system(read_file(hom_system));
            RunConfig cfg = make_config(sub_hom, hom_flags);
            PipelineResult res = run_pipeline(f, cfg);
            write_output(hom_flags.out, serialize_result(res));
        } else if (app.got_subcommand(sub_cov)) {
            PolynomialSystem f = parse_system(read_file(cov_system));
            RunConfig cfg = make_config(sub_cov, cov_flags);
            Profile profile = resolve_profile(cfg);
            CoveringResult cov = run_covering(f, profile, cfg.workers);
            write_output(cov_flags.out, serialize_covering(cov));
        } else if (app.got_subcommand(sub_nrv)) {
            CoveringResult cov = parse_covering(read_file(nrv_covering));
            int q_max = nrv_qmax;
            if (!nrv_system.empty()) {
                PolynomialSystem f = parse_system(read_file(nrv_system));
                q_max = f.n - f.m + 1;
            }
            if (q_max < 0)
                throw invalid_input("nerve: provide --q-max or --system");
            if (nrv_mode != "sphere" && nrv_mode != "projective")
                throw invalid_input("unknown mode: " + nrv_mode);
            NerveComplex nc;
            if (nrv_mode == "sphere") {
                nc = build_nerve(cov.points, cov.epsilon, q_max, nrv_budget, nrv_workers);
            } else {
                std::vector<Eigen::VectorXd> reps = projective_reduce(cov.points);
                nc = build_projective_nerve(reps, cov.epsilon, q_max, nrv_budget, nrv_workers);
            }
            write_output(nrv_out, serialize_nerve(nc));
        } else if (app.got_subcommand(sub_hfn)) {
            NerveComplex nc = parse_nerve(read_file(hfn_nerve));
            int q_top = sub_hfn->count("--q-top") ? hfn_qtop : std::max(0, nc.q_max - 1);
            HomologyResult res = homology_from_complex(nc, q_top);
            write_output(hfn_out, serialize_homology(res));
        } else if (app.got_subcommand(sub_cond)) {
            PolynomialSystem f = parse_system(read_file(cond_system));
            double est = kappa_upper_estimate(f, cond_k, cond_budget);
            nlohmann::ordered_json j;
            j["k"] = cond_k;
            if (std::isfinite(est))
                j["kappa_estimate"] = est;
            else
                j["kappa_estimate"] = "inf";
            write_output(cond_out, j.dump());
        } else if (app.got_subcommand(sub_tail)) {
            TailReport rep = empirical_tail(tail_n, tail_m, tail_degrees, tail_samples,
                                            tail_thresholds, tail_k, tail_seed,
                                            resolve_workers(sub_tail, tail_workers),
                                            tail_budget);
            write_output(tail_out, tail_csv(rep));
        }
        return 0;
    } catch (const budget_exceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return 2;
    } catch (const invalid_input& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}
