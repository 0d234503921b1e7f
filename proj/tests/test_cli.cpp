#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "test_util.hpp"

using json = nlohmann::ordered_json;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
};

const std::string& scratch_dir() {
    static std::string dir = [] {
        auto d = std::filesystem::temp_directory_path() /
                 ("realhom_cli_" + std::to_string(::getpid()));
        std::filesystem::create_directories(d);
        return d.string();
    }();
    return dir;
}

// Runs the installed binary through the shell, capturing stdout and the exit
// code. `env_prefix` lets a test set environment variables for one call.
CliRun run_cli(const std::string& args, const std::string& env_prefix = "") {
    static int seq = 0;
    std::string out_path = scratch_dir() + "/out" + std::to_string(seq++) + ".txt";
    std::string cmd = env_prefix + "\"" + REALHOM_BIN_PATH + "\" " + args + " > " + out_path +
                      " 2> /dev/null";
    int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    r.out = buf.str();
    return r;
}

std::string dump_without_runtime(const std::string& text) {
    json j = json::parse(text);
    if (j.contains("diagnostics")) j["diagnostics"].erase("runtime_ms");
    return j.dump();
}

}  // namespace

TEST_CASE("cli homology on four circle zeros") {
    CliRun r = run_cli("homology " + testutil::data_path("sys_s1.json"));
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["mode"] == "sphere");
    CHECK_FALSE(j.contains("empty"));
    CHECK(j["betti"] == json::array({4}));
    CHECK(j["torsion"] == json::array({json::array()}));
    CHECK(j["diagnostics"]["eta"].get<double>() ==
          doctest::Approx(std::ldexp(1.0, -20)).epsilon(1e-15));
    CHECK(j["diagnostics"]["points"].get<int>() > 0);
    CHECK(j["diagnostics"]["points"].get<int>() % 2 == 0);  // antipodally closed
    CHECK(j["diagnostics"]["passes"].get<int>() == 18);

    CliRun p = run_cli("homology " + testutil::data_path("sys_s1.json") + " --mode projective");
    REQUIRE(p.code == 0);
    json jp = json::parse(p.out);
    CHECK(jp["betti"] == json::array({2}));
    CHECK(jp["diagnostics"]["points"].get<int>() * 2 == j["diagnostics"]["points"].get<int>());
}

TEST_CASE("cli homology reports an empty zero set") {
    CliRun r = run_cli("homology " + testutil::data_path("sys_empty.json"));
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["empty"] == true);
    CHECK(j["betti"] == json::array());
    CHECK(j["diagnostics"]["passes"].get<int>() == 1);
    CHECK(j["diagnostics"]["eta"].get<double>() == doctest::Approx(0.125));
}

TEST_CASE("cli homology-from-nerve on stored complexes") {
    CliRun r = run_cli("homology-from-nerve " + testutil::data_path("rp2_nerve.json") +
                       " --q-top 2");
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["betti"] == json::array({1, 0, 0}));
    CHECK(j["torsion"] == json::array({json::array(), json::array({2}), json::array()}));

    // default q_top is one below the complex dimension
    CliRun d = run_cli("homology-from-nerve " + testutil::data_path("rp2_nerve.json"));
    REQUIRE(d.code == 0);
    json jd = json::parse(d.out);
    CHECK(jd["betti"] == json::array({1, 0}));
}

TEST_CASE("cli condition estimate near one for the circle pair") {
    CliRun r = run_cli("condition " + testutil::data_path("sys_s1.json") + " --k 10");
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["k"] == 10);
    double est = j["kappa_estimate"].get<double>();
    CHECK(est > 0.9);
    CHECK(est <= 1.0 + 1e-9);
}

TEST_CASE("cli tail-bench emits a monotone csv") {
    CliRun r = run_cli("tail-bench --n 1 --m 1 --degrees 2 --samples 10 "
                       "--thresholds 2,8,32 --k 3 --seed 5 --workers 1");
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "t,empirical,bound,samples,seed");
    double prev = 2.0;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        std::istringstream cells(line);
        std::string t, emp;
        std::getline(cells, t, ',');
        std::getline(cells, emp, ',');
        double e = std::stod(emp);
        CHECK(e <= prev);
        prev = e;
    }
    CHECK(rows == 3);
}

TEST_CASE("cli exit codes") {
    CHECK(run_cli("homology /nonexistent/system.json").code == 3);
    CHECK(run_cli("homology " + testutil::data_path("sys_bad_term.json")).code == 3);
    CHECK(run_cli("homology " + testutil::data_path("sys_s1.json") + " --profile practical")
              .code == 3);
    CHECK(run_cli("homology " + testutil::data_path("sys_s1.json") + " --profile turbo").code ==
          3);
    CHECK(run_cli("homology " + testutil::data_path("sys_s1.json") + " --unknown-flag").code ==
          3);
    CHECK(run_cli("").code == 3);  // a subcommand is required
    CHECK(run_cli("nerve /nonexistent/covering.json --q-max 1").code == 3);
    // mesh budget too small for the circle pair: budget exit
    CHECK(run_cli("homology " + testutil::data_path("sys_s1.json") + " --max-k 3").code == 2);
}

TEST_CASE("cli worker environment fallback") {
    std::string args = "tail-bench --n 1 --m 1 --degrees 2 --samples 2 --thresholds 4 --k 3";
    CHECK(run_cli(args, "REALHOM_WORKERS=2 ").code == 0);
    CHECK(run_cli(args, "REALHOM_WORKERS=abc ").code == 3);
    CHECK(run_cli(args, "REALHOM_WORKERS=0 ").code == 3);
}

TEST_CASE("cli results are byte-identical across runs and worker counts") {
    std::string base = "homology " + testutil::data_path("sys_s1.json");
    CliRun a = run_cli(base + " --workers 1");
    CliRun b = run_cli(base + " --workers 1");
    CliRun c = run_cli(base + " --workers 4");
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    REQUIRE(c.code == 0);
    CHECK(dump_without_runtime(a.out) == dump_without_runtime(b.out));
    CHECK(dump_without_runtime(a.out) == dump_without_runtime(c.out));
}

TEST_CASE("cli stages compose to the pipeline result") {
    std::string cov = scratch_dir() + "/cov_s1.json";
    std::string nrv = scratch_dir() + "/nerve_s1.json";
    std::string sys = testutil::data_path("sys_s1.json");

    REQUIRE(run_cli("covering " + sys + " --workers 1 --out " + cov).code == 0);
    json jc = json::parse(testutil::read_file(cov));
    CHECK(jc["profile"] == "certified");
    CHECK(jc["eta"].get<double>() == doctest::Approx(std::ldexp(1.0, -20)).epsilon(1e-15));
    REQUIRE(jc["points"].is_array());
    REQUIRE(!jc["points"].empty());
    CHECK(jc["points"][0].size() == 2);

    REQUIRE(run_cli("nerve " + cov + " --system " + sys + " --out " + nrv).code == 0);
    json jn = json::parse(testutil::read_file(nrv));
    CHECK(jn["q_max"] == 1);
    CHECK(jn["simplices"]["0"].size() == jc["points"].size());

    CliRun staged = run_cli("homology-from-nerve " + nrv);  // default q_top = 0
    REQUIRE(staged.code == 0);
    CliRun direct = run_cli("homology " + sys + " --workers 1");
    REQUIRE(direct.code == 0);
    json js = json::parse(staged.out);
    json jd = json::parse(direct.out);
    CHECK(js["betti"] == jd["betti"]);
    CHECK(js["torsion"] == jd["torsion"]);

    // nerve needs a dimension from somewhere
    CHECK(run_cli("nerve " + cov).code == 3);
}
