#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#ifndef SKEWFRONT_CLI_PATH
#define SKEWFRONT_CLI_PATH "skewfront"
#endif
#ifndef SKEWFRONT_TMP_DIR
#define SKEWFRONT_TMP_DIR "."
#endif

namespace {

const std::string cli = SKEWFRONT_CLI_PATH;
const std::string tmp = SKEWFRONT_TMP_DIR;

int run(const std::string& args, const std::string& stdout_file = "") {
    std::string cmd = cli + " " + args;
    if (!stdout_file.empty()) cmd += " > " + stdout_file;
    cmd += " 2> /dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("gen-env is deterministic byte for byte") {
    const std::string a = tmp + "/cli_env_a.json", b = tmp + "/cli_env_b.json";
    REQUIRE(run("gen-env --degrees 3:1.0 --lengths 1:1.0 --horizon 100 --seed 7 --out " + a) == 0);
    REQUIRE(run("gen-env --degrees 3:1.0 --lengths 1:1.0 --horizon 100 --seed 7 --out " + b) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(!slurp(a + ".manifest.json").empty());
}

TEST_CASE("speed closed form emits parseable JSON with the expected value") {
    const std::string out = tmp + "/cli_speed.json";
    REQUIRE(run("speed --closed-form 3,1 --beta 5", out) == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(std::abs(j["c_star"].get<double>() - 2.7823272365833) < 1e-9);
    CHECK(j["method"] == "constant_closed_form");
    CHECK(j["assumption_ok"] == true);
}

TEST_CASE("xi subcommand emits the documented CSV columns") {
    const std::string env = tmp + "/cli_env_a.json";
    REQUIRE(run("gen-env --degrees 3:1.0 --lengths 1:1.0 --horizon 100 --seed 7 --out " + env) == 0);
    const std::string out = tmp + "/cli_xi.csv";
    REQUIRE(run("xi --env " + env + " --lambda-grid 0.5:1:2 --out " + out) == 0);
    const auto text = slurp(out);
    CHECK(text.rfind("lambda,inv_xi,iterations,certified_bound\n", 0) == 0);
    double lam = 0, inv = 0;
    std::size_t it = 0;
    double bound = 0;
    CHECK(std::sscanf(text.c_str() + text.find('\n') + 1, "%lf,%lf,%zu,%lf", &lam, &inv, &it,
                      &bound) == 4);
    CHECK(std::abs(inv - 0.37804931345742) < 1e-10);
    CHECK(!slurp(out + ".manifest.json").empty());
}

TEST_CASE("unknown flags exit with the usage code") {
    CHECK(run("speed --closed-form 3,1 --beta 5 --no-such-flag") == 64);
    CHECK(run("") == 64);
}

TEST_CASE("strict mode flags beta at or below beta_c with exit code 2") {
    CHECK(run("speed --closed-form 10,1 --beta 0.5 --strict") == 2);
    CHECK(run("speed --closed-form 10,1 --beta 5 --strict") == 0);
}

TEST_CASE("degenerate-line mu' serializes infinity as a string") {
    const std::string env = tmp + "/cli_line.json";
    REQUIRE(run("gen-env --degrees 2:1.0 --lengths 1:1.0 --horizon 64 --seed 3 --out " + env) == 0);
    const std::string out = tmp + "/cli_eta.json";
    REQUIRE(run("eta-c --env " + env, out) == 0);
    const auto j = nlohmann::json::parse(slurp(out)); // strict JSON parse must succeed
    CHECK(j["estimate"].get<double>() == 0.0);
}

TEST_CASE("validate passes on a constant tree") {
    const std::string env = tmp + "/cli_env_a.json";
    REQUIRE(run("gen-env --degrees 3:1.0 --lengths 1:1.0 --horizon 100 --seed 7 --out " + env) == 0);
    CHECK(run("validate --env " + env + " --paths 40000 --threads 2") == 0);
}

TEST_CASE("mc-hit is reproducible and thread-count invariant") {
    const std::string env = tmp + "/cli_env_a.json";
    const std::string o1 = tmp + "/cli_hit1.json", o2 = tmp + "/cli_hit2.json";
    REQUIRE(run("mc-hit --env " + env + " --lambda 0.5 --paths 20000 --seed 5 --threads 1", o1) == 0);
    REQUIRE(run("mc-hit --env " + env + " --lambda 0.5 --paths 20000 --seed 5 --threads 3", o2) == 0);
    CHECK(slurp(o1) == slurp(o2));
}

TEST_CASE("speed-sweep produces the figure data") {
    const std::string out = tmp + "/cli_sweep.csv";
    REQUIRE(run("speed-sweep --closed-form 4,1 --beta 1:5:5 --out " + out) == 0);
    const auto text = slurp(out);
    CHECK(text.rfind("beta,c_star,lambda_star,sqrt_2beta\n", 0) == 0);
    // five rows plus header
    CHECK(std::count(text.begin(), text.end(), '\n') == 6);
    const std::string pout = tmp + "/cli_sweep_p.csv";
    REQUIRE(run("speed-sweep --closed-form 4,1 --p-grid 0.6:0.9:4 --beta-fixed 5 --out " + pout) ==
            0);
    CHECK(slurp(pout).rfind("p,d,beta,c_star,sqrt_2beta\n", 0) == 0);
}
