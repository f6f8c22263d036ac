// Command-line front end: one binary, one subcommand per workflow. Every
// output file written through --out is accompanied by a <file>.manifest.json
// holding the resolved configuration, seeds, environment digest, tool version
// and wall clock, which is enough to reproduce the file bit-exactly (Monte
// Carlo results are thread-count invariant by construction).
//
// Exit codes: 0 success, 1 error, 2 validation failure, 64 usage.

#include <chrono>
#include <filesystem>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skewfront/skewfront.hpp"

using nlohmann::json;
using namespace skewfront;

namespace {

struct GridSpec {
    double lo = 0.0, hi = 1.0;
    int n = 1;
};

GridSpec parse_grid(const std::string& text) {
    GridSpec g;
    if (std::sscanf(text.c_str(), "%lf:%lf:%d", &g.lo, &g.hi, &g.n) != 3 || g.n < 1)
        throw CLI::ValidationError("grid", "expected lo:hi:n, got '" + text + "'");
    return g;
}

std::vector<double> expand_grid(const GridSpec& g) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i)
        out.push_back(g.n == 1 ? g.lo : g.lo + (g.hi - g.lo) * i / (g.n - 1.0));
    return out;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::vector<DegreeAtom> parse_degrees(const std::string& text) {
    std::vector<DegreeAtom> atoms;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        DegreeAtom a;
        if (std::sscanf(tok.c_str(), "%d:%lf", &a.degree, &a.weight) != 2)
            throw CLI::ValidationError("degrees", "expected d:w[,d:w...], got '" + text + "'");
        atoms.push_back(a);
    }
    return atoms;
}

LengthLaw parse_lengths(const std::string& text) {
    if (text.rfind("uniform:", 0) == 0) {
        double lo = 0, hi = 0;
        if (std::sscanf(text.c_str(), "uniform:%lf:%lf", &lo, &hi) != 2)
            throw CLI::ValidationError("lengths", "expected uniform:lo:hi, got '" + text + "'");
        return LengthLaw::uniform(lo, hi);
    }
    std::vector<LengthAtom> atoms;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        LengthAtom a;
        if (std::sscanf(tok.c_str(), "%lf:%lf", &a.length, &a.weight) != 2)
            throw CLI::ValidationError("lengths", "expected l:w[,l:w...] or uniform:lo:hi");
        atoms.push_back(a);
    }
    return LengthLaw::discrete(atoms);
}

/// Numbers serialized as JSON numbers; NaN/Inf as the strings "nan"/"inf".
json num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string csv_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct OutputSink {
    std::string path; // empty: stdout
    void write(const std::string& body, const json& manifest) const {
        if (path.empty()) {
            std::cout << body;
            return;
        }
        {
            std::ofstream out(path);
            if (!out) throw std::runtime_error("cannot open " + path);
            out << body;
        }
        std::ofstream man(path + ".manifest.json");
        man << manifest.dump(2) << "\n";
    }
};

json base_manifest(const std::string& subcommand, const json& config) {
    json m;
    m["subcommand"] = subcommand;
    m["config"] = config;
    m["tool_version"] = SKEWFRONT_VERSION;
    return m;
}

json speed_result_json(const SpeedResult& r) {
    json j;
    j["beta"] = num(r.beta);
    j["c_star"] = num(r.c_star);
    j["lambda_star"] = num(r.lambda_star);
    j["beta_c"] = num(r.beta_c);
    j["assumption_ok"] = r.assumption_ok;
    j["assumption_status"] = r.assumption_status;
    j["method"] = r.method;
    j["eta_c_bracket"] = {num(r.eta_c_lo), num(r.eta_c_hi)};
    return j;
}

TreeEnvironment load_env_arg(const std::string& path) { return load(path); }

/// Per-interface kernel table: i, p_plus, p_minus, J_plus(eta), J_minus(eta).
void write_kernel_csv(const TreeEnvironment& env, double eta, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "i,p_plus,p_minus,J_plus,J_minus\n";
    for (std::size_t i = 1; i + 1 <= env.horizon(); ++i) {
        const auto k = kernel_at(env, i);
        const auto pr = exit_probabilities(k);
        const auto jj = exit_laplace(k, eta);
        out << i << "," << csv_num(pr.first) << "," << csv_num(pr.second) << ","
            << csv_num(jj.first) << "," << csv_num(jj.second) << "\n";
    }
}

int run_validate(const TreeEnvironment& env, std::size_t paths, unsigned threads,
                 std::uint64_t seed) {
    int failures = 0;
    auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "[pass] " : "[FAIL] ") << name << ": " << detail << "\n";
        if (!ok) ++failures;
    };

    { // kernel closed form vs Monte Carlo at a negative and a positive exponent
        const auto k = kernel_at(env, 1);
        const double thr = divergence_threshold(k);
        for (double eta : {-0.5, 0.2 * thr}) {
            RngStream rng(seed, "validate.kernel", eta < 0 ? 0 : 1);
            OnlineStats jp;
            for (std::size_t i = 0; i < paths; ++i) {
                const auto [side, t] = sample_skew_exit(k.p, k.a, k.b, rng);
                jp.add(side > 0 ? std::exp(eta * t) : 0.0);
            }
            const double cf = exit_laplace(k, eta, thr).first;
            const double z = (jp.mean - cf) / jp.std_error();
            char buf[128];
            std::snprintf(buf, sizeof(buf), "eta=%.4g mc=%.6g cf=%.6g z=%.2f", eta, jp.mean, cf,
                          z);
            report("kernel exit_laplace vs MC", std::abs(z) < 4.0, buf);
        }
    }

    { // xi vs explicit matrix products
        bool ok = true;
        double worst = 0.0;
        for (double lam : {0.3, 1.0, 3.0}) {
            const auto est = xi(env, lam, 1e-12);
            const auto mp = matrix_product_ratio(extended(env, est.iterations + 1), lam,
                                                 est.iterations + 1);
            const double diff = std::abs(mp.ratio - est.inv_xi);
            worst = std::max(worst, diff - est.residual);
            ok = ok && diff <= est.residual + 1e-10;
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "worst excess %.3g", worst);
        report("xi vs matrix products", ok, buf);
    }

    { // hitting-time Laplace transform vs the w closed form
        McOptions mo;
        mo.seed = seed;
        mo.threads = threads;
        mo.stream_label = "validate.hit";
        const auto est = hitting_time_laplace_mc(env, 1, 0, 0.5, paths, mo);
        const double w = w_laplace(env, 0.5);
        const double z = (est.estimate - w) / est.std_error;
        char buf[128];
        std::snprintf(buf, sizeof(buf), "mc=%.6g cf=%.6g z=%.2f", est.estimate, w, z);
        report("w_laplace vs MC", std::abs(z) < 4.0, buf);
    }

    if (env.is_constant() && env.degree(1) > 2) { // variational vs closed form
        const double beta = 5.0;
        const auto rv = speed_variational(env, beta);
        const auto rc = speed_constant_closed_form(env.degree(1), env.edge_length(0), beta);
        const double rel = std::abs(rv.c_star - rc.c_star) / rc.c_star;
        char buf[128];
        std::snprintf(buf, sizeof(buf), "var=%.8g cf=%.8g rel=%.3g", rv.c_star, rc.c_star, rel);
        report("variational vs constant closed form", rel < 1e-5, buf);
    }
    return failures == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"skewfront: FKPP wave speeds on random metric trees"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand
    app.set_config("--config", "", "read options from a config file");
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = hardware)")
        ->envname("SKEWFRONT_THREADS");
    std::string output_format = "json";
    app.add_option("--output", output_format, "json|csv where applicable")
        ->envname("SKEWFRONT_OUTPUT");
    bool show_config = false;
    app.add_flag("--show-config", show_config,
                 "print every resolved option (defaults included) and exit");

    const auto t_start = std::chrono::steady_clock::now();
    auto wall_clock = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    // gen-env ----------------------------------------------------------------
    auto* gen_cmd = app.add_subcommand("gen-env", "generate a random tree environment");
    std::string degrees_spec = "3:1.0", lengths_spec = "1:1.0", gen_out;
    std::size_t horizon = 1000;
    std::uint64_t seed = 1;
    gen_cmd->add_option("--degrees", degrees_spec, "degree support d:w[,d:w...]");
    gen_cmd->add_option("--lengths", lengths_spec, "length support l:w[,...] or uniform:lo:hi");
    gen_cmd->add_option("--horizon", horizon, "materialized generations");
    gen_cmd->add_option("--seed", seed, "master seed")->envname("SKEWFRONT_SEED");
    gen_cmd->add_option("--out", gen_out, "output environment file")->required();

    // xi ---------------------------------------------------------------------
    auto* xi_cmd = app.add_subcommand("xi", "limit ratio xi_lambda across a lambda grid");
    std::string xi_env, xi_grid = "0.1:2:10", xi_out;
    double xi_tol = 1e-12;
    xi_cmd->add_option("--env", xi_env)->required();
    xi_cmd->add_option("--lambda-grid", xi_grid, "lo:hi:n");
    xi_cmd->add_option("--tol", xi_tol);
    xi_cmd->add_option("--out", xi_out);

    // mu ---------------------------------------------------------------------
    auto* mu_cmd = app.add_subcommand("mu", "Lyapunov exponent mu(-lambda) across a grid");
    std::string mu_env, mu_grid = "0.1:2:10", mu_out;
    std::size_t mu_window = 0;
    mu_cmd->add_option("--env", mu_env)->required();
    mu_cmd->add_option("--lambda-grid", mu_grid, "lo:hi:n");
    mu_cmd->add_option("--window", mu_window, "ergodic window (0 = auto)");
    mu_cmd->add_option("--out", mu_out);

    // eta-c --------------------------------------------------------------------
    auto* eta_cmd = app.add_subcommand("eta-c", "critical exponent estimate");
    std::string eta_env, eta_out;
    std::size_t eta_kmax = 8192;
    eta_cmd->add_option("--env", eta_env)->required();
    eta_cmd->add_option("--k-max", eta_kmax);
    eta_cmd->add_option("--out", eta_out);

    // speed --------------------------------------------------------------------
    auto* speed_cmd = app.add_subcommand("speed", "asymptotic wave speed");
    std::string speed_env, speed_cf, speed_out;
    double speed_beta = 1.0;
    bool strict = false;
    speed_cmd->add_option("--env", speed_env);
    speed_cmd->add_option("--beta", speed_beta)->required();
    speed_cmd->add_option("--closed-form", speed_cf, "d,ell for the constant-tree closed form");
    speed_cmd->add_flag("--strict", strict, "exit 2 when beta <= beta_c");
    speed_cmd->add_option("--out", speed_out);

    // speed-sweep ----------------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand("speed-sweep", "c* across beta (or p) for plotting");
    std::string sweep_env, sweep_cf, sweep_out, sweep_beta_grid, sweep_p_grid;
    double sweep_beta_fixed = 5.0;
    sweep_cmd->add_option("--env", sweep_env);
    sweep_cmd->add_option("--closed-form", sweep_cf, "d,ell");
    sweep_cmd->add_option("--beta", sweep_beta_grid, "lo:hi:n");
    sweep_cmd->add_option("--p-grid", sweep_p_grid, "lo:hi:n over p=(d-1)/d (closed form only)");
    sweep_cmd->add_option("--beta-fixed", sweep_beta_fixed, "beta used with --p-grid");
    sweep_cmd->add_option("--out", sweep_out);

    // mc-hit ---------------------------------------------------------------------
    auto* hit_cmd = app.add_subcommand("mc-hit", "Monte Carlo hitting-time Laplace transform");
    std::string hit_env, hit_out;
    std::int64_t hit_from = 1, hit_to = 0;
    double hit_lambda = 0.5;
    std::size_t hit_paths = 100000;
    std::uint64_t hit_seed = 1;
    hit_cmd->add_option("--env", hit_env)->required();
    hit_cmd->add_option("--from", hit_from, "start interface index");
    hit_cmd->add_option("--to", hit_to, "target interface index");
    hit_cmd->add_option("--lambda", hit_lambda)->check(CLI::NonNegativeNumber);
    hit_cmd->add_option("--paths", hit_paths);
    hit_cmd->add_option("--seed", hit_seed)->envname("SKEWFRONT_SEED");
    hit_cmd->add_option("--out", hit_out);

    // mc-drift --------------------------------------------------------------------
    auto* drift_cmd = app.add_subcommand("mc-drift", "LLN drift from the lattice simulator");
    std::string drift_env, drift_out;
    LatticeSimConfig drift_cfg;
    std::int64_t drift_start = 10;
    drift_cmd->add_option("--env", drift_env)->required();
    drift_cmd->add_option("--t-max", drift_cfg.t_max);
    drift_cmd->add_option("--paths", drift_cfg.n_paths);
    drift_cmd->add_option("--step", drift_cfg.step);
    drift_cmd->add_option("--start", drift_start, "start interface index");
    drift_cmd->add_option("--seed", drift_cfg.seed)->envname("SKEWFRONT_SEED");
    drift_cmd->add_option("--out", drift_out);

    // mc-ldp ---------------------------------------------------------------------
    auto* ldp_cmd = app.add_subcommand("mc-ldp", "Lyapunov identity trend vs t");
    std::string ldp_env, ldp_out, ldp_tgrid = "10,20,40";
    double ldp_c = 0.5, ldp_v = 1.5, ldp_lambda = 1.0;
    std::size_t ldp_paths = 50000;
    std::uint64_t ldp_seed = 1;
    ldp_cmd->add_option("--env", ldp_env)->required();
    ldp_cmd->add_option("--c", ldp_c);
    ldp_cmd->add_option("--v", ldp_v);
    ldp_cmd->add_option("--lambda", ldp_lambda);
    ldp_cmd->add_option("--t-grid", ldp_tgrid, "comma list of times");
    ldp_cmd->add_option("--paths", ldp_paths, "paths per hop factor");
    ldp_cmd->add_option("--seed", ldp_seed)->envname("SKEWFRONT_SEED");
    ldp_cmd->add_option("--out", ldp_out);

    // pde ------------------------------------------------------------------------
    auto* pde_cmd = app.add_subcommand("pde", "direct FKPP solve with front tracking");
    std::string pde_env, pde_out, pde_snapshots;
    PdeConfig pde_cfg;
    pde_cmd->add_option("--env", pde_env)->required();
    pde_cmd->add_option("--beta", pde_cfg.beta)->required();
    pde_cmd->add_option("--L", pde_cfg.half_width);
    pde_cmd->add_option("--t-max", pde_cfg.t_max);
    pde_cmd->add_option("--dx", pde_cfg.dx);
    pde_cmd->add_option("--dt", pde_cfg.dt);
    pde_cmd->add_option("--delta", pde_cfg.delta);
    pde_cmd->add_option("--front-level", pde_cfg.front_level);
    pde_cmd->add_option("--snapshots", pde_snapshots, "directory for field snapshots");
    std::size_t pde_snapshot_stride = 0;
    pde_cmd->add_option("--snapshot-stride", pde_snapshot_stride, "records between snapshots");
    pde_cmd->add_option("--out", pde_out, "front trace CSV");

    // validate --------------------------------------------------------------------
    auto* val_cmd = app.add_subcommand("validate", "cross-oracle consistency suite");
    std::string val_env, val_kernels_out;
    std::size_t val_paths = 100000;
    std::uint64_t val_seed = 1;
    double val_eta = -0.5;
    val_cmd->add_option("--env", val_env)->required();
    val_cmd->add_option("--paths", val_paths);
    val_cmd->add_option("--seed", val_seed)->envname("SKEWFRONT_SEED");
    val_cmd->add_option("--kernels-out", val_kernels_out,
                        "write the per-interface kernel table as CSV");
    val_cmd->add_option("--eta", val_eta, "exponent for the kernel table J columns");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 64;
    }

    if (show_config) {
        std::cout << app.config_to_str(true, true);
        for (const auto* sub : app.get_subcommands()) std::cout << sub->config_to_str(true, true);
        return 0;
    }

    try {
        if (*gen_cmd) {
            EnvConfig cfg;
            cfg.degree_support = parse_degrees(degrees_spec);
            cfg.length_law = parse_lengths(lengths_spec);
            cfg.horizon = horizon;
            cfg.seed = seed;
            json resolved = {{"degrees", degrees_spec},
                             {"lengths", lengths_spec},
                             {"horizon", horizon},
                             {"seed", seed}};
            auto env = generate(cfg);
            save(env, gen_out);
            json man = base_manifest("gen-env", resolved);
            man["seeds"] = {seed};
            man["env_digest"] = env.digest();
            man["wall_clock_s"] = wall_clock();
            std::ofstream(gen_out + ".manifest.json") << man.dump(2) << "\n";
            std::cout << "wrote " << gen_out << " digest " << env.digest() << "\n";
            return 0;
        }

        if (*xi_cmd) {
            auto env = load_env_arg(xi_env);
            const auto grid = expand_grid(parse_grid(xi_grid));
            std::ostringstream body;
            body << "lambda,inv_xi,iterations,certified_bound\n";
            for (double lam : grid) {
                const auto est = xi(env, lam, xi_tol);
                body << csv_num(lam) << "," << csv_num(est.inv_xi) << "," << est.iterations << ","
                     << csv_num(est.residual) << "\n";
            }
            json man = base_manifest("xi", {{"env", xi_env},
                                            {"lambda_grid", xi_grid},
                                            {"tol", xi_tol}});
            man["env_digest"] = env.digest();
            man["seeds"] = {env.seed()};
            man["wall_clock_s"] = wall_clock();
            OutputSink{xi_out}.write(body.str(), man);
            return 0;
        }

        if (*mu_cmd) {
            auto env = load_env_arg(mu_env);
            const auto grid = expand_grid(parse_grid(mu_grid));
            MuOptions opts;
            opts.window = mu_window;
            std::ostringstream body;
            body << "lambda,mu\n";
            for (double lam : grid)
                body << csv_num(lam) << "," << csv_num(mu_negative(env, lam, opts)) << "\n";
            json man = base_manifest("mu", {{"env", mu_env},
                                            {"lambda_grid", mu_grid},
                                            {"window", mu_window}});
            man["env_digest"] = env.digest();
            man["seeds"] = {env.seed()};
            man["wall_clock_s"] = wall_clock();
            OutputSink{mu_out}.write(body.str(), man);
            return 0;
        }

        if (*eta_cmd) {
            auto env = load_env_arg(eta_env);
            EtaCOptions opts;
            opts.k_max = eta_kmax;
            const auto e = env.is_degenerate_line() ? EtaC{} : eta_c_estimate(env, opts);
            json j;
            j["estimate"] = num(e.estimate);
            j["bracket"] = {num(e.lo), num(e.hi)};
            j["k_used"] = e.k_used;
            j["corollary39"] = env.is_degenerate_line() ? false : e.eta_c_positive;
            json man = base_manifest("eta-c", {{"env", eta_env}, {"k_max", eta_kmax}});
            man["env_digest"] = env.digest();
            man["seeds"] = {env.seed()};
            man["wall_clock_s"] = wall_clock();
            OutputSink{eta_out}.write(j.dump(2) + "\n", man);
            return 0;
        }

        if (*speed_cmd) {
            SpeedResult r;
            json cfg;
            std::string digest;
            std::uint64_t env_seed = 0;
            if (!speed_cf.empty()) {
                int d = 0;
                double ell = 0;
                if (std::sscanf(speed_cf.c_str(), "%d,%lf", &d, &ell) != 2)
                    throw ConfigError("--closed-form expects d,ell");
                r = speed_constant_closed_form(d, ell, speed_beta);
                cfg = {{"closed_form", speed_cf}, {"beta", speed_beta}};
            } else {
                if (speed_env.empty()) throw ConfigError("speed: need --env or --closed-form");
                auto env = load_env_arg(speed_env);
                r = speed_variational(env, speed_beta);
                cfg = {{"env", speed_env}, {"beta", speed_beta}};
                digest = env.digest();
                env_seed = env.seed();
            }
            json man = base_manifest("speed", cfg);
            if (!digest.empty()) man["env_digest"] = digest;
            man["seeds"] = {env_seed};
            man["wall_clock_s"] = wall_clock();
            OutputSink{speed_out}.write(speed_result_json(r).dump(2) + "\n", man);
            if (strict && !r.assumption_ok) return 2;
            return 0;
        }

        if (*sweep_cmd) {
            std::ostringstream body;
            json cfg;
            if (!sweep_p_grid.empty()) {
                if (sweep_cf.empty())
                    throw ConfigError("--p-grid requires --closed-form for the tree family");
                int d0 = 0;
                double ell = 0;
                if (std::sscanf(sweep_cf.c_str(), "%d,%lf", &d0, &ell) != 2)
                    throw ConfigError("--closed-form expects d,ell");
                body << "p,d,beta,c_star,sqrt_2beta\n";
                for (double p : expand_grid(parse_grid(sweep_p_grid))) {
                    const int d = std::max(2, static_cast<int>(std::lround(1.0 / (1.0 - p))));
                    const auto r = speed_constant_closed_form(d, ell, sweep_beta_fixed);
                    body << csv_num(p) << "," << d << "," << csv_num(sweep_beta_fixed) << ","
                         << csv_num(r.c_star) << "," << csv_num(std::sqrt(2 * sweep_beta_fixed))
                         << "\n";
                }
                cfg = {{"closed_form", sweep_cf},
                       {"p_grid", sweep_p_grid},
                       {"beta_fixed", sweep_beta_fixed}};
            } else {
                if (sweep_beta_grid.empty()) throw ConfigError("speed-sweep: need --beta lo:hi:n");
                const auto betas = expand_grid(parse_grid(sweep_beta_grid));
                body << "beta,c_star,lambda_star,sqrt_2beta\n";
                if (!sweep_cf.empty()) {
                    int d = 0;
                    double ell = 0;
                    if (std::sscanf(sweep_cf.c_str(), "%d,%lf", &d, &ell) != 2)
                        throw ConfigError("--closed-form expects d,ell");
                    for (double b : betas) {
                        const auto r = speed_constant_closed_form(d, ell, b);
                        body << csv_num(b) << "," << csv_num(r.c_star) << ","
                             << csv_num(r.lambda_star) << "," << csv_num(std::sqrt(2 * b)) << "\n";
                    }
                    cfg = {{"closed_form", sweep_cf}, {"beta_grid", sweep_beta_grid}};
                } else {
                    if (sweep_env.empty())
                        throw ConfigError("speed-sweep: need --env or --closed-form");
                    auto env = load_env_arg(sweep_env);
                    const auto mz = mu_zero_and_prime(env);
                    const EtaC etac =
                        env.is_degenerate_line() ? EtaC{} : eta_c_estimate(env);
                    for (double b : betas) {
                        const auto r = speed_variational(env, b, mz, etac);
                        body << csv_num(b) << "," << csv_num(r.c_star) << ","
                             << csv_num(r.lambda_star) << "," << csv_num(std::sqrt(2 * b)) << "\n";
                    }
                    cfg = {{"env", sweep_env}, {"beta_grid", sweep_beta_grid}};
                }
            }
            json man = base_manifest("speed-sweep", cfg);
            man["wall_clock_s"] = wall_clock();
            OutputSink{sweep_out}.write(body.str(), man);
            return 0;
        }

        if (*hit_cmd) {
            auto env = load_env_arg(hit_env);
            McOptions mo;
            mo.seed = hit_seed;
            mo.threads = threads;
            const auto est = hitting_time_laplace_mc(env, hit_from, hit_to, hit_lambda, hit_paths, mo);
            json j;
            j["estimate"] = num(est.estimate);
            j["std_error"] = num(est.std_error);
            j["p_hit"] = num(est.p_hit);
            j["capped_fraction"] = num(est.capped_fraction);
            j["flagged"] = est.flagged;
            std::string body;
            if (output_format == "csv") {
                body = "estimate,std_error,p_hit,capped_fraction,flagged\n" +
                       csv_num(est.estimate) + "," + csv_num(est.std_error) + "," +
                       csv_num(est.p_hit) + "," + csv_num(est.capped_fraction) + "," +
                       (est.flagged ? "1" : "0") + "\n";
            } else {
                body = j.dump(2) + "\n";
            }
            json man = base_manifest("mc-hit", {{"env", hit_env},
                                                {"from", hit_from},
                                                {"to", hit_to},
                                                {"lambda", hit_lambda},
                                                {"paths", hit_paths},
                                                {"threads", threads}});
            man["seeds"] = {hit_seed};
            man["env_digest"] = env.digest();
            man["wall_clock_s"] = wall_clock();
            OutputSink{hit_out}.write(body, man);
            return 0;
        }

        if (*drift_cmd) {
            auto env = load_env_arg(drift_env);
            drift_cfg.threads = threads;
            const auto d = lln_drift(env, drift_cfg, drift_start);
            json j;
            j["speed"] = num(d.speed);
            j["std_error"] = num(d.std_error);
            j["rho_warning"] = d.rho_warning;
            json man = base_manifest("mc-drift", {{"env", drift_env},
                                                  {"t_max", drift_cfg.t_max},
                                                  {"paths", drift_cfg.n_paths},
                                                  {"step", drift_cfg.step},
                                                  {"start", drift_start}});
            man["seeds"] = {drift_cfg.seed};
            man["env_digest"] = env.digest();
            man["wall_clock_s"] = wall_clock();
            OutputSink{drift_out}.write(j.dump(2) + "\n", man);
            if (d.rho_warning) std::cerr << "warning: E[rho] >= 1; drift may be null\n";
            return 0;
        }

        if (*ldp_cmd) {
            auto env = load_env_arg(ldp_env);
            McOptions mo;
            mo.seed = ldp_seed;
            mo.threads = threads;
            const auto rows = ldp_trend(env, ldp_c, ldp_v, ldp_lambda, parse_list(ldp_tgrid),
                                        ldp_paths, mo);
            std::ostringstream body;
            body << "t,estimate,std_error,flagged\n";
            for (const auto& r : rows)
                body << csv_num(r.t) << "," << csv_num(r.value) << "," << csv_num(r.std_error)
                     << "," << (r.flagged ? "1" : "0") << "\n";
            json man = base_manifest("mc-ldp", {{"env", ldp_env},
                                                {"c", ldp_c},
                                                {"v", ldp_v},
                                                {"lambda", ldp_lambda},
                                                {"t_grid", ldp_tgrid},
                                                {"paths", ldp_paths}});
            man["seeds"] = {ldp_seed};
            man["env_digest"] = env.digest();
            man["wall_clock_s"] = wall_clock();
            OutputSink{ldp_out}.write(body.str(), man);
            return 0;
        }

        if (*pde_cmd) {
            auto env = load_env_arg(pde_env);
            pde_cfg.snapshot_stride = pde_snapshot_stride;
            std::size_t snap_idx = 0;
            std::function<void(const PdeField&)> on_snapshot;
            if (!pde_snapshots.empty() && pde_snapshot_stride != 0) {
                std::filesystem::create_directories(pde_snapshots);
                on_snapshot = [&](const PdeField& f) {
                    char name[64];
                    std::snprintf(name, sizeof(name), "/snapshot_%05zu.csv", snap_idx++);
                    std::ofstream snap(pde_snapshots + name);
                    snap << "x,v\n";
                    for (std::size_t i = 0; i < f.x->size(); ++i)
                        snap << csv_num((*f.x)[i]) << "," << csv_num((*f.v)[i]) << "\n";
                };
            }
            const auto trace = solve(env, pde_cfg, on_snapshot);
            std::ostringstream body;
            body << "t,x_front_right,x_front_left\n";
            for (std::size_t i = 0; i < trace.times.size(); ++i)
                body << csv_num(trace.times[i]) << "," << csv_num(trace.front_right[i]) << ","
                     << csv_num(trace.front_left[i]) << "\n";
            json man = base_manifest("pde", {{"env", pde_env},
                                             {"beta", pde_cfg.beta},
                                             {"L", pde_cfg.half_width},
                                             {"t_max", pde_cfg.t_max},
                                             {"dx", pde_cfg.dx},
                                             {"dt", pde_cfg.dt}});
            man["env_digest"] = env.digest();
            man["seeds"] = {env.seed()};
            man["wall_clock_s"] = wall_clock();
            man["fitted_speed"] = num(trace.fitted_speed);
            OutputSink{pde_out}.write(body.str(), man);
            std::cerr << "fitted_speed " << trace.fitted_speed << " (left "
                      << trace.fitted_speed_left << ", residual " << trace.fit_residual << ")\n";
            return 0;
        }

        if (*val_cmd) {
            auto env = load_env_arg(val_env);
            if (!val_kernels_out.empty()) {
                write_kernel_csv(env, val_eta, val_kernels_out);
                json man = base_manifest("validate", {{"env", val_env}, {"eta", val_eta}});
                man["env_digest"] = env.digest();
                man["seeds"] = {val_seed};
                man["wall_clock_s"] = wall_clock();
                std::ofstream(val_kernels_out + ".manifest.json") << man.dump(2) << "\n";
            }
            return run_validate(env, val_paths, threads, val_seed);
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
