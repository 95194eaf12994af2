// Command-line front end: solve the reinsurance policy, sweep parameters,
// compare value functions, and validate the analytics against Monte Carlo.
//
// Exit codes: 0 success, 2 configuration error, 3 verification failure,
// 4 Monte Carlo validation failure.

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "reins/io.hpp"
#include "reins/reins.hpp"
#include "reins/validation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitVerify = 3;
constexpr int kExitMc = 4;

struct ConfigFlags {
    std::string path;
    std::optional<double> lambda, eta, theta, rho, K, mu, sigma2, zeta, alpha;
    std::optional<std::string> claim, retention;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", path, "JSON configuration file");
        cmd->add_option("--lambda", lambda, "claim arrival rate");
        cmd->add_option("--eta", eta, "insurer safety loading");
        cmd->add_option("--theta", theta, "reinsurer safety loading");
        cmd->add_option("--rho", rho, "discount rate");
        cmd->add_option("--K", K, "fixed activation cost");
        cmd->add_option("--mu", mu, "claim mean (exponential / moments_only)");
        cmd->add_option("--sigma2", sigma2, "claim second moment (moments_only)");
        cmd->add_option("--zeta", zeta, "pareto scale");
        cmd->add_option("--alpha", alpha, "pareto shape");
        cmd->add_option("--claim", claim, "claim law: exponential|pareto|moments_only");
        cmd->add_option("--retention", retention, "retention: proportional|excess_of_loss");
    }

    reins::io::RawConfig build() const {
        reins::io::RawConfig cfg;
        if (!path.empty()) cfg = reins::io::load_config(path);
        if (claim) cfg.law_type = *claim;
        if (retention) cfg.retention_type = *retention;
        if (lambda) cfg.lambda = *lambda;
        if (eta) cfg.eta = *eta;
        if (theta) cfg.theta = *theta;
        if (rho) cfg.rho = *rho;
        if (K) cfg.K = *K;
        if (mu) cfg.mu = *mu;
        if (sigma2) cfg.sigma2 = *sigma2;
        if (zeta) cfg.zeta = *zeta;
        if (alpha) cfg.alpha = *alpha;
        return cfg;
    }
};

struct SimFlags {
    reins::mc::SimConfig cfg;
    double xstar_shift = 0.0;
    std::string trace_path;
    std::int64_t trace_paths = 10;

    void attach(CLI::App* cmd) {
        cmd->add_option("--paths", cfg.paths, "simulated paths");
        cmd->add_option("--dt", cfg.dt, "Euler time step");
        cmd->add_option("--horizon", cfg.horizon, "truncation horizon (0: ceil(ln 1e4 / rho))");
        cmd->add_option("--threads", cfg.threads, "worker threads (0: hardware)");
        cmd->add_flag("--antithetic,!--no-antithetic", cfg.antithetic, "antithetic pairing");
        cmd->add_option("--xstar-shift", xstar_shift,
                        "diagnostic shift of the simulated trigger level");
        cmd->add_option("--trace", trace_path, "dump per-path CSV trace (<=100 paths)");
        cmd->add_option("--trace-paths", trace_paths, "paths to trace");
    }
};

void print_verification(const reins::VariationalReport& rep, bool quiet) {
    if (quiet) return;
    if (rep.degenerate) {
        std::printf("verification: degenerate case (never reinsure), nothing to check\n");
        return;
    }
    auto line = [](const char* name, const reins::ClauseReport& c) {
        std::printf("  %-28s %s  (worst margin %.3g at x=%.6g)\n", name,
                    c.pass ? "PASS" : "FAIL", c.worst, c.location);
    };
    std::printf("verification of the variational inequality:\n");
    line("value dominance F <= f", rep.value_dominance);
    line("interior equation", rep.interior_pde);
    line("exterior operator sign", rep.exterior_operator);
}

int cmd_solve(const ConfigFlags& flags, const std::string& out, bool quiet) {
    const reins::io::RawConfig raw = flags.build();
    const reins::RootProfile profile = raw.build_profile();
    const reins::PolicySolution sol = reins::solve_policy(profile);
    const reins::VariationalReport rep = reins::verify_variational(sol);

    if (!quiet) {
        std::printf("case: %s\n", reins::to_string(sol.policy_case));
        std::printf("b_star          = %.6g\n", sol.b_star);
        if (sol.x_star)
            std::printf("x_star          = %.6g\n", *sol.x_star);
        else
            std::printf("x_star          = (none: never reinsure)\n");
        std::printf("gamma_minus(b*) = %.6g\n", sol.gamma_b);
        std::printf("gamma_minus(1)  = %.6g\n", sol.gamma_1);
        std::printf("gamma_plus(1)   = %.6g\n", sol.gamma_p);
        if (sol.x_star)
            std::printf("C1 = %.6g  C2 = %.6g  B = %.6g  H = %.6g\n", sol.C1, sol.C2, sol.B,
                        sol.H);
        std::printf("U(0) = %.6g\n", sol.U(0.0));
    }
    print_verification(rep, quiet);

    if (!out.empty()) {
        std::ofstream os(out, std::ios::binary);
        if (!os) {
            std::fprintf(stderr, "error: cannot write %s\n", out.c_str());
            return kExitConfig;
        }
        os << reins::io::solution_to_json(sol).dump(2) << "\n";
    } else if (quiet) {
        std::printf("%s\n", reins::io::solution_to_json(sol).dump().c_str());
    }
    return rep.pass || rep.degenerate ? kExitOk : kExitVerify;
}

/// Default sweep ranges around the configured value; chosen to respect the
/// model invariants (theta > eta, second moment >= mean^2).
std::pair<double, double> default_range(const reins::io::RawConfig& cfg,
                                        reins::io::SweepParameter p) {
    using P = reins::io::SweepParameter;
    switch (p) {
        case P::rho: return {0.5 * cfg.rho, 1.5 * cfg.rho};
        case P::mu:
            if (cfg.law_type == "moments_only") {
                const double cap = 0.999 * std::sqrt(cfg.sigma2);
                return {0.7 * cfg.mu, std::min(1.3 * cfg.mu, cap)};
            }
            return {0.5 * cfg.mu, 1.5 * cfg.mu};
        case P::sigma2: {
            const double lo = std::max(0.6 * cfg.sigma2, 1.001 * cfg.mu * cfg.mu);
            return {lo, 1.4 * cfg.sigma2};
        }
        case P::K: return {0.5 * cfg.K, 1.5 * cfg.K};
        case P::zeta: return {0.5 * cfg.zeta, 1.5 * cfg.zeta};
        case P::theta: {
            const double lo = std::max(0.5 * cfg.theta, cfg.eta * 1.000001);
            return {lo, 1.5 * cfg.theta};
        }
        case P::eta: {
            const double hi = std::min(1.5 * cfg.eta, cfg.theta * 0.999999);
            return {0.5 * cfg.eta, hi};
        }
        case P::lambda: return {0.5 * cfg.lambda, 1.5 * cfg.lambda};
    }
    return {0.0, 1.0};
}

int cmd_sweep(const ConfigFlags& flags, const std::string& param_name, double lo, double hi,
              int n, const std::vector<double>& values, const std::vector<double>& at,
              const std::string& out, bool quiet) {
    const reins::io::RawConfig raw = flags.build();
    const auto param = reins::io::sweep_parameter_from(param_name);
    if (!param) {
        std::fprintf(stderr, "error: unknown sweep parameter '%s'\n", param_name.c_str());
        return kExitConfig;
    }
    reins::io::SweepSpec spec;
    spec.parameter = *param;
    spec.value_at = at;
    if (!values.empty()) {
        spec.grid = values;
    } else {
        auto range = default_range(raw, *param);
        if (lo < hi) range = {lo, hi};
        spec.grid = reins::io::linspace(range.first, range.second, n);
    }

    const auto rows = reins::io::run_sweep(raw, spec);
    std::size_t ok = 0;
    for (const auto& row : rows) {
        if (row.ok)
            ++ok;
        else
            std::fprintf(stderr, "warning: sweep row %s=%.6g failed: %s\n",
                         reins::io::to_string(*param), row.value, row.error.c_str());
    }
    reins::io::write_sweep_csv(out, raw, spec, rows);
    if (!quiet)
        std::printf("sweep %s: %zu/%zu rows solved -> %s\n", reins::io::to_string(*param), ok,
                    rows.size(), out.c_str());
    return 10 * ok >= 9 * rows.size() ? kExitOk : kExitConfig;
}

int cmd_compare(const std::string& config_a, const std::string& config_b, double x_lo,
                double x_hi, int x_n, const std::string& out, bool quiet) {
    const reins::io::RawConfig a = reins::io::load_config(config_a);
    const reins::io::RawConfig b = reins::io::load_config(config_b);
    const auto grid = reins::io::linspace(x_lo, x_hi, x_n);
    const auto res = reins::io::run_compare(a, b, grid);
    reins::io::write_compare_csv(out, a, b, res);
    if (!quiet) {
        double dmin = res.rows.front().diff, dmax = res.rows.front().diff;
        for (const auto& row : res.rows) {
            dmin = std::min(dmin, row.diff);
            dmax = std::max(dmax, row.diff);
        }
        const char* sign = res.constant_sign
                               ? (res.sign > 0 ? "constant sign: diff >= 0"
                                               : (res.sign < 0 ? "constant sign: diff <= 0"
                                                               : "identically zero"))
                               : "changes sign on the grid";
        std::printf("compare %s vs %s: diff = %s - %s in [%.6g, %.6g]; %s -> %s\n",
                    res.label_a.c_str(), res.label_b.c_str(), res.label_a.c_str(),
                    res.label_b.c_str(), dmin, dmax, sign, out.c_str());
    }
    return kExitOk;
}

int cmd_simulate(const ConfigFlags& flags, SimFlags& sim, bool quiet) {
    const reins::io::RawConfig raw = flags.build();
    const reins::RootProfile profile = raw.build_profile();
    const reins::PolicySolution sol = reins::solve_policy(profile);

    reins::mc::OracleSuiteOptions opt;
    opt.x_star_shift = sim.xstar_shift;
    const auto suite = reins::mc::run_oracle_suite(profile, sol, sim.cfg, opt);

    if (!quiet) {
        std::printf("%-22s %12s %12s %10s %10s  %s\n", "check", "analytic", "estimate", "SE",
                    "tail", "result");
        for (const auto& c : suite.g_checks)
            std::printf("%-22s %12.6g %12.6g %10.3g %10.3g  %s\n", c.label.c_str(), c.analytic,
                        c.estimate, c.se, c.tail, c.pass ? "PASS" : "FAIL");
        for (const auto& c : suite.u_checks)
            std::printf("%-22s %12.6g %12.6g %10.3g %10.3g  %s\n", c.label.c_str(), c.analytic,
                        c.estimate, c.se, c.tail, c.pass ? "PASS" : "FAIL");
        for (std::size_t i = 0; i < suite.probes.size(); ++i) {
            const auto& p = suite.probes[i];
            std::printf("probe db=%+.3g dx=%+.3g   mean diff %+.6g  SE %.3g  %s\n",
                        p.requested.db, p.requested.dx, p.mean_diff, p.se_diff,
                        suite.probe_pass[i] ? "PASS" : "FAIL");
        }
        if (suite.has_policy && sim.xstar_shift != 0.0)
            std::printf("note: simulated trigger overridden to x=%.6g\n", suite.x_used);
    }

    if (!sim.trace_path.empty()) {
        std::ofstream os(sim.trace_path, std::ios::binary);
        if (!os) {
            std::fprintf(stderr, "error: cannot write %s\n", sim.trace_path.c_str());
            return kExitConfig;
        }
        os << "path,t,X,I,regime\n";
        std::optional<double> xs;
        if (sol.x_star) xs = std::max(0.0, *sol.x_star + sim.xstar_shift);
        reins::mc::trace_policy_paths(profile, 0.0, sol.b_star, xs, sim.cfg, sim.trace_paths,
                                      [&](const reins::mc::TraceRow& r) {
                                          os << r.path << ',' << reins::io::format_double(r.t)
                                             << ',' << reins::io::format_double(r.x) << ','
                                             << reins::io::format_double(r.injection) << ','
                                             << r.regime << '\n';
                                      });
    }
    return suite.pass ? kExitOk : kExitMc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal irreversible reinsurance with capital injections"};
    app.require_subcommand(1);
    bool quiet = false;
    std::string out;
    std::uint64_t seed = 42;
    app.add_flag("--quiet", quiet, "suppress human-readable output");
    app.add_option("--out", out, "output file");
    app.add_option("--seed", seed, "Monte Carlo seed");

    ConfigFlags solve_cfg, sweep_cfg, sim_cfg_flags;
    SimFlags sim;

    auto* solve = app.add_subcommand("solve", "solve for (b*, x*) and the value function");
    solve_cfg.attach(solve);

    auto* sweep = app.add_subcommand("sweep", "tabulate the solution along a parameter grid");
    sweep_cfg.attach(sweep);
    std::string sweep_param;
    double sweep_lo = 0.0, sweep_hi = -1.0;
    int sweep_n = 21;
    std::vector<double> sweep_values, sweep_at;
    sweep->add_option("--param", sweep_param, "rho|mu|sigma2|K|zeta|theta|eta|lambda")
        ->required();
    sweep->add_option("--lo", sweep_lo, "grid lower end");
    sweep->add_option("--hi", sweep_hi, "grid upper end");
    sweep->add_option("--n", sweep_n, "grid points (default 21)");
    sweep->add_option("--values", sweep_values, "explicit grid values");
    sweep->add_option("--at", sweep_at, "tabulate U at these surplus levels");

    auto* compare = app.add_subcommand("compare", "compare value functions of two configurations");
    std::string cmp_a, cmp_b;
    double x_lo = 0.0, x_hi = 40.0;
    int x_n = 200;
    compare->add_option("--config-a", cmp_a, "first configuration")->required();
    compare->add_option("--config-b", cmp_b, "second configuration")->required();
    compare->add_option("--x-lo", x_lo, "surplus grid lower end");
    compare->add_option("--x-hi", x_hi, "surplus grid upper end");
    compare->add_option("--x-n", x_n, "surplus grid points");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo validation of the analytics");
    sim_cfg_flags.attach(simulate);
    sim.attach(simulate);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(solve_cfg, out, quiet);
        if (sweep->parsed()) {
            if (out.empty()) {
                std::fprintf(stderr, "error: sweep requires --out\n");
                return kExitConfig;
            }
            return cmd_sweep(sweep_cfg, sweep_param, sweep_lo, sweep_hi, sweep_n, sweep_values,
                             sweep_at, out, quiet);
        }
        if (compare->parsed()) {
            if (out.empty()) {
                std::fprintf(stderr, "error: compare requires --out\n");
                return kExitConfig;
            }
            return cmd_compare(cmp_a, cmp_b, x_lo, x_hi, x_n, out, quiet);
        }
        if (simulate->parsed()) {
            sim.cfg.seed = seed;
            return cmd_simulate(sim_cfg_flags, sim, quiet);
        }
    } catch (const reins::io::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitOk;
}
