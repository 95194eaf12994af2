#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "reins/policy.hpp"
#include "reins/simulate.hpp"

namespace reins::mc {

inline std::string io_label(double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf, buf + (n > 0 ? n : 0));
}

/// One analytic-vs-MC agreement check, passing when
/// |estimate - analytic| <= 3*SE + truncation tail bound.
struct OracleCheck {
    std::string label;
    double analytic = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    double tail = 0.0;
    bool pass = false;

    double error() const { return estimate - analytic; }
    double budget() const { return 3.0 * se + tail; }
};

struct OracleSuiteOptions {
    std::vector<double> g_levels_b = {0.25, 0.5, 1.0};
    std::vector<double> g_levels_y = {0.0, 5.0, 20.0};
    std::vector<double> u_points;  ///< empty: {0, 5, x*+1}
    std::vector<Perturbation> perturbations = {{-0.05, 0.0}, {0.05, 0.0}, {0.0, -5.0}, {0.0, 5.0}};
    double probe_x0 = 0.0;
    /// Diagnostic shift applied to the simulated trigger; a nonzero value
    /// simulates a deliberately suboptimal policy that the suite should flag.
    double x_star_shift = 0.0;
};

struct OracleSuiteResult {
    std::vector<OracleCheck> g_checks;
    std::vector<OracleCheck> u_checks;
    std::vector<ProbeResult> probes;
    std::vector<bool> probe_pass;
    bool pass = true;
    bool has_policy = false;
    double x_used = 0.0;
};

/// Runs the full MC validation battery against the analytic solution:
/// injection values per (b, y), policy cost per starting surplus, and
/// common-random-numbers optimality probes.
inline OracleSuiteResult run_oracle_suite(const RootProfile& profile, const PolicySolution& sol,
                                          const SimConfig& cfg,
                                          const OracleSuiteOptions& opt = {}) {
    OracleSuiteResult out;

    for (double b : opt.g_levels_b) {
        const auto ests = simulate_injection_values(profile, b, opt.g_levels_y, cfg);
        const double gamma = profile.gamma_minus(b);
        for (std::size_t i = 0; i < opt.g_levels_y.size(); ++i) {
            OracleCheck c;
            c.label = "G[b=" + io_label(b) + "](y=" + io_label(opt.g_levels_y[i]) + ")";
            c.analytic = injection_value(gamma, opt.g_levels_y[i]);
            c.estimate = ests[i].mean;
            c.se = ests[i].std_error;
            c.tail = ests[i].discount_tail_bound;
            c.pass = std::abs(c.error()) <= c.budget();
            out.pass = out.pass && c.pass;
            out.g_checks.push_back(std::move(c));
        }
    }

    std::optional<double> x_used;
    if (sol.x_star) {
        x_used = std::max(0.0, *sol.x_star + opt.x_star_shift);
        out.has_policy = true;
        out.x_used = *x_used;
    }
    std::vector<double> u_points = opt.u_points;
    if (u_points.empty()) {
        u_points = {0.0, 5.0};
        u_points.push_back(sol.x_star ? *sol.x_star + 1.0 : 20.0);
    }
    for (double x0 : u_points) {
        const SimEstimate est = simulate_policy(profile, x0, sol.b_star, x_used, cfg);
        OracleCheck c;
        c.label = "U(x0=" + io_label(x0) + ")";
        c.analytic = sol.U(x0);
        c.estimate = est.mean;
        c.se = est.std_error;
        c.tail = est.discount_tail_bound;
        c.pass = std::abs(c.error()) <= c.budget();
        out.pass = out.pass && c.pass;
        out.u_checks.push_back(std::move(c));
    }

    if (x_used && !opt.perturbations.empty()) {
        out.probes = optimality_probe(profile, opt.probe_x0, sol.b_star, *x_used, cfg,
                                      opt.perturbations);
        for (const auto& p : out.probes) {
            const bool ok = p.mean_diff >= -3.0 * p.se_diff;
            out.probe_pass.push_back(ok);
            out.pass = out.pass && ok;
        }
    }
    return out;
}

}  // namespace reins::mc
