#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "reins/roots.hpp"
#include "reins/scalar_solvers.hpp"

namespace reins {

enum class LevelMethod { phi_root, psi_root, direct_scan };

/// Optimal retention level: argmin of gamma^- over [0,1].
struct LevelSolution {
    double b_star = 1.0;
    double gamma_star = 0.0;  ///< gamma^-(b_star)
    LevelMethod method = LevelMethod::direct_scan;
    bool interior = false;  ///< b_star < 1
};

struct LevelOptions {
    double tol = 1e-12;  ///< interval width for the scalar solves
    int max_iter = 200;
    int grid_points = 2048;  ///< candidate scan for psi roots / direct minimization
};

/// First-order function of the proportional family:
///   phi(b) = sigma^2 b gamma^-(b) + mu theta,
/// strictly decreasing with phi(0) = mu theta > 0; its root is the interior optimum.
inline double phi_proportional(const RootProfile& profile, double b) {
    const double s2 = profile.law().second_moment();
    return s2 * b * profile.gamma_minus(b) + profile.law().mean() * profile.params().theta;
}

/// First-order function of the excess-of-loss family:
///   psi(b) = (b/(1-b)) gamma^-(b) + theta,
/// with psi(0) = theta > 0 and psi -> -inf as b -> 1. Beyond b = 1 - 1e-12
/// the divergence is represented by a large negative sentinel.
inline double psi_excess_of_loss(const RootProfile& profile, double b) {
    if (b > 1.0 - 1e-12) return -1e300;
    return b / (1.0 - b) * profile.gamma_minus(b) + profile.params().theta;
}

/// Threshold on theta below which the proportional optimum is interior:
///   b* < 1  iff  eta < theta < eta + sqrt(eta^2 + 2 rho sigma^2 / (lambda mu^2)).
inline double proportional_interior_threshold(const ModelParams& p, const ClaimLaw& law) {
    const double mu = law.mean(), s2 = law.second_moment();
    return p.eta + std::sqrt(p.eta * p.eta + 2.0 * p.rho * s2 / (p.lambda * mu * mu));
}

namespace detail {

inline LevelSolution solve_level_proportional(const RootProfile& profile, const LevelOptions& opt) {
    LevelSolution sol;
    sol.method = LevelMethod::phi_root;
    if (!(profile.params().theta <
          proportional_interior_threshold(profile.params(), profile.law()))) {
        sol.b_star = 1.0;
        sol.gamma_star = profile.gamma_minus_1();
        sol.interior = false;
        return sol;
    }
    // phi(0) = mu theta > 0, phi(1) < 0 under the interiority condition,
    // and phi is strictly decreasing: bisection is safe.
    auto phi = [&](double b) { return phi_proportional(profile, b); };
    sol.b_star = bisect(phi, 0.0, 1.0, opt.tol, opt.max_iter);
    sol.gamma_star = profile.gamma_minus(sol.b_star);
    sol.interior = true;
    return sol;
}

/// The root of psi exists but need not be unique: collect every grid sign
/// change, refine each, and keep the candidate minimizing gamma^-
/// (ties break toward the smallest b).
inline LevelSolution solve_level_excess_of_loss(const RootProfile& profile,
                                                const LevelOptions& opt) {
    const double hi = 1.0 - 1e-9;
    const int n = std::max(opt.grid_points, 16);
    auto psi = [&](double b) { return psi_excess_of_loss(profile, b); };

    std::vector<double> roots;
    double prev_b = 0.0, prev_v = psi(0.0);
    for (int i = 1; i <= n; ++i) {
        const double b = hi * static_cast<double>(i) / n;
        const double v = psi(b);
        if ((prev_v < 0.0) != (v < 0.0) || v == 0.0)
            roots.push_back(bisect(psi, prev_b, b, prev_v, v, opt.tol, opt.max_iter));
        prev_b = b;
        prev_v = v;
    }
    if (roots.empty())
        throw BracketFailure("solve_level: psi has no sign change (inconsistent moments?)");

    LevelSolution sol;
    sol.method = LevelMethod::psi_root;
    sol.b_star = roots.front();
    sol.gamma_star = profile.gamma_minus(roots.front());
    for (double r : roots) {
        const double g = profile.gamma_minus(r);
        if (g < sol.gamma_star) {
            sol.gamma_star = g;
            sol.b_star = r;
        }
    }
    sol.interior = sol.b_star < 1.0 - 1e-9;
    return sol;
}

inline LevelSolution solve_level_custom(const RootProfile& profile, const LevelOptions& opt) {
    const int n = std::max(opt.grid_points, 16);
    auto g = [&](double b) { return profile.gamma_minus(b); };
    int best = 0;
    double best_v = g(0.0);
    for (int i = 1; i <= n; ++i) {
        const double v = g(static_cast<double>(i) / n);
        if (v < best_v) {
            best_v = v;
            best = i;
        }
    }
    const double lo = std::max(0.0, static_cast<double>(best - 1) / n);
    const double hi = std::min(1.0, static_cast<double>(best + 1) / n);
    LevelSolution sol;
    sol.method = LevelMethod::direct_scan;
    sol.b_star = golden_min(g, lo, hi, opt.tol);
    sol.gamma_star = g(sol.b_star);
    sol.interior = sol.b_star < 1.0 - 1e-9 &&
                   sol.gamma_star < profile.gamma_minus_1() - 1e-12 * std::abs(profile.gamma_minus_1());
    return sol;
}

}  // namespace detail

/// Optimal retention level for the profile's family. Proportional resolves
/// through the interiority condition and the phi root; excess-of-loss through
/// the psi roots; custom families through a guarded direct minimization.
/// A non-interior outcome (b*=1, never reinsure) is a flagged result, not an error.
inline LevelSolution solve_level(const RootProfile& profile, const LevelOptions& opt = {}) {
    switch (profile.retention().kind()) {
        case RetentionModel::Kind::proportional:
            return detail::solve_level_proportional(profile, opt);
        case RetentionModel::Kind::excess_of_loss:
            return detail::solve_level_excess_of_loss(profile, opt);
        case RetentionModel::Kind::custom:
            return detail::solve_level_custom(profile, opt);
    }
    throw std::logic_error("solve_level: bad retention kind");
}

}  // namespace reins
