#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "reins/level.hpp"
#include "reins/roots.hpp"
#include "reins/scalar_solvers.hpp"

namespace reins {

struct CoefficientOutOfRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double cexp(double a) { return std::exp(std::clamp(a, -700.0, 700.0)); }

}  // namespace detail

/// Expected discounted capital injections of the reflected surplus run at a
/// fixed level whose negative characteristic root is gamma:
///   y >= 0: -e^{gamma y}/gamma,   y < 0: -y - 1/gamma
/// (an initial deficit is injected immediately). Convex, decreasing, -> 0.
inline double injection_value(double gamma, double y) {
    if (y >= 0.0) return -detail::cexp(gamma * y) / gamma;
    return -y - 1.0 / gamma;
}

/// Cost of activating the contract now at surplus x:
///   f(x) = G_{b*}(x - K) - G_1(x),
/// in closed two-piece form. Strictly decreasing on [0, x_hat], strictly
/// increasing beyond, with a unique negative minimum at x_hat.
class Obstacle {
  public:
    Obstacle(double gamma_b, double gamma_1, double K)
        : gb_(gamma_b), g1_(gamma_1), K_(K) {}

    double operator()(double x) const {
        if (x <= K_) return -(x - K_) - 1.0 / gb_ + detail::cexp(g1_ * x) / g1_;
        return -detail::cexp(gb_ * (x - K_)) / gb_ + detail::cexp(g1_ * x) / g1_;
    }

    double deriv(double x) const {
        if (x < K_) return -1.0 + detail::cexp(g1_ * x);
        return -detail::cexp(gb_ * (x - K_)) + detail::cexp(g1_ * x);
    }

    /// Location of the global minimum, gamma_b K / (gamma_b - gamma_1), in (K, inf).
    double x_hat() const { return gb_ * K_ / (gb_ - g1_); }

    double min_value() const {
        const double e = g1_ * gb_ * K_ / (gb_ - g1_);
        return (gb_ - g1_) / (g1_ * gb_) * detail::cexp(e);
    }

    double at_zero() const { return K_ + (gb_ - g1_) / (g1_ * gb_); }

    /// Case (i): f(0) >= 0, which holds iff -K gamma_1 gamma_b <= gamma_b - gamma_1.
    bool case_i() const { return -K_ * g1_ * gb_ <= gb_ - g1_; }

    double gamma_b() const { return gb_; }
    double gamma_1() const { return g1_; }
    double cost() const { return K_; }

  private:
    double gb_, g1_, K_;
};

namespace detail {

/// Left side of the free-boundary equation; strictly increasing in x.
inline double boundary_lhs(double gb, double g1, double gp, double x) {
    return gp * (gb - g1) * cexp((gb - gp) * x) - g1 * (gb - gp) * cexp((gb - g1) * x);
}

/// Right side, constant in x.
inline double boundary_rhs(double gb, double g1, double gp, double K) {
    return gb * (gp - g1) * cexp(gb * K);
}

}  // namespace detail

/// Unique solution of the free-boundary equation on the proven bracket
/// [K, x_hat]. Requires an interior level (gamma_b < gamma_1).
inline double solve_boundary(double gamma_b, double gamma_1, double gamma_plus, double K,
                             double width_tol = 0.0) {
    if (!(K >= 0.0)) throw std::invalid_argument("solve_boundary: K must be >= 0");
    if (!(gamma_b < gamma_1))
        throw std::invalid_argument("solve_boundary: level is not interior (gamma_b >= gamma_1)");
    if (K == 0.0) return 0.0;
    const double xhat = gamma_b * K / (gamma_b - gamma_1);
    const double rhs = detail::boundary_rhs(gamma_b, gamma_1, gamma_plus, K);
    auto g = [&](double x) { return detail::boundary_lhs(gamma_b, gamma_1, gamma_plus, x) - rhs; };
    const double tol = width_tol > 0.0 ? width_tol : 1e-12 * std::max(1.0, K);
    double flo = g(K), fhi = g(xhat);
    // Theta(K) <= D(K) <= Theta(x_hat); tolerate harmless sign noise at the ends.
    if (flo > 0.0 || fhi < 0.0) {
        const double slack = 1e-9 * std::abs(rhs);
        if (flo > slack || fhi < -slack)
            throw BracketFailure("solve_boundary: bracket [K, x_hat] lost (bad roots upstream?)");
        if (flo > 0.0) return K;
        return xhat;
    }
    return detail::bisect(g, K, xhat, flo, fhi, tol);
}

enum class PolicyCase { case_i, case_ii, never_reinsure };

inline const char* to_string(PolicyCase c) {
    switch (c) {
        case PolicyCase::case_i: return "i";
        case PolicyCase::case_ii: return "ii";
        case PolicyCase::never_reinsure: return "never_reinsure";
    }
    return "?";
}

/// Full solution of the reinsurance problem: the optimal level b*, the
/// activation boundary x*, the stopped-value coefficients, and the value
/// functions as evaluators. Immutable; evaluation is pure.
class PolicySolution {
  public:
    double b_star = 1.0;
    std::optional<double> x_star;  ///< absent when reinsurance is never optimal
    double gamma_b = 0.0;          ///< gamma^-(b*)
    double gamma_1 = 0.0;          ///< gamma^-(1)
    double gamma_p = 0.0;          ///< gamma^+(1)
    double C1 = 0.0, C2 = 0.0;     ///< h(x) = C1 e^{gamma_1 x} + C2 e^{gamma_p x}
    double B = 0.0, H = 0.0;
    PolicyCase policy_case = PolicyCase::never_reinsure;
    ModelParams params;
    double mu = 0.0, sigma2 = 0.0;  ///< claim mean and second moment

    bool never_reinsure() const { return policy_case == PolicyCase::never_reinsure; }

    double G1(double x) const { return injection_value(gamma_1, x); }
    double G_bstar(double x) const { return injection_value(gamma_b, x); }

    Obstacle obstacle() const { return Obstacle(gamma_b, gamma_1, params.K); }
    double f(double x) const { return obstacle()(x); }

    /// Stopping value F = w: the exponential pair below x*, the obstacle above.
    double F(double x) const {
        if (never_reinsure()) return 0.0;
        if (x >= *x_star) return f(x);
        return C1 * detail::cexp(gamma_1 * x) + C2 * detail::cexp(gamma_p * x);
    }

    double F_deriv(double x) const {
        if (never_reinsure()) return 0.0;
        if (x >= *x_star) return obstacle().deriv(x);
        return C1 * gamma_1 * detail::cexp(gamma_1 * x) + C2 * gamma_p * detail::cexp(gamma_p * x);
    }

    /// Total value: expected discounted injections under the optimal policy.
    double U(double x) const { return G1(x) + F(x); }

    double x_hat() const { return obstacle().x_hat(); }
};

/// Builds the solution for an interior level with a solved boundary.
inline PolicySolution assemble_policy(const RootProfile& profile, const LevelSolution& level,
                                      double x_star) {
    const double gb = level.gamma_star;
    const double g1 = profile.gamma_minus_1();
    const double gp = profile.gamma_plus_1();
    PolicySolution sol;
    sol.b_star = level.b_star;
    sol.x_star = x_star;
    sol.gamma_b = gb;
    sol.gamma_1 = g1;
    sol.gamma_p = gp;
    sol.params = profile.params();
    sol.mu = profile.law().mean();
    sol.sigma2 = profile.law().second_moment();

    sol.H = gp * (gb - g1) * detail::cexp(g1 * x_star) - g1 * (gb - gp) * detail::cexp(gp * x_star);
    sol.B = gp * (gb - g1) * detail::cexp(g1 * x_star) / sol.H;
    sol.C1 = sol.B / g1;
    sol.C2 = -sol.B / gp;
    sol.policy_case = Obstacle(gb, g1, profile.params().K).case_i() ? PolicyCase::case_i
                                                                    : PolicyCase::case_ii;
    if (!(sol.H < 0.0) || !(sol.B > 0.0 && sol.B < 1.0))
        throw CoefficientOutOfRange("assemble_policy: B not in (0,1) or H >= 0");
    return sol;
}

/// Degenerate solution when starting the contract is never optimal: F == 0, U == G1.
inline PolicySolution never_reinsure_policy(const RootProfile& profile) {
    PolicySolution sol;
    sol.b_star = 1.0;
    sol.x_star.reset();
    sol.gamma_b = profile.gamma_minus_1();
    sol.gamma_1 = profile.gamma_minus_1();
    sol.gamma_p = profile.gamma_plus_1();
    sol.policy_case = PolicyCase::never_reinsure;
    sol.params = profile.params();
    sol.mu = profile.law().mean();
    sol.sigma2 = profile.law().second_moment();
    return sol;
}

struct PolicyOptions {
    LevelOptions level;
    double boundary_tol = 0.0;  ///< 0 -> 1e-12 * max(1, K)
};

/// End-to-end solve: optimal level, then the activation boundary and value
/// functions. A level at (or numerically indistinguishable from) b=1
/// short-circuits to the never-reinsure policy.
inline PolicySolution solve_policy(const RootProfile& profile, const PolicyOptions& opt = {}) {
    const LevelSolution level = solve_level(profile, opt.level);
    const double g1 = profile.gamma_minus_1();
    if (!level.interior || !(level.gamma_star < g1 - 1e-12 * std::abs(g1)))
        return never_reinsure_policy(profile);
    const double xs =
        solve_boundary(level.gamma_star, g1, profile.gamma_plus_1(), profile.params().K,
                       opt.boundary_tol);
    return assemble_policy(profile, level, xs);
}

/// One clause of the variational-inequality check.
struct ClauseReport {
    bool pass = true;
    double worst = 0.0;     ///< most violating margin observed (negative = violation)
    double location = 0.0;  ///< x attaining it
};

struct VariationalReport {
    ClauseReport value_dominance;   ///< w <= f on [0, x*]
    ClauseReport interior_pde;      ///< (L - rho) w = 0 below x*
    ClauseReport exterior_operator; ///< (L - rho) f >= 0 above x*
    bool degenerate = false;        ///< never-reinsure: nothing to check
    bool pass = true;
};

struct VerifyOptions {
    int grid_points = 10000;
    double span_factor = 4.0;  ///< grid covers [0, span_factor * x_hat]
    double dominance_tol = 1e-8;
    double pde_tol = 1e-10;
    double operator_tol = 1e-10;
};

/// Grid check of the variational inequality satisfied by F:
/// (a) F <= f on the continuation region, (b) the exponential pair solves
/// (L - rho) h = 0 there (root residuals), (c) (L - rho) f >= 0 beyond x*
/// via the closed form -e^{gamma_b (x-K)} Phi(1, gamma_b) / gamma_b.
inline VariationalReport verify_variational(const PolicySolution& sol,
                                            const VerifyOptions& opt = {}) {
    VariationalReport rep;
    if (sol.never_reinsure()) {
        rep.degenerate = true;
        return rep;
    }
    const double xs = *sol.x_star;
    const double hi = std::max(opt.span_factor * sol.x_hat(), xs * 1.5 + 1.0);
    const int n = std::max(opt.grid_points, 2);
    const auto phi1 = [&](double g) {
        return 0.5 * sol.params.lambda * sol.sigma2 * g * g +
               sol.params.lambda * sol.params.eta * sol.mu * g - sol.params.rho;
    };

    rep.value_dominance.worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        const double x = xs * i / n;
        const double margin = sol.f(x) + opt.dominance_tol - sol.F(x);
        if (margin < rep.value_dominance.worst) {
            rep.value_dominance.worst = margin;
            rep.value_dominance.location = x;
        }
    }
    rep.value_dominance.pass = rep.value_dominance.worst >= 0.0;

    // (L - rho) w expands to C1 Phi(1,gamma_1) e^{gamma_1 x} + C2 Phi(1,gamma_p) e^{gamma_p x}:
    // pure root residuals, checked against the stated ansatz tolerance.
    rep.interior_pde.worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double x = xs * i / n;
        const double resid = std::abs(sol.C1 * phi1(sol.gamma_1) * detail::cexp(sol.gamma_1 * x)) +
                             std::abs(sol.C2 * phi1(sol.gamma_p) * detail::cexp(sol.gamma_p * x));
        const double margin = opt.pde_tol - resid;
        if (margin < rep.interior_pde.worst) {
            rep.interior_pde.worst = margin;
            rep.interior_pde.location = x;
        }
    }
    rep.interior_pde.pass = rep.interior_pde.worst >= 0.0;

    rep.exterior_operator.worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        const double x = xs + (hi - xs) * i / n;
        const double lf =
            -detail::cexp(sol.gamma_b * (x - sol.params.K)) * phi1(sol.gamma_b) / sol.gamma_b;
        const double margin = lf + opt.operator_tol;
        if (margin < rep.exterior_operator.worst) {
            rep.exterior_operator.worst = margin;
            rep.exterior_operator.location = x;
        }
    }
    rep.exterior_operator.pass = rep.exterior_operator.worst >= 0.0;

    rep.pass = rep.value_dominance.pass && rep.interior_pde.pass && rep.exterior_operator.pass;
    return rep;
}

}  // namespace reins
