#include <catch2/catch_amalgamated.hpp>

#include "reins/policy.hpp"

using namespace reins;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

RootProfile benchmark_proportional(double theta = 0.5, double K = 10.0) {
    ModelParams p;
    p.theta = theta;
    p.K = K;
    return RootProfile(p, ClaimLaw::moments_only(10.0, 200.0), RetentionModel::proportional());
}

RootProfile benchmark_eol_exp() {
    return RootProfile(ModelParams{}, ClaimLaw::exponential(10.0),
                       RetentionModel::excess_of_loss());
}

RootProfile benchmark_eol_pareto() {
    return RootProfile(ModelParams{}, ClaimLaw::pareto(10.0, 3.0),
                       RetentionModel::excess_of_loss());
}

constexpr double kGm1 = -0.10569178573608527;

// frozen (bisection refined to 1e-12; the reference study prints 12.2341)
constexpr double kXStarProp = 12.234093097717;
// frozen from the corrected excess-of-loss solution
constexpr double kXStarEolExp = 12.033556703283;

}  // namespace

TEST_CASE("injection value function") {
    const double g = kGm1;
    CHECK_THAT(injection_value(g, 0.0), WithinRel(-1.0 / g, 1e-14));
    CHECK_THAT(injection_value(g, 0.0), WithinRel(9.461473216958, 1e-10));
    CHECK(injection_value(g, 1e4) < 1e-12);                        // vanishes at infinity
    CHECK(injection_value(g, -5.0) == 5.0 + injection_value(g, 0.0));  // linear extension
    // decreasing and convex on a grid
    double prev = injection_value(g, 0.0), prev_d = -1.0;
    for (int i = 1; i <= 100; ++i) {
        const double y = i * 0.5;
        const double v = injection_value(g, y);
        CHECK(v < prev);
        const double d = (v - prev) / 0.5;
        CHECK(d >= prev_d - 1e-12);
        prev = v;
        prev_d = d;
    }
}

TEST_CASE("obstacle shape at the proportional benchmark") {
    const auto prof = benchmark_proportional();
    const auto level = solve_level(prof);
    const Obstacle f(level.gamma_star, prof.gamma_minus_1(), 10.0);

    // piecewise junction at x = K
    CHECK_THAT(f(10.0 - 1e-12), WithinRel(f(10.0 + 1e-12), 1e-10));
    // f(0) = K + (gb - g1)/(g1 gb)
    CHECK_THAT(f.at_zero(), WithinRel(f(0.0), 1e-12));
    CHECK(f.case_i());
    CHECK(f(0.0) >= 0.0);

    // global minimum at x_hat, with the closed-form minimum value
    const double xh = f.x_hat();
    CHECK(xh > 10.0);
    CHECK_THAT(f(xh), WithinRel(f.min_value(), 1e-12));
    CHECK(f.min_value() < 0.0);
    double prev = f(0.0);
    for (int i = 1; i <= 400; ++i) {
        const double x = xh * i / 400.0;
        CHECK(f(x) < prev);
        prev = f(x);
    }
    for (int i = 1; i <= 400; ++i) {
        const double x = xh + i * 0.1;
        CHECK(f(x) > prev);
        prev = f(x);
    }
    CHECK(std::abs(f(xh + 2000.0)) < 1e-12);  // tends to zero

    // a smaller fixed cost flips the sign of f(0)
    const Obstacle f5(level.gamma_star, prof.gamma_minus_1(), 5.0);
    CHECK_FALSE(f5.case_i());
    CHECK(f5(0.0) < 0.0);
}

TEST_CASE("free boundary at the benchmarks") {
    const auto prof = benchmark_proportional();
    const auto level = solve_level(prof);
    const double g1 = prof.gamma_minus_1(), gp = prof.gamma_plus_1();
    const double xs = solve_boundary(level.gamma_star, g1, gp, 10.0);
    CHECK_THAT(xs, WithinAbs(kXStarProp, 1e-8));
    CHECK_THAT(xs, WithinAbs(12.2341, 5e-4));  // printed reference value

    const auto eol = benchmark_eol_exp();
    const auto eol_level = solve_level(eol);
    const double xse =
        solve_boundary(eol_level.gamma_star, eol.gamma_minus_1(), eol.gamma_plus_1(), 10.0);
    CHECK_THAT(xse, WithinAbs(kXStarEolExp, 1e-8));
}

TEST_CASE("free-boundary equation residual and bracket") {
    for (const auto& prof :
         {benchmark_proportional(), benchmark_eol_exp(), benchmark_eol_pareto()}) {
        const auto level = solve_level(prof);
        const double g1 = prof.gamma_minus_1(), gp = prof.gamma_plus_1();
        const double K = prof.params().K;
        const double xs = solve_boundary(level.gamma_star, g1, gp, K);
        const double lhs = detail::boundary_lhs(level.gamma_star, g1, gp, xs);
        const double rhs = detail::boundary_rhs(level.gamma_star, g1, gp, K);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));

        const double xhat = level.gamma_star / (level.gamma_star - g1) * K;
        CHECK(xs >= K);
        CHECK(xs <= xhat);
    }
}

TEST_CASE("the boundary is strictly increasing in the fixed cost") {
    const auto prof = benchmark_proportional();
    const auto level = solve_level(prof);
    const double g1 = prof.gamma_minus_1(), gp = prof.gamma_plus_1();
    double prev = -1.0;
    for (double K : {0.1, 1.0, 5.0, 10.0, 20.0, 50.0}) {
        const double xs = solve_boundary(level.gamma_star, g1, gp, K);
        CHECK(xs > prev);
        prev = xs;
    }
    CHECK(solve_boundary(level.gamma_star, g1, gp, 0.0) == 0.0);

    // vanishing-cost limit: x*(K) <= x_hat(K) = ratio * K
    const double ratio = level.gamma_star / (level.gamma_star - g1);
    const double tiny = solve_boundary(level.gamma_star, g1, gp, 1e-6);
    CHECK(tiny <= 1e-6 * ratio);
    CHECK(1e-6 * ratio <= 2e-6 * ratio);
}

TEST_CASE("the boundary equation's left side is strictly increasing") {
    const auto prof = benchmark_proportional();
    const auto level = solve_level(prof);
    const double g1 = prof.gamma_minus_1(), gp = prof.gamma_plus_1();
    const double xhat = level.gamma_star / (level.gamma_star - g1) * 10.0;
    double prev = detail::boundary_lhs(level.gamma_star, g1, gp, 0.0);
    for (int i = 1; i <= 10000; ++i) {
        const double x = 4.0 * xhat * i / 10000.0;
        const double v = detail::boundary_lhs(level.gamma_star, g1, gp, x);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("assembled solution: coefficients and pasting") {
    for (const auto& prof :
         {benchmark_proportional(), benchmark_eol_exp(), benchmark_eol_pareto()}) {
        const auto sol = solve_policy(prof);
        REQUIRE(sol.x_star.has_value());
        const double xs = *sol.x_star;

        CHECK(sol.B > 0.0);
        CHECK(sol.B < 1.0);
        CHECK(sol.H < 0.0);
        CHECK(sol.C1 == sol.B / sol.gamma_1);
        CHECK(sol.C2 == -sol.B / sol.gamma_p);

        // Neumann condition at the reflecting barrier
        CHECK(std::abs(sol.F_deriv(0.0)) <= 1e-10);
        // value matching and smooth pasting at the boundary
        const double scale = std::max(1.0, std::abs(sol.f(xs)));
        CHECK(std::abs(sol.F(xs - 1e-13) - sol.f(xs)) <= 1e-8 * scale);
        const double wd = sol.C1 * sol.gamma_1 * std::exp(sol.gamma_1 * xs) +
                          sol.C2 * sol.gamma_p * std::exp(sol.gamma_p * xs);
        CHECK(std::abs(wd - sol.obstacle().deriv(xs)) <= 1e-8 * scale);
    }
}

TEST_CASE("proportional benchmark coefficients (frozen)") {
    const auto sol = solve_policy(benchmark_proportional());
    CHECK_THAT(sol.B, WithinRel(0.0476170683, 1e-7));
    CHECK_THAT(sol.H, WithinRel(-0.1420212243, 1e-7));
    CHECK_THAT(sol.C1, WithinRel(-0.4505276168, 1e-7));
    CHECK_THAT(sol.C2, WithinRel(-0.6290916231, 1e-7));
    CHECK(sol.policy_case == PolicyCase::case_i);
    CHECK_THAT(sol.U(0.0), WithinRel(8.38185398, 1e-8));
}

TEST_CASE("value function properties on a grid") {
    for (const auto& prof :
         {benchmark_proportional(), benchmark_eol_exp(), benchmark_eol_pareto()}) {
        const auto sol = solve_policy(prof);
        const double xs = *sol.x_star;
        const double xh = sol.x_hat();
        const auto f = sol.obstacle();

        double prev = sol.U(0.0);
        CHECK(prev >= 0.0);
        for (int i = 1; i <= 2000; ++i) {
            const double x = 4.0 * xh * i / 2000.0;
            const double u = sol.U(x);
            CHECK(u >= 0.0);
            CHECK(u <= prev + 1e-12);  // more surplus never costs more
            prev = u;

            CHECK(sol.F(x) <= std::max(0.0, f(x)) + 1e-12);
        }
        // F stays nonpositive between the boundary and the obstacle minimum
        CHECK(f(xh) < 0.0);
        for (int i = 0; i <= 100; ++i) {
            const double x = xs + (xh - xs) * i / 100.0;
            CHECK(sol.F(x) <= 1e-12);
        }
        // immediate-activation region: U(x) = G_{b*}(x - K) by cancellation
        for (double x : {xs, xs + 1.0, xs + 10.0}) {
            CHECK_THAT(sol.U(x), WithinRel(sol.G_bstar(x - prof.params().K), 1e-13));
        }
    }
}

TEST_CASE("variational inequality report") {
    for (const auto& prof :
         {benchmark_proportional(), benchmark_eol_exp(), benchmark_eol_pareto()}) {
        const auto sol = solve_policy(prof);
        const auto rep = verify_variational(sol);
        CHECK(rep.pass);
        CHECK(rep.value_dominance.pass);
        CHECK(rep.interior_pde.pass);
        CHECK(rep.exterior_operator.pass);

        // the operator sign rests on Phi(1, gamma_b) > 0 for gamma_b < gamma_1
        const double g = sol.gamma_b;
        const double phi1 = 0.5 * sol.params.lambda * sol.sigma2 * g * g +
                            sol.params.lambda * sol.params.eta * sol.mu * g - sol.params.rho;
        CHECK(phi1 > 0.0);
    }
}

TEST_CASE("never-reinsure branch") {
    const auto prof = benchmark_proportional(2.2);  // above the interiority threshold
    const auto sol = solve_policy(prof);
    CHECK(sol.never_reinsure());
    CHECK_FALSE(sol.x_star.has_value());
    for (double x : {0.0, 3.0, 17.0}) {
        CHECK(sol.F(x) == 0.0);
        CHECK(sol.U(x) == sol.G1(x));
    }
    const auto rep = verify_variational(sol);
    CHECK(rep.degenerate);
    CHECK(rep.pass);
}

TEST_CASE("boundary solver rejects non-interior input") {
    CHECK_THROWS_AS(solve_boundary(-0.1, -0.2, 0.07, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(solve_boundary(-0.4, -0.1, 0.07, -1.0), std::invalid_argument);
}

TEST_CASE("monetary rescaling scales the boundary") {
    const auto base = solve_policy(benchmark_proportional());
    for (double c : {0.01, 100.0}) {
        ModelParams p;
        p.K = 10.0 * c;
        const RootProfile prof(p, ClaimLaw::moments_only(10.0 * c, 200.0 * c * c),
                               RetentionModel::proportional());
        const auto sol = solve_policy(prof);
        CHECK_THAT(sol.b_star, WithinRel(base.b_star, 1e-9));
        CHECK_THAT(*sol.x_star, WithinRel(c * *base.x_star, 1e-9));
    }
}
