#include <catch2/catch_amalgamated.hpp>

#include "reins/level.hpp"

using namespace reins;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

RootProfile benchmark_proportional(double theta = 0.5) {
    ModelParams p;
    p.theta = theta;
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

// With the benchmark constants the proportional optimum is exactly rational:
// the discriminant d^2 + 2 rho M2 / lambda collapses to 4 at b = 4/69,
// giving gamma^-(b*) = -69/160.
constexpr double kBStarProp = 4.0 / 69.0;
constexpr double kGammaStarProp = -0.43125;

// Frozen from the psi-root refined to 1e-15 (grid argmin agrees below).
constexpr double kBStarEolExp = 0.5206721889138408;

// Pareto(zeta=10, alpha=3): the optimum sits below the support junction, so
// the first-order condition is algebraic: cap = 60/37, b* = 60/97,
// gamma^-(b*) = -37/120.
constexpr double kBStarEolPareto = 60.0 / 97.0;
constexpr double kGammaStarEolPareto = -37.0 / 120.0;

}  // namespace

TEST_CASE("phi at the endpoints of the proportional benchmark") {
    const auto prof = benchmark_proportional();
    CHECK_THAT(phi_proportional(prof, 0.0), WithinRel(5.0, 1e-12));  // mu theta
    // sigma^2 gamma^-(1) + mu theta
    CHECK_THAT(phi_proportional(prof, 1.0), WithinRel(-16.138357147217054, 1e-10));
}

TEST_CASE("phi is strictly decreasing") {
    const auto prof = benchmark_proportional();
    double prev = phi_proportional(prof, 0.0);
    for (int i = 1; i <= 200; ++i) {
        const double v = phi_proportional(prof, i / 200.0);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("proportional benchmark level") {
    const auto prof = benchmark_proportional();
    const auto sol = solve_level(prof);
    CHECK(sol.method == LevelMethod::phi_root);
    CHECK(sol.interior);
    CHECK_THAT(sol.b_star, WithinAbs(kBStarProp, 1e-9));
    CHECK_THAT(sol.gamma_star, WithinRel(kGammaStarProp, 1e-9));
    CHECK(std::abs(phi_proportional(prof, sol.b_star)) <= 1e-10);
    // printed to four decimals in the reference study
    CHECK_THAT(sol.b_star, WithinAbs(0.0580, 5e-4));
}

TEST_CASE("interiority condition threshold") {
    ModelParams p;
    const auto law = ClaimLaw::moments_only(10.0, 200.0);
    const double thr = proportional_interior_threshold(p, law);
    CHECK_THAT(thr, WithinRel(0.3 + std::sqrt(0.09 + 3.2), 1e-12));

    auto solve_at = [&](double theta) {
        return solve_level(benchmark_proportional(theta));
    };
    const auto above = solve_at(thr + 0.01);
    CHECK_FALSE(above.interior);
    CHECK(above.b_star == 1.0);

    // the flip is sharp to 1e-6 in theta
    CHECK(solve_at(thr - 1e-6).interior);
    CHECK_FALSE(solve_at(thr + 1e-6).interior);
}

TEST_CASE("excess-of-loss psi endpoints and benchmark level") {
    const auto prof = benchmark_eol_exp();
    CHECK_THAT(psi_excess_of_loss(prof, 0.0), WithinRel(0.5, 1e-12));  // theta
    CHECK(psi_excess_of_loss(prof, 1.0) < -1e200);                     // divergence sentinel

    const auto sol = solve_level(prof);
    CHECK(sol.method == LevelMethod::psi_root);
    CHECK(sol.interior);
    CHECK_THAT(sol.b_star, WithinAbs(kBStarEolExp, 1e-9));
    CHECK(std::abs(psi_excess_of_loss(prof, sol.b_star)) <= 1e-10);
}

TEST_CASE("excess-of-loss pareto level is the algebraic root") {
    const auto sol = solve_level(benchmark_eol_pareto());
    CHECK(sol.interior);
    CHECK_THAT(sol.b_star, WithinAbs(kBStarEolPareto, 1e-9));
    CHECK_THAT(sol.gamma_star, WithinRel(kGammaStarEolPareto, 1e-9));
}

TEST_CASE("solved level minimizes gamma^- on a dense grid") {
    for (const auto& prof :
         {benchmark_proportional(), benchmark_eol_exp(), benchmark_eol_pareto()}) {
        const auto sol = solve_level(prof);
        const double slack = 1e-9 * std::abs(sol.gamma_star);
        for (int i = 0; i <= 1000; ++i)
            CHECK(sol.gamma_star <= prof.gamma_minus(i / 1000.0) + slack);
    }
}

TEST_CASE("custom family falls back to direct minimization") {
    const auto custom = RetentionModel::custom([](double b) { return 10.0 * b; },
                                               [](double b) { return 200.0 * b * b; });
    const RootProfile prof(ModelParams{}, ClaimLaw::moments_only(10.0, 200.0), custom);
    const auto sol = solve_level(prof);
    CHECK(sol.method == LevelMethod::direct_scan);
    CHECK(sol.interior);
    CHECK_THAT(sol.b_star, WithinAbs(kBStarProp, 1e-7));
}

TEST_CASE("level is invariant under a monetary rescaling") {
    for (double c : {0.01, 100.0}) {
        ModelParams p;
        p.K = 10.0 * c;
        const RootProfile scaled_prop(p, ClaimLaw::moments_only(10.0 * c, 200.0 * c * c),
                                      RetentionModel::proportional());
        CHECK_THAT(solve_level(scaled_prop).b_star, WithinRel(kBStarProp, 1e-9));

        const RootProfile scaled_eol(p, ClaimLaw::exponential(10.0 * c),
                                     RetentionModel::excess_of_loss());
        CHECK_THAT(solve_level(scaled_eol).b_star, WithinRel(kBStarEolExp, 1e-9));
    }
}

TEST_CASE("bisection utility rejects an unbracketed interval") {
    CHECK_THROWS_AS(detail::bisect([](double x) { return 1.0 + x * x; }, 0.0, 1.0, 1e-12),
                    BracketFailure);
}
