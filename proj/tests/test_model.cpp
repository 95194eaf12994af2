#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "reins/params.hpp"
#include "reins/roots.hpp"

using namespace reins;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const ClaimLaw kMoments = ClaimLaw::moments_only(10.0, 200.0);
const ClaimLaw kExp = ClaimLaw::exponential(10.0);
const ClaimLaw kPar = ClaimLaw::pareto(10.0, 3.0);
}  // namespace

TEST_CASE("law moments") {
    CHECK(kExp.mean() == 10.0);
    CHECK(kExp.second_moment() == 200.0);
    CHECK_THAT(kPar.mean(), WithinRel(15.0, 1e-14));        // alpha zeta / (alpha - 1)
    CHECK_THAT(kPar.second_moment(), WithinRel(300.0, 1e-14));  // alpha zeta^2 / (alpha - 2)
}

TEST_CASE("law validation") {
    CHECK_THROWS_AS(ClaimLaw::exponential(0.0), std::invalid_argument);
    CHECK_THROWS_AS(ClaimLaw::pareto(10.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(ClaimLaw::pareto(0.0, 3.0), std::invalid_argument);
    CHECK_THROWS_AS(ClaimLaw::moments_only(10.0, 99.0), std::invalid_argument);  // Jensen
    CHECK_NOTHROW(ClaimLaw::moments_only(10.0, 100.0));
}

TEST_CASE("proportional moments at the corners and midpoint") {
    const auto prop = RetentionModel::proportional();
    auto m = moments(prop, kMoments, 1.0);
    CHECK(m.m1 == 10.0);
    CHECK(m.m2 == 200.0);
    m = moments(prop, kMoments, 0.5);
    CHECK(m.m1 == 5.0);
    CHECK(m.m2 == 50.0);
    m = moments(prop, kMoments, 0.0);
    CHECK(m.m1 == 0.0);
    CHECK(m.m2 == 0.0);
}

TEST_CASE("excess-of-loss exponential midpoint against quadrature") {
    const auto eol = RetentionModel::excess_of_loss();
    const auto m = moments(eol, kExp, 0.5);
    // closed forms at cap b/(1-b) = 1
    CHECK_THAT(m.m1, WithinRel(0.95162581964040480, 1e-12));
    CHECK_THAT(m.m2, WithinRel(0.93576803208890563, 1e-12));
    CHECK_THAT(m.m1, WithinRel(oracles::exp_capped_moment(10.0, 1.0, 1), 1e-10));
    CHECK_THAT(m.m2, WithinRel(oracles::exp_capped_moment(10.0, 1.0, 2), 1e-10));
}

TEST_CASE("excess-of-loss pareto below the support minimum") {
    const auto eol = RetentionModel::excess_of_loss();
    const auto m = moments(eol, kPar, 0.4);  // cap 2/3 < zeta: every claim is capped
    CHECK_THAT(m.m1, WithinRel(2.0 / 3.0, 1e-14));
    CHECK_THAT(m.m2, WithinRel(4.0 / 9.0, 1e-14));
}

TEST_CASE("analytic moments match quadrature on a b grid") {
    const auto eol = RetentionModel::excess_of_loss();
    const auto prop = RetentionModel::proportional();
    for (int i = 0; i <= 20; ++i) {
        const double b = i / 20.0;
        const double cap = b / (1.0 - b);  // inf at b=1

        auto m = moments(eol, kExp, b);
        const double q1 = b == 1.0 ? oracles::exp_moment(10.0, 1)
                                   : oracles::exp_capped_moment(10.0, cap, 1);
        const double q2 = b == 1.0 ? oracles::exp_moment(10.0, 2)
                                   : oracles::exp_capped_moment(10.0, cap, 2);
        CHECK_THAT(m.m1, WithinRel(q1, 1e-8) || WithinAbs(q1, 1e-12));
        CHECK_THAT(m.m2, WithinRel(q2, 1e-8) || WithinAbs(q2, 1e-12));

        for (double alpha : {2.5, 3.0, 6.0}) {
            const auto law = ClaimLaw::pareto(10.0, alpha);
            m = moments(eol, law, b);
            const double p1 = b == 1.0 ? law.mean()
                                       : oracles::pareto_capped_moment(10.0, alpha, cap, 1);
            const double p2 = b == 1.0 ? law.second_moment()
                                       : oracles::pareto_capped_moment(10.0, alpha, cap, 2);
            CHECK_THAT(m.m1, WithinRel(p1, 1e-8) || WithinAbs(p1, 1e-12));
            CHECK_THAT(m.m2, WithinRel(p2, 1e-8) || WithinAbs(p2, 1e-12));
        }

        // proportional against the law moments directly
        m = moments(prop, kExp, b);
        CHECK_THAT(m.m1, WithinRel(10.0 * b, 1e-12) || WithinAbs(0.0, 1e-15));
        CHECK_THAT(m.m2, WithinRel(200.0 * b * b, 1e-12) || WithinAbs(0.0, 1e-15));
    }
}

TEST_CASE("pareto piecewise branches agree at the junction") {
    const auto eol = RetentionModel::excess_of_loss();
    const double bj = 10.0 / 11.0;  // cap(bj) = zeta
    const double eps = 1e-9;
    const auto lo = moments(eol, kPar, bj - eps);
    const auto hi = moments(eol, kPar, bj + eps);
    CHECK_THAT(lo.m1, WithinRel(hi.m1, 1e-10));
    CHECK_THAT(lo.m2, WithinRel(hi.m2, 1e-10));
}

TEST_CASE("moment curves are nondecreasing and hit the boundary identities") {
    struct Family {
        RetentionModel model;
        ClaimLaw law;
    };
    const Family families[] = {
        {RetentionModel::proportional(), kMoments},
        {RetentionModel::proportional(), kPar},
        {RetentionModel::excess_of_loss(), kExp},
        {RetentionModel::excess_of_loss(), kPar},
    };
    for (const auto& fam : families) {
        const auto at0 = moments(fam.model, fam.law, 0.0);
        CHECK_THAT(at0.m1, WithinAbs(0.0, 1e-12));
        CHECK_THAT(at0.m2, WithinAbs(0.0, 1e-12));
        const auto at1 = moments(fam.model, fam.law, 1.0);
        CHECK_THAT(at1.m1, WithinRel(fam.law.mean(), 1e-9));
        CHECK_THAT(at1.m2, WithinRel(fam.law.second_moment(), 1e-9));

        double prev1 = 0.0, prev2 = 0.0;
        for (int i = 0; i <= 100; ++i) {
            const auto m = moments(fam.model, fam.law, i / 100.0);
            CHECK(m.m1 >= prev1 - 1e-12);
            CHECK(m.m2 >= prev2 - 1e-12);
            prev1 = m.m1;
            prev2 = m.m2;
        }
    }
}

TEST_CASE("moment preconditions") {
    const auto eol = RetentionModel::excess_of_loss();
    const auto prop = RetentionModel::proportional();
    CHECK_THROWS_AS(moments(prop, kMoments, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(moments(prop, kMoments, 1.1), std::invalid_argument);
    CHECK_THROWS_AS(moments(eol, kMoments, 0.5), std::invalid_argument);  // needs a density
}

TEST_CASE("custom retention is validated against the boundary identities") {
    const auto good = RetentionModel::custom([](double b) { return 10.0 * b; },
                                             [](double b) { return 200.0 * b * b; });
    CHECK_NOTHROW(RootProfile(ModelParams{}, kMoments, good));

    const auto bad = RetentionModel::custom([](double b) { return 10.0 * b; },
                                            [](double b) { return 150.0 * b * b; });
    CHECK_THROWS_AS(RootProfile(ModelParams{}, kMoments, bad), std::invalid_argument);
}

TEST_CASE("model params invariants") {
    ModelParams p;
    CHECK_NOTHROW(p.validate());
    p.theta = 0.3;  // theta must strictly exceed eta
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ModelParams{};
    p.K = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ModelParams{};
    p.rho = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
