#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tauflow/transform.hpp"

#include <cmath>
#include <random>

using namespace tauflow;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("transform constants for the two ratio branches") {
    const TransformSpec s3 = make_transform(kPi / 3, 1);
    CHECK(s3.scale_x == doctest::Approx(1.3160740129524924608).epsilon(1e-15));
    CHECK(s3.scale_u == doctest::Approx(0.70710678118654752440).epsilon(1e-15));
    CHECK(s3.quad_coeff == doctest::Approx(0.35355339059327376220).epsilon(1e-15));
    CHECK(s3.time_linear == doctest::Approx(kPi / 4).epsilon(1e-15));
    CHECK(target_regime(s3).branch == Branch::ArctanSum);

    const TransformSpec s6 = make_transform(kPi / 6, 2);
    CHECK(s6.scale_x == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s6.scale_u == doctest::Approx(0.70710678118654752440).epsilon(1e-15));
    CHECK(s6.quad_coeff == doctest::Approx(0.61237243569579452455).epsilon(1e-15));
    CHECK(s6.time_linear == 0.0); // no time term in the log case
    CHECK(target_regime(s6).branch == Branch::LogDet);

    const TransformSpec lit = make_transform(kPi / 3, 2, false);
    CHECK(lit.time_linear == 0.0);

    CHECK_THROWS_AS(make_transform(kPi / 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_transform(0.0, 1), std::invalid_argument);
}

TEST_CASE("map_potential turns quadratics into quadratics with nu = (lambda+a)/b") {
    for (double tau : {kPi / 6, kPi / 3}) {
        CAPTURE(tau);
        const TauRegime r = regime_of(tau);
        const TransformSpec spec = make_transform(tau, 1);
        const double c = 0.6;
        Grid src(1, 3.0, 0.1);
        ScalarField u = sample(src, [&](const Point& x) { return 0.5 * c * x[0] * x[0]; });
        Grid tgt(1, 3.0 / spec.scale_x, 0.1 / spec.scale_x);
        const ScalarField phi = map_potential(spec, u, 0.0, tgt);
        const double nu = (c + r.a) / r.b;
        for_each_interior(tgt, 1, [&](size_t, const std::array<int, 3>& idx) {
            const SymMatrix H = hessian_at(phi, idx);
            CHECK(H(0, 0) == doctest::Approx(nu).epsilon(1e-8));
        });
    }
    // escaping the source box throws
    const TransformSpec s3 = make_transform(kPi / 3, 1);
    Grid src(1, 1.0, 0.1);
    ScalarField u = sample(src, [](const Point&) { return 0.0; });
    CHECK_THROWS_AS(map_potential(s3, u, 0.0, Grid(1, 1.0, 0.1)), std::out_of_range);
}

TEST_CASE("condition bounds transport to the target branches") {
    const TransformSpec s6 = make_transform(kPi / 6, 1);
    const auto [emu, elam] = map_condition(s6, ConditionSpec::e(kPi / 6, 1.5, 3.0));
    CHECK(emu == doctest::Approx(1.5).epsilon(1e-13));
    CHECK(elam == doctest::Approx(3.0).epsilon(1e-13));

    const TransformSpec s3 = make_transform(kPi / 3, 1);
    const auto [llo, lhi] = map_condition(s3, ConditionSpec::l(kPi / 3, 0.1));
    CHECK(llo == doctest::Approx(-1.1).epsilon(1e-13));
    CHECK(lhi == doctest::Approx(1.1).epsilon(1e-13));

    // kind/branch mismatches are rejected
    CHECK_THROWS_AS(map_condition(s6, ConditionSpec::l(kPi / 3, 0.1)), std::invalid_argument);
    CHECK_THROWS_AS(map_condition(s3, ConditionSpec::e(kPi / 6, 1.5, 3.0)), std::invalid_argument);
    CHECK_THROWS_AS(map_condition(s3, ConditionSpec::b(0.3, 1.0)), std::invalid_argument);
}

TEST_CASE("arctan shift identity holds on the principal branch") {
    const TauRegime r = regime_of(kPi / 3);
    const ShiftIdentity at0 = arctan_shift_identity(0.0, r);
    CHECK(at0.lhs == doctest::Approx(-0.16991845472706096855).epsilon(1e-15));
    CHECK(at0.rhs == doctest::Approx(-0.16991845472706096855).epsilon(1e-15));
    CHECK(std::abs(at0.gap) <= 1e-16);

    std::mt19937_64 rng(23);
    const double lo = -r.a - r.b + 0.05;
    std::uniform_real_distribution<double> dist(lo, lo + 20.0);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k)
        worst = std::max(worst, std::abs(arctan_shift_identity(dist(rng), r).gap));
    CHECK(worst <= 1e-14);

    CHECK_THROWS_AS(arctan_shift_identity(-r.a - r.b, r), std::domain_error);
    CHECK_THROWS_AS(arctan_shift_identity(0.0, regime_of(kPi / 6)), std::invalid_argument);
}

TEST_CASE("arctan-side cross-flow consistency is exact with the time term") {
    Grid src(1, 2.0, 0.1);
    const double c = 0.5;
    ScalarField u0 = sample(src, [&](const Point& x) { return 0.5 * c * x[0] * x[0]; });
    const ConsistencyReport rep = cross_flow_consistency(kPi / 3, u0, 0.2, 4);
    CHECK(rep.arctan_case);
    REQUIRE(rep.times.size() == 4);
    for (size_t k = 0; k < rep.times.size(); ++k) {
        CHECK(rep.gap_corrected[k] <= 1e-10);
        // dropping the time term leaves exactly (pi/4) t in one dimension
        CHECK(rep.gap_literal[k] ==
              doctest::Approx(kPi / 4 * rep.times[k]).epsilon(1e-9));
    }
}

TEST_CASE("log-side cross-flow gap matches the operator discrepancy") {
    // the potential map sends LogRatio Hessians to LogDet Hessians, but the
    // mapped time derivative is (1/2) log((nu-1)/(nu+1)), not (1/2) log nu, so
    // two quadratic flows drift apart at exactly that constant rate
    Grid src(1, 2.0, 0.1);
    const double c = 1.0;
    ScalarField u0 = sample(src, [&](const Point& x) { return 0.5 * c * x[0] * x[0]; });
    const TauRegime r = regime_of(kPi / 6);
    const ConsistencyReport rep = cross_flow_consistency(kPi / 6, u0, 0.2, 4);
    CHECK_FALSE(rep.arctan_case);
    const double nu = (c + r.a) / r.b;
    const double rate = std::abs(0.5 * std::log((nu - 1.0) / (nu + 1.0)) - 0.5 * std::log(nu));
    for (size_t k = 0; k < rep.times.size(); ++k) {
        CHECK(rep.gap_corrected[k] == doctest::Approx(rate * rep.times[k]).epsilon(1e-8));
        CHECK(rep.gap_literal[k] == rep.gap_corrected[k]); // no time term on the log side
    }
}
