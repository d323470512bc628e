#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tauflow/analysis.hpp"

#include <cmath>

using namespace tauflow;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("condition constructors police their parameter ranges") {
    CHECK_THROWS_AS(ConditionSpec::b(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ConditionSpec::b(0.5, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(ConditionSpec::e(kPi / 3, 1.5, 3.0), std::invalid_argument); // wrong branch
    CHECK_THROWS_AS(ConditionSpec::e(kPi / 6, 1.0, 3.0), std::invalid_argument); // mu not > 1
    CHECK_THROWS_AS(ConditionSpec::e(kPi / 6, 2.0, 1.5), std::invalid_argument); // mu >= Lambda
    CHECK_THROWS_AS(ConditionSpec::l(kPi / 6, 0.1), std::invalid_argument);      // wrong branch
    CHECK_THROWS_AS(ConditionSpec::l(kPi / 3, 0.0), std::invalid_argument);
}

TEST_CASE("condition eigenvalue bounds") {
    const auto [blo, bhi] = ConditionSpec::b(0.3, 1.0).bounds();
    CHECK(blo == doctest::Approx(-0.7).epsilon(1e-15));
    CHECK(bhi == doctest::Approx(1.0).epsilon(1e-15));

    // E at tau = pi/6, mu = 1.5, Lambda = 3: [b mu - a, b Lambda - a]
    const auto [elo, ehi] = ConditionSpec::e(kPi / 6, 1.5, 3.0).bounds();
    CHECK(elo == doctest::Approx(0.38926953599076527968).epsilon(1e-15));
    CHECK(ehi == doctest::Approx(2.5105898795504078529).epsilon(1e-15));

    // L at tau = pi/3, eta = 0.1
    const auto [llo, lhi] = ConditionSpec::l(kPi / 3, 0.1).bounds();
    CHECK(llo == doctest::Approx(-1.4754965082101244005).epsilon(1e-15));
    CHECK(lhi == doctest::Approx(0.32079596983087287150).epsilon(1e-15));

    ConditionSpec a;
    a.kind = ConditionKind::A;
    CHECK_THROWS_AS(a.bounds(), std::invalid_argument);
}

TEST_CASE("check_condition measures margins on quadratic data") {
    Grid g(2, 1.0, 0.1);
    const ConditionSpec cond = ConditionSpec::b(0.3, 1.0); // bounds [-0.7, 1]
    auto quad = [&](double c) {
        return sample(g, [c](const Point& x) { return 0.5 * c * (x[0] * x[0] + x[1] * x[1]); });
    };
    const ConditionReport inside = check_condition(cond, quad(0.2));
    CHECK(inside.satisfied);
    CHECK(inside.lam_min == doctest::Approx(0.2).epsilon(1e-11));
    CHECK(inside.lam_max == doctest::Approx(0.2).epsilon(1e-11));
    CHECK(inside.margin == doctest::Approx(0.8).epsilon(1e-10)); // 1 - 0.2

    const ConditionReport outside = check_condition(cond, quad(1.4));
    CHECK_FALSE(outside.satisfied);
    CHECK(outside.margin == doctest::Approx(-0.4).epsilon(1e-10));

    const std::string j = condition_report_json(inside);
    CHECK(j.find("\"satisfied\":true") != std::string::npos);
}

TEST_CASE("eigen_field matches pointwise eigenvalues") {
    Grid g(2, 1.0, 0.2);
    ScalarField f = sample(g, [](const Point& x) {
        return 0.5 * (1.5 * x[0] * x[0] + 0.6 * x[0] * x[1] - 0.5 * x[1] * x[1]);
    });
    const HessianField hess = hessian_field(f);
    const auto eigs = eigen_field(hess);
    for_each_interior(g, 1, [&](size_t flat, const std::array<int, 3>&) {
        CHECK(eigs[flat].n == 2);
        CHECK(eigs[flat][0] <= eigs[flat][1]);
        // trace is preserved
        CHECK(eigs[flat][0] + eigs[flat][1] == doctest::Approx(1.0).epsilon(1e-10));
    });
}

TEST_CASE("homogeneity defect separates 2-homogeneous profiles") {
    auto hom = [](const Point& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        if (r2 == 0.0) return 0.0;
        return 0.5 * r2 + 0.1 * (x[0] * x[0] - x[1] * x[1]);
    };
    auto not_hom = [&](const Point& x) { return hom(x) + 0.05; };
    const std::vector<double> radii{0.5, 2.0, 3.7};
    const std::vector<Point> dirs{{1, 0, 0}, {0.6, 0.8, 0}, {-0.3, 1.1, 0}};
    CHECK(homogeneity_defect(hom, radii, dirs) <= 1e-14);
    CHECK(homogeneity_defect(not_hom, radii, dirs) > 1e-3);
    CHECK_THROWS_AS(homogeneity_defect(hom, {0.0}, dirs), std::invalid_argument);
}

TEST_CASE("decay_exponent recovers a pure power law") {
    std::vector<std::pair<double, double>> series;
    for (int k = 0; k < 40; ++k) {
        const double t = 0.5 + 0.1 * k;
        series.emplace_back(t, 3.0 * std::pow(t, -1.2));
    }
    const DecayFit fit = decay_exponent(series, 0.2);
    CHECK(fit.alpha == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(fit.c == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(fit.rms_residual <= 1e-12);
    CHECK_THROWS_AS(decay_exponent({{1.0, 1.0}, {2.0, 0.5}}, 0.0), std::invalid_argument);
    series[5].second = -1.0;
    CHECK_THROWS_AS(decay_exponent(series, 0.0), std::invalid_argument);
}

TEST_CASE("induced metric formula") {
    SymMatrix H = SymMatrix::zero(2);
    H(0, 0) = 0.8;
    H(1, 1) = -0.3;
    H(0, 1) = H(1, 0) = 0.25;
    const double tau = kPi / 3;
    const SymMatrix g = induced_metric(tau, H);
    const double st = std::sin(tau), ct = std::cos(tau);
    // g_00 = st (1 + H_00^2 + H_01^2) + 2 ct H_00
    CHECK(g(0, 0) == doctest::Approx(st * (1 + 0.8 * 0.8 + 0.25 * 0.25) + 2 * ct * 0.8)
                         .epsilon(1e-14));
    CHECK(g(0, 1) == doctest::Approx(st * (0.8 * 0.25 + 0.25 * -0.3) + 2 * ct * 0.25)
                         .epsilon(1e-14));
    CHECK(g(0, 1) == g(1, 0));
}

TEST_CASE("geometry residual vanishes on quadratics and is small on smooth data") {
    const TauRegime regime = regime_of(kPi / 2);
    Grid g(2, 1.0, 0.1);
    ScalarField quad = sample(g, [](const Point& x) {
        return 0.5 * (0.7 * x[0] * x[0] - 0.2 * x[1] * x[1]) + 0.15 * x[0] * x[1];
    });
    FlowState qs = make_flow_state(quad, regime, {BoundaryMode::Frozen, nullptr});
    CHECK(geometry_residual(qs) <= 1e-10);

    ScalarField smooth = sample(g, [](const Point& x) {
        return 0.25 * std::sin(x[0]) * std::cos(x[1]) + 0.1 * x[0] * x[0];
    });
    FlowState ss = make_flow_state(smooth, regime, {BoundaryMode::Frozen, nullptr});
    // chain-rule identity d_k F = g^ij u_ijk holds to discretization error
    CHECK(geometry_residual(ss) <= 5e-3);
}
