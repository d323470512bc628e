#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tauflow/field.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace tauflow;

namespace {
constexpr double kPi = 3.14159265358979323846;

double smooth3(const Point& x) {
    return std::sin(x[0]) * std::cos(0.7 * x[1]) + 0.3 * std::exp(0.4 * x[2]) +
           0.1 * x[0] * x[1] * x[2];
}
} // namespace

TEST_CASE("grid geometry and indexing round-trip") {
    Grid g(2, 1.0, 0.25);
    CHECK(g.m() == 9);
    CHECK(g.total_points() == 81);
    CHECK(g.center_index() == 4);
    CHECK(g.coord(0) == doctest::Approx(-1.0));
    CHECK(g.coord(8) == doctest::Approx(1.0));
    CHECK(g.extent() == doctest::Approx(1.0));
    for (size_t p = 0; p < g.total_points(); ++p) CHECK(g.flat_index(g.multi_index(p)) == p);
    CHECK(g.is_interior({2, 2, 0}, 2));
    CHECK_FALSE(g.is_interior({1, 4, 0}, 2));
    CHECK_THROWS_AS(Grid(1, 0.1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(Grid(4, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("for_each_interior visits exactly the interior") {
    Grid g(3, 1.0, 0.5); // m = 5
    int count = 0;
    for_each_interior(g, 2, [&](size_t, const std::array<int, 3>&) { ++count; });
    CHECK(count == 1); // only the center survives offset 2 on m = 5
    count = 0;
    for_each_interior(g, 1, [&](size_t, const std::array<int, 3>&) { ++count; });
    CHECK(count == 27);
}

TEST_CASE("sample rejects non-finite data") {
    Grid g(1, 1.0, 0.25);
    CHECK_THROWS_AS(sample(g, [](const Point& x) { return 1.0 / x[0]; }), std::runtime_error);
}

TEST_CASE("derivatives are exact on quadratics") {
    Grid g(2, 1.0, 0.2);
    // u = 1.5 x^2/2 + 0.25 xy - 0.5 y^2/2 + 3x - y + 7
    auto u = [](const Point& p) {
        return 0.75 * p[0] * p[0] + 0.25 * p[0] * p[1] - 0.25 * p[1] * p[1] + 3.0 * p[0] -
               p[1] + 7.0;
    };
    ScalarField f = sample(g, u);
    for_each_interior(g, 1, [&](size_t, const std::array<int, 3>& idx) {
        const Point x = g.point(idx);
        CHECK(derivative1_at(f, idx, 0) ==
              doctest::Approx(1.5 * x[0] + 0.25 * x[1] + 3.0).epsilon(1e-12));
        const SymMatrix H = hessian_at(f, idx);
        CHECK(H(0, 0) == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(H(0, 1) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(H(1, 1) == doctest::Approx(-0.5).epsilon(1e-12));
    });
    // third derivatives of a quadratic vanish
    CHECK(sup_derivative_norm(f, 3) == doctest::Approx(0.0).epsilon(1e-11));
}

TEST_CASE("finite differences converge at second order") {
    // aggregate max error on a smooth function should shrink ~ h^2
    auto max_hessian_error = [&](double h) {
        Grid g(3, 0.8, h);
        ScalarField f = sample(g, smooth3);
        double worst = 0.0;
        for_each_interior(g, 1, [&](size_t, const std::array<int, 3>& idx) {
            const Point x = g.point(idx);
            const SymMatrix H = hessian_at(f, idx);
            const double exact00 = -std::sin(x[0]) * std::cos(0.7 * x[1]);
            const double exact01 = -0.7 * std::cos(x[0]) * std::sin(0.7 * x[1]) + 0.1 * x[2];
            worst = std::max(worst, std::abs(H(0, 0) - exact00));
            worst = std::max(worst, std::abs(H(0, 1) - exact01));
        });
        return worst;
    };
    const double e1 = max_hessian_error(0.1);
    const double e2 = max_hessian_error(0.05);
    const double order = std::log2(e1 / e2);
    CHECK(order > 1.9);
}

TEST_CASE("third derivatives approximate the analytic tensor") {
    Grid g(1, 1.0, 0.02);
    ScalarField f = sample(g, [](const Point& x) { return std::sin(2.0 * x[0]); });
    std::array<int, 3> idx{g.center_index(), 0, 0};
    const auto T = third_derivative_at(f, idx);
    CHECK(T[0] == doctest::Approx(-8.0 * std::cos(0.0)).epsilon(2e-3));
}

TEST_CASE("multilinear interpolation") {
    Grid g(2, 1.0, 0.25);
    // exact for multilinear functions
    ScalarField f = sample(g, [](const Point& x) { return 2.0 + 3.0 * x[0] - x[1] + 0.5 * x[0] * x[1]; });
    CHECK(interpolate(f, {0.13, -0.41, 0.0}) ==
          doctest::Approx(2.0 + 3.0 * 0.13 + 0.41 + 0.5 * 0.13 * -0.41).epsilon(1e-13));
    // grid points reproduce samples
    CHECK(interpolate(f, {0.25, 0.5, 0.0}) ==
          doctest::Approx(f[g.flat_index({5, 6, 0})]).epsilon(1e-14));
    CHECK_THROWS_AS(interpolate(f, {1.5, 0.0, 0.0}), std::out_of_range);
}

TEST_CASE("parabolic rescale strips value and gradient, scales the rest") {
    // u(x) = q x^2/2 + g x + v rescales to q y^2/2 for every sigma
    Grid src(1, 2.0, 0.05);
    const double q = 1.3, gr = -0.4, v = 2.2;
    ScalarField f = sample(src, [&](const Point& x) { return 0.5 * q * x[0] * x[0] + gr * x[0] + v; });
    for (double sigma : {1.0, 2.0, 4.0}) {
        // target spacing sigma*h places every y/sigma on a source node, so the
        // result is exact rather than polluted by interpolation error
        Grid tgt(1, 2.0 * sigma * 0.05, sigma * 0.05);
        ScalarField r = parabolic_rescale(f, {0, 0, 0}, {gr, 0, 0}, v, sigma, tgt);
        for (size_t p = 0; p < tgt.total_points(); ++p) {
            const Point y = tgt.point(p);
            CHECK(r[p] == doctest::Approx(0.5 * q * y[0] * y[0]).epsilon(1e-11));
        }
    }
    // off-node evaluation carries O(sigma^2 h^2) interpolation error, no more
    {
        Grid tgt(1, 0.5, 0.05);
        ScalarField r = parabolic_rescale(f, {0, 0, 0}, {gr, 0, 0}, v, 2.0, tgt);
        for (size_t p = 0; p < tgt.total_points(); ++p) {
            const Point y = tgt.point(p);
            CHECK(std::abs(r[p] - 0.5 * q * y[0] * y[0]) <= 4.0 * q * 0.05 * 0.05);
        }
        CHECK_THROWS_AS(parabolic_rescale(f, {0, 0, 0}, {0, 0, 0}, 0.0, 0.1, tgt),
                        std::out_of_range);
    }
}

TEST_CASE("snapshot files round-trip bit-exactly") {
    Grid g(2, 0.6, 0.2);
    ScalarField f = sample(g, [](const Point& x) { return std::sin(3.0 * x[0]) + kPi * x[1]; });
    const std::string path = (std::filesystem::temp_directory_path() / "tauflow_snap.txt").string();
    write_snapshot(path, f, 0.725);
    const auto [f2, t] = read_snapshot(path);
    CHECK(t == 0.725);
    CHECK(f2.grid == g);
    for (size_t p = 0; p < g.total_points(); ++p) CHECK(f2[p] == f[p]);
    std::remove(path.c_str());
}

TEST_CASE("format_double is stable and precise") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-11) == "-2.5000000000000001e-11");
}
