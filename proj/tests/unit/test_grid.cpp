#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "apstag/grid.hpp"

using namespace apstag;

namespace {

constexpr double pi = std::numbers::pi;

RField<double> random_R(const GridGeometry<double>& g, std::mt19937& rng) {
    std::normal_distribution<double> n;
    auto f = RField<double>::zeros(g);
    f.vertex = f.vertex.unaryExpr([&](double) { return n(rng); });
    f.center = f.center.unaryExpr([&](double) { return n(rng); });
    return f;
}

JField<double> random_J(const GridGeometry<double>& g, std::mt19937& rng) {
    std::normal_distribution<double> n;
    auto f = JField<double>::zeros(g);
    f.hface = f.hface.unaryExpr([&](double) { return n(rng); });
    f.vface = f.vface.unaryExpr([&](double) { return n(rng); });
    return f;
}

double max_diff(const RField<double>& a, const RField<double>& b) { return (a - b).max_abs(); }
double max_diff(const JField<double>& a, const JField<double>& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("geometry") {
    const auto g = GridGeometry<double>::square(4, 0.0, 1.0);
    CHECK(g.dx() == 0.25);
    CHECK(g.dy() == 0.25);
    CHECK(g.point_volume() == 0.03125);
    const GridGeometry<double> r(8, 4, 0.0, 0.0, 2.0, 2.0);
    CHECK(r.h() == 0.25);
    CHECK_THROWS_AS(GridGeometry<double>::square(1, 0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(GridGeometry<double>::square(4, 0.0, 0.0), InvalidArgument);
}

TEST_CASE("sampling coordinates of every plane") {
    const GridGeometry<double> g(5, 3, -1.0, 2.0, 1.0, 3.0);
    auto xs = sample_on_R<double>([](double x, double) { return x; }, g);
    auto ys = sample_on_R<double>([](double, double y) { return y; }, g);
    CHECK(xs.vertex(0, 0) == -1.0);
    CHECK(ys.vertex(0, 0) == 2.0);
    CHECK(std::abs(xs.vertex(1, 2) - (-0.6)) < 1e-15);
    CHECK(std::abs(ys.vertex(1, 2) - 3.0) < 1e-15);
    CHECK(std::abs(xs.center(1, 2) - (-0.5)) < 1e-15);
    CHECK(std::abs(ys.center(1, 2) - 3.5) < 1e-15);
    auto jx = sample_on_J<double>([](double x, double) { return x; }, g);
    auto jy = sample_on_J<double>([](double, double y) { return y; }, g);
    CHECK(std::abs(jx.hface(1, 2) - (-0.5)) < 1e-15);
    CHECK(std::abs(jy.hface(1, 2) - 3.0) < 1e-15);
    CHECK(std::abs(jx.vface(1, 2) - (-0.6)) < 1e-15);
    CHECK(std::abs(jy.vface(1, 2) - 3.5) < 1e-15);
}

TEST_CASE("peak of the narrow Gaussian sampled at the origin vertex") {
    const auto g = GridGeometry<double>::square(64, -1.0, 2.0);
    auto f = sample_on_R<double>(
        [](double x, double y) { return std::exp(-(x * x + y * y) / 0.04) / (0.04 * pi); }, g);
    CHECK(std::abs(f.vertex(32, 32) - 7.957747154594767) < 1e-12);
    CHECK(std::abs(f.max_coeff() - 7.957747154594767) < 1e-12);
}

TEST_CASE("differences of constants vanish") {
    const GridGeometry<double> g(6, 7, 0.0, 0.0, 1.0, 2.0);
    const auto r = RField<double>::constant(g, 3.25);
    const auto j = JField<double>::constant(g, -1.5);
    CHECK(dRx_at_J(r, g).max_abs() == 0);
    CHECK(dRy_at_J(r, g).max_abs() == 0);
    CHECK(dJx_at_R(j, g).max_abs() == 0);
    CHECK(dJy_at_R(j, g).max_abs() == 0);
}

TEST_CASE("explicit stencil entries") {
    const auto g = GridGeometry<double>::square(4, 0.0, 2.0);
    auto r = RField<double>::zeros(g);
    r.vertex(1, 2) = 1;
    r.center(1, 2) = 1;
    const auto dx = dRx_at_J(r, g);
    CHECK(dx.hface(1, 2) == -2.0);
    CHECK(dx.hface(1, 1) == 2.0);
    CHECK(dx.vface(1, 3) == -2.0);
    CHECK(dx.vface(1, 2) == 2.0);
    const auto dy = dRy_at_J(r, g);
    CHECK(dy.vface(1, 2) == -2.0);
    CHECK(dy.vface(0, 2) == 2.0);
    CHECK(dy.hface(2, 2) == -2.0);
    CHECK(dy.hface(1, 2) == 2.0);

    auto j = JField<double>::zeros(g);
    j.hface(0, 3) = 1;
    j.vface(0, 3) = 1;
    const auto jx = dJx_at_R(j, g);
    CHECK(jx.vertex(0, 3) == 2.0);
    CHECK(jx.vertex(0, 0) == -2.0);
    CHECK(jx.center(0, 3) == -2.0);
    CHECK(jx.center(0, 2) == 2.0);
    const auto jy = dJy_at_R(j, g);
    CHECK(jy.vertex(0, 3) == 2.0);
    CHECK(jy.vertex(1, 3) == -2.0);
    CHECK(jy.center(0, 3) == -2.0);
    CHECK(jy.center(3, 3) == 2.0);
}

TEST_CASE("Fourier symbol of every half-step difference") {
    for (int k : {1, 2, 5}) {
        const GridGeometry<double> g(24, 20, 0.3, -0.7, 1.5, 2.0);
        const double kx = 2 * pi * k / g.lx;
        const double ky = 2 * pi * k / g.ly;
        const double sx = 2 * std::sin(kx * g.dx() / 2) / g.dx();
        const double sy = 2 * std::sin(ky * g.dy() / 2) / g.dy();
        auto fx = [&](double x, double) { return std::sin(kx * x); };
        auto gx = [&](double x, double) { return sx * std::cos(kx * x); };
        auto fy = [&](double, double y) { return std::sin(ky * y); };
        auto gy = [&](double, double y) { return sy * std::cos(ky * y); };
        CAPTURE(k);
        CHECK(max_diff(dRx_at_J(sample_on_R<double>(fx, g), g), sample_on_J<double>(gx, g)) < 1e-12);
        CHECK(max_diff(dRy_at_J(sample_on_R<double>(fy, g), g), sample_on_J<double>(gy, g)) < 1e-12);
        CHECK(max_diff(dJx_at_R(sample_on_J<double>(fx, g), g), sample_on_R<double>(gx, g)) < 1e-12);
        CHECK(max_diff(dJy_at_R(sample_on_J<double>(fy, g), g), sample_on_R<double>(gy, g)) < 1e-12);
    }
}

TEST_CASE("second-order consistency on a smooth periodic field") {
    double prev = 0;
    for (int n : {16, 32, 64}) {
        const auto g = GridGeometry<double>::square(n, 0.0, 1.0);
        auto f = [](double x, double y) { return std::sin(2 * pi * x) * std::cos(2 * pi * y); };
        auto fx = [](double x, double y) { return 2 * pi * std::cos(2 * pi * x) * std::cos(2 * pi * y); };
        const double err = max_diff(dRx_at_J(sample_on_R<double>(f, g), g), sample_on_J<double>(fx, g));
        if (prev > 0) CHECK(std::abs(std::log2(prev / err) - 2) < 0.05);
        prev = err;
    }
}

TEST_CASE("summation by parts: dJ and dR are negative adjoints") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const GridGeometry<double> g(3 + trial % 5, 4 + trial % 3, 0.0, 0.0, 1.3, 0.7);
        const auto r = random_R(g, rng);
        const auto j = random_J(g, rng);
        const double sx = dot(dJx_at_R(j, g), r) + dot(j, dRx_at_J(r, g));
        const double sy = dot(dJy_at_R(j, g), r) + dot(j, dRy_at_J(r, g));
        const double scale = (r.max_abs() * j.max_abs()) * g.nx * g.ny / g.h();
        CHECK(std::abs(sx) < 1e-12 * scale);
        CHECK(std::abs(sy) < 1e-12 * scale);
    }
}

TEST_CASE("differences of J-fields sum to zero") {
    std::mt19937 rng(5);
    const auto g = GridGeometry<double>::square(9, 0.0, 1.0);
    const auto j = random_J(g, rng);
    CHECK(std::abs(dJx_at_R(j, g).sum()) < 1e-11);
    CHECK(std::abs(dJy_at_R(j, g).sum()) < 1e-11);
}

TEST_CASE("composed differences give the compact second difference") {
    std::mt19937 rng(3);
    const auto g = GridGeometry<double>::square(7, 0.0, 1.0);
    const auto r = random_R(g, rng);
    const auto lap = dJx_at_R(dRx_at_J(r, g), g);
    const double inv = 1 / (g.dx() * g.dx());
    for (Index j = 0; j < g.ny; ++j) {
        for (Index i = 0; i < g.nx; ++i) {
            const Index ip = (i + 1) % g.nx, im = (i + g.nx - 1) % g.nx;
            const double v = (r.vertex(j, ip) - 2 * r.vertex(j, i) + r.vertex(j, im)) * inv;
            const double c = (r.center(j, ip) - 2 * r.center(j, i) + r.center(j, im)) * inv;
            CHECK(std::abs(lap.vertex(j, i) - v) < 1e-11 * inv);
            CHECK(std::abs(lap.center(j, i) - c) < 1e-11 * inv);
        }
    }
}

TEST_CASE("mismatched field shapes are rejected") {
    const auto g = GridGeometry<double>::square(4, 0.0, 1.0);
    const auto other = GridGeometry<double>::square(5, 0.0, 1.0);
    CHECK_THROWS_AS(dRx_at_J(RField<double>::zeros(other), g), ShapeMismatch);
    CHECK_THROWS_AS(dJy_at_R(JField<double>::zeros(other), g), ShapeMismatch);
}
