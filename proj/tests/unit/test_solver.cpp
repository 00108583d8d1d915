#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "apstag/scenarios.hpp"
#include "apstag/solver.hpp"

using namespace apstag;

namespace {

using R = RField<double>;
using J = JField<double>;

R mul(const R& a, const R& b) { return {a.vertex * b.vertex, a.center * b.center}; }
J mul(const J& a, const J& b) { return {a.hface * b.hface, a.vface * b.vface}; }

R random_R(const GridGeometry<double>& g, std::mt19937& rng, double lo = -1, double hi = 1) {
    std::uniform_real_distribution<double> u(lo, hi);
    auto f = R::zeros(g);
    f.vertex = f.vertex.unaryExpr([&](double) { return u(rng); });
    f.center = f.center.unaryExpr([&](double) { return u(rng); });
    return f;
}

J random_J(const GridGeometry<double>& g, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    auto f = J::zeros(g);
    f.hface = f.hface.unaryExpr([&](double) { return u(rng); });
    f.vface = f.vface.unaryExpr([&](double) { return u(rng); });
    return f;
}

ParityState<double> random_state(const GridGeometry<double>& g, Eigen::Index n, std::mt19937& rng) {
    auto s = ParityState<double>::zeros(g, n);
    for (std::size_t d = 0; d < static_cast<std::size_t>(n); ++d) {
        s.r1[d] = random_R(g, rng);
        s.r2[d] = random_R(g, rng);
        s.j1[d] = random_J(g, rng);
        s.j2[d] = random_J(g, rng);
    }
    return s;
}

MaterialField<double> random_material(const GridGeometry<double>& g, std::mt19937& rng, bool absorbing) {
    MaterialField<double> m;
    m.sigma_s_R = random_R(g, rng, 0.2, 2.0);
    m.sigma_s_J = {random_R(g, rng, 0.2, 2.0).vertex, random_R(g, rng, 0.2, 2.0).center};
    m.sigma_a_R = absorbing ? random_R(g, rng, 0.0, 1.0) : R::zeros(g);
    m.sigma_a_J = absorbing ? J{random_R(g, rng, 0.0, 1.0).vertex, random_R(g, rng, 0.0, 1.0).center} : J::zeros(g);
    return m;
}

// One step assembled from the public difference operators.
ParityState<double> reference_step(ParityState<double> s, const DirectionSet<double>& q,
                                   const MaterialField<double>& mat, const SourceTerm<double>& src,
                                   const SchemeParams<double>& p) {
    const auto& g = s.grid;
    const double e2 = p.epsilon * p.epsilon;
    for (Eigen::Index d = 0; d < q.size(); ++d) {
        const auto k = static_cast<std::size_t>(d);
        for (int parity = 0; parity < 2; ++parity) {
            const double sy = parity == 0 ? -q.eta[d] : q.eta[d];
            auto& r = parity == 0 ? s.r1[k] : s.r2[k];
            auto& j = parity == 0 ? s.j1[k] : s.j2[k];
            auto qr = R::zeros(g);
            auto qj = J::zeros(g);
            src.even_into(s.t, parity, d, qr);
            src.odd_into(s.t, parity, d, qj);
            const R div = q.xi[d] * dJx_at_R(j, g) + sy * dJy_at_R(j, g);
            const J grad = q.xi[d] * dRx_at_J(r, g) + sy * dRy_at_J(r, g);
            const R r_new = r - p.dt * (div + mul(mat.sigma_a_R, r) - qr);
            const J j_new = j - p.dt * (p.phi * grad + mul(mat.sigma_a_J, j) - qj);
            r = r_new;
            j = j_new;
        }
    }
    const R rho = density(s.r1, s.r2, q);
    for (Eigen::Index d = 0; d < q.size(); ++d) {
        const auto k = static_cast<std::size_t>(d);
        for (int parity = 0; parity < 2; ++parity) {
            const double sy = parity == 0 ? -q.eta[d] : q.eta[d];
            auto& r = parity == 0 ? s.r1[k] : s.r2[k];
            auto& j = parity == 0 ? s.j1[k] : s.j2[k];
            for (auto [rp, sp, rhop] : {std::tuple{&r.vertex, &mat.sigma_s_R.vertex, &rho.vertex},
                                         std::tuple{&r.center, &mat.sigma_s_R.center, &rho.center}}) {
                *rp = (e2 * *rp + p.dt * *sp * *rhop) / (e2 + p.dt * *sp);
            }
            const J grad = q.xi[d] * dRx_at_J(r, g) + sy * dRy_at_J(r, g);
            j.hface = (e2 * j.hface - p.dt * (1 - e2 * p.phi) * grad.hface) / (e2 + p.dt * mat.sigma_s_J.hface);
            j.vface = (e2 * j.vface - p.dt * (1 - e2 * p.phi) * grad.vface) / (e2 + p.dt * mat.sigma_s_J.vface);
        }
    }
    s.t += p.dt;
    return s;
}

double state_distance(const ParityState<double>& a, const ParityState<double>& b) {
    double m = 0;
    for (std::size_t d = 0; d < a.r1.size(); ++d) {
        m = std::max({m, (a.r1[d] - b.r1[d]).max_abs(), (a.r2[d] - b.r2[d]).max_abs(),
                      (a.j1[d] - b.j1[d]).max_abs(), (a.j2[d] - b.j2[d]).max_abs()});
    }
    return m;
}

}  // namespace

TEST_CASE("CFL timestep examples") {
    const auto g = GridGeometry<double>::square(64, 0.0, 1.0);
    const auto unit = MaterialField<double>::uniform(g, 1.0, 0.0);
    CHECK(cfl_timestep(1.0, g, unit) == doctest::Approx(3.515625e-3).epsilon(1e-14));
    CHECK(cfl_timestep(1e-3, g, unit) == doctest::Approx(0.45 / (4.0 * 64 * 64)).epsilon(1e-14));
    CHECK(std::abs(cfl_timestep(1e-3, g, unit) - 2.746e-5) < 1e-8);
    const auto absorbing = MaterialField<double>::uniform(g, 1.0, 1000.0);
    CHECK(cfl_timestep(1.0, g, absorbing) == doctest::Approx(0.9 * 0.5 * 1e-3).epsilon(1e-14));
    CHECK(cfl_timestep(1.0, g, unit, 1.0) == doctest::Approx(1.0 / 256).epsilon(1e-14));
    CHECK_THROWS_AS(cfl_timestep(1.0, g, unit, 0.0), InvalidArgument);
    CHECK_THROWS_AS(cfl_timestep(1.0, g, unit, 1.5), InvalidArgument);
    CHECK_THROWS_AS(cfl_timestep(0.0, g, unit), InvalidArgument);
}

TEST_CASE("CFL timestep on a void material uses the hyperbolic arm") {
    const auto g = GridGeometry<double>::square(10, 0.0, 1.0);
    const auto voids = MaterialField<double>::uniform(g, 0.0, 0.0);
    CHECK(cfl_timestep(0.5, g, voids) == doctest::Approx(0.9 * 0.5 * 0.5 * 0.1 / 2));
    auto bad = voids;
    bad.sigma_s_R.vertex(0, 0) = -1;
    CHECK_THROWS_AS(cfl_timestep(0.5, g, bad), InvalidMaterial);
}

TEST_CASE("relaxation parameter examples") {
    const auto g300 = GridGeometry<double>::square(300, -1.0, 2.0);
    const auto unit300 = MaterialField<double>::uniform(g300, 1.0, 0.0);
    CHECK(relaxation_parameter(1.0, g300, unit300) == doctest::Approx(1.0 / 300).epsilon(1e-13));
    CHECK(hyperbolic_regime(1.0, g300, unit300));
    const auto g32 = GridGeometry<double>::square(32, 0.0, 1.0);
    const auto unit32 = MaterialField<double>::uniform(g32, 1.0, 0.0);
    CHECK(relaxation_parameter(1e-2, g32, unit32) == doctest::Approx(1e4).epsilon(1e-13));
    CHECK_FALSE(hyperbolic_regime(1e-2, g32, unit32));
}

TEST_CASE("relaxation parameter is continuous across the regime switch") {
    const double h = 1.0 / 50;
    const double eps_switch = h / 2;
    const double below = relaxation_parameter_bound(eps_switch * (1 - 1e-9), h, 1.0);
    const double above = relaxation_parameter_bound(eps_switch * (1 + 1e-9), h, 1.0);
    CHECK(std::abs(below - above) / above < 1e-8);
}

TEST_CASE("scheme parameters are validated") {
    SchemeParams<double> p{1.0, 0.5, 1e-3, 0.9};
    CHECK_NOTHROW(p.validate());
    p.phi = 2.0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p.phi = -0.1;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {0.0, 0.0, 1e-3, 0.9};
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {1.0, 0.0, 0.0, 0.9};
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("transport of a single bump on a 4x4 grid") {
    const auto g = GridGeometry<double>::square(4, 0.0, 1.0);
    const auto q = gauss_nodes<double>(1);
    const auto mat = MaterialField<double>::uniform(g, 1.0, 0.0);
    auto s = ParityState<double>::zeros(g, 1);
    s.r2[0].vertex(1, 1) = 1;
    const SchemeParams<double> p{1.0, 0.5, 0.01, 0.9};
    const auto t = transport_step(s, q, mat, SourceTerm<double>{}, p);
    const double a = q.xi[0] * 4 * 0.01 * 0.5;
    CHECK(t.r2[0].vertex(1, 1) == 1.0);
    CHECK(std::abs(t.j2[0].hface(1, 1) - a) < 1e-15);
    CHECK(std::abs(t.j2[0].hface(1, 0) + a) < 1e-15);
    CHECK(std::abs(t.j2[0].vface(1, 1) - a) < 1e-15);
    CHECK(std::abs(t.j2[0].vface(0, 1) + a) < 1e-15);
    CHECK(t.j1[0].max_abs() == 0);
    CHECK(t.j2[0].max_abs() == doctest::Approx(a));
    CHECK(t.r1[0].max_abs() == 0);
}

TEST_CASE("relaxation of a single bump") {
    const auto g = GridGeometry<double>::square(4, 0.0, 1.0);
    const auto q = gauss_nodes<double>(1);
    const auto mat = MaterialField<double>::uniform(g, 1.0, 0.0);
    auto s = ParityState<double>::zeros(g, 1);
    s.r2[0].vertex(1, 1) = 1;
    const double dt = 0.01;
    const SchemeParams<double> p{0.1, 1.0, dt, 0.9};
    const auto t = relaxation_step(s, q, mat, p);
    const double e2 = 0.01;
    const double pull = dt / (e2 + dt);
    CHECK(std::abs(t.r2[0].vertex(1, 1) - (1 - pull * 0.5)) < 1e-15);
    CHECK(std::abs(t.r1[0].vertex(1, 1) - pull * 0.5) < 1e-15);
    const double drive = dt * (1 - e2 * 1.0) / (e2 + dt) * q.xi[0] * 4;
    CHECK(std::abs(t.j2[0].hface(1, 0) + drive * (1 - pull * 0.5)) < 1e-14);
    CHECK(std::abs(t.j1[0].hface(1, 0) + drive * pull * 0.5) < 1e-14);
}

TEST_CASE("fused stepper matches the operator-level reference") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> u(0, 1);
    int cases = 0;
    for (int trial = 0; trial < 24; ++trial) {
        const GridGeometry<double> g(5 + trial % 4, 6 + trial % 3, -0.5, 0.25, 1.0 + u(rng), 0.7 + u(rng));
        const auto q = gauss_nodes<double>(1 + trial % 4);
        const bool absorbing = trial % 2 == 1;
        const auto mat = random_material(g, rng, absorbing);
        const double eps = std::pow(10.0, -3 * u(rng));
        const SchemeParams<double> p{eps, u(rng) / (eps * eps), 1e-3 * (0.1 + u(rng)), 0.9};
        SourceTerm<double> src;
        if (trial % 3 == 1) src = SourceTerm<double>::isotropic_field(random_R(g, rng), q.size(), [](double t) { return 1 + t; });
        if (trial % 3 == 2) src = mms_source(g, q, eps);
        auto s = random_state(g, q.size(), rng);
        s.t = 0.05;
        const auto fused = step(s, q, mat, src, p);
        const auto ref = reference_step(s, q, mat, src, p);
        CAPTURE(trial);
        const double scale = 1 + p.dt * (p.phi + 1 / (eps * eps)) / g.h();
        CHECK(state_distance(fused, ref) < 1e-12 * scale);
        CHECK(fused.t == doctest::Approx(ref.t));
        ++cases;
    }
    CHECK(cases == 24);
}

TEST_CASE("relaxation preserves the density") {
    std::mt19937 rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = GridGeometry<double>::square(6, 0.0, 1.0);
        const auto q = gauss_nodes<double>(5);
        const auto mat = random_material(g, rng, false);
        const auto s = random_state(g, q.size(), rng);
        const double eps = trial < 5 ? 1.0 : 1e-4;
        const auto t = relaxation_step(s, q, mat, SchemeParams<double>{eps, 0.0, 0.01, 0.9});
        const auto before = density(s.r1, s.r2, q);
        const auto after = density(t.r1, t.r2, q);
        CHECK((before - after).max_abs() < 1e-13);
    }
}

TEST_CASE("isotropic constant state is a fixed point") {
    const auto g = GridGeometry<double>::square(8, 0.0, 1.0);
    const auto q = gauss_nodes<double>(4);
    const auto mat = MaterialField<double>::uniform(g, 1.0, 0.0);
    auto s = ParityState<double>::zeros(g, q.size());
    for (std::size_t d = 0; d < 4; ++d) s.r1[d] = s.r2[d] = R::constant(g, 2.5);
    const auto t = step(s, q, mat, SourceTerm<double>{}, SchemeParams<double>{0.01, 1.0, 1e-4, 0.9});
    CHECK(state_distance(s, t) < 1e-15);
}

TEST_CASE("every step conserves mass without absorption or source") {
    std::mt19937 rng(47);
    const auto g = GridGeometry<double>::square(12, 0.0, 1.0);
    const auto q = gauss_nodes<double>(6);
    const auto mat = random_material(g, rng, false);
    for (double eps : {1.0, 1e-2, 1e-5}) {
        auto s = random_state(g, q.size(), rng);
        const double dt = cfl_timestep(eps, g, mat);
        const SchemeParams<double> p{eps, relaxation_parameter(eps, g, mat), dt, 0.9};
        const double m0 = density(s.r1, s.r2, q).sum();
        for (int k = 0; k < 20; ++k) {
            s = step(s, q, mat, SourceTerm<double>{}, p);
            CHECK(std::abs(density(s.r1, s.r2, q).sum() - m0) < 1e-12 * (1 + std::abs(m0)));
        }
    }
}

TEST_CASE("a state constant in y reduces to the 1D scheme") {
    const int n = 20;
    const auto g = GridGeometry<double>::square(n, 0.0, 1.0);
    const auto q = gauss_nodes<double>(1);
    const double xi = q.xi[0];
    const double ss = 1.3;
    const auto mat = MaterialField<double>::uniform(g, ss, 0.0);
    std::mt19937 rng(53);
    std::uniform_real_distribution<double> u(-1, 1);

    Scheme1DState<double> s1;
    s1.r = Eigen::ArrayXd::NullaryExpr(n, [&] { return u(rng); });
    s1.j = Eigen::ArrayXd::NullaryExpr(n, [&] { return u(rng); });
    auto s2 = ParityState<double>::zeros(g, 1);
    for (int row = 0; row < n; ++row) {
        for (int m = 0; m < n; ++m) {
            s2.r1[0].vertex(row, m) = s2.r2[0].vertex(row, m) = s1.r[m];
            s2.j1[0].hface(row, (m + n - 1) % n) = s2.j2[0].hface(row, (m + n - 1) % n) = s1.j[m];
        }
    }
    const double eps = 0.3, dt = 2e-3, phi = 2.0;
    GrowthParams<double> p1;
    p1.epsilon = eps;
    p1.sigma_s = ss;
    p1.dt = dt;
    p1.h = g.dx() / xi;
    p1.phi = phi;
    const SchemeParams<double> p2{eps, phi, dt, 0.9};
    for (int k = 0; k < 10; ++k) {
        s1 = scheme_1d_step(s1, p1);
        s2 = step(s2, q, mat, SourceTerm<double>{}, p2);
    }
    for (int row : {0, 7}) {
        for (int m = 0; m < n; ++m) {
            CHECK(std::abs(s2.r2[0].vertex(row, m) - s1.r[m]) < 1e-13);
            CHECK(std::abs(s2.r1[0].vertex(row, m) - s1.r[m]) < 1e-13);
            CHECK(std::abs(s2.j2[0].hface(row, (m + n - 1) % n) - s1.j[m]) < 1e-13);
        }
    }
}

TEST_CASE("mirror symmetry in y swaps the parities") {
    const auto g = GridGeometry<double>::square(16, -1.0, 2.0);
    const auto q = gauss_nodes<double>(3);
    const auto mat = MaterialField<double>::uniform(g, 1.0, 0.0);
    auto s = ParityState<double>::zeros(g, q.size());
    auto bump = [](double x, double y) {
        return std::exp(std::sin(std::numbers::pi * x) + 0.5 * std::cos(std::numbers::pi * (y - 0.3)));
    };
    auto mirrored = [&](double x, double y) { return bump(x, -y); };
    for (std::size_t d = 0; d < 3; ++d) {
        s.r1[d] = sample_on_R<double>(bump, g);
        s.r2[d] = sample_on_R<double>(mirrored, g);
    }
    const SchemeParams<double> p{0.5, 0.5, 2e-3, 0.9};
    for (int k = 0; k < 15; ++k) s = step(s, q, mat, SourceTerm<double>{}, p);
    // y -> -y maps vertex row j to row (n - j) % n
    const Index n = g.ny;
    for (std::size_t d = 0; d < 3; ++d) {
        for (Index j = 0; j < n; ++j) {
            for (Index i = 0; i < n; ++i) {
                CHECK(std::abs(s.r1[d].vertex(j, i) - s.r2[d].vertex((n - j) % n, i)) < 1e-13);
                CHECK(std::abs(s.r1[d].center(j, i) - s.r2[d].center(n - 1 - j, i)) < 1e-13);
            }
        }
    }
}

TEST_CASE("run with t_final = 0 returns the initial density") {
    const auto sc = gauss(1.0);
    const auto g = sc.grid(16);
    const auto q = gauss_nodes<double>(4);
    RunOptions<double> opt;
    opt.t_final = 0;
    const auto res = run(initial_state(sc, g, q), q, material(sc, g), SourceTerm<double>{}, opt);
    CHECK(res.steps == 0);
    CHECK(res.diagnostics.size() == 1);
    CHECK((res.rho - sample_on_R<double>([](double x, double y) { return gauss_bump(x, y, 1e-2); }, g)).max_abs() <
          1e-13);
}

TEST_CASE("run lands exactly on snapshot and final times") {
    const auto sc = gauss(1.0);
    const auto g = sc.grid(16);
    const auto q = gauss_nodes<double>(4);
    RunOptions<double> opt;
    opt.t_final = 0.05;
    opt.snapshot_times = {0.013, 0.0};
    std::vector<double> seen;
    opt.on_snapshot = [&](double t, const ParityState<double>&, const R&) { seen.push_back(t); };
    const auto res = run(initial_state(sc, g, q), q, material(sc, g), SourceTerm<double>{}, opt);
    REQUIRE(seen.size() == 2);
    CHECK(seen[0] == 0.0);
    CHECK(seen[1] == 0.013);
    CHECK(res.state.t == 0.05);
    bool hit = false;
    for (const auto& d : res.diagnostics) hit = hit || d.t == 0.013;
    CHECK(hit);
}

TEST_CASE("run reports blow-up with the step index") {
    const auto sc = gauss(1.0);
    const auto g = sc.grid(16);
    const auto q = gauss_nodes<double>(2);
    RunOptions<double> opt;
    opt.t_final = 10;
    opt.dt = 0.5;
    opt.phi = 1.0;
    try {
        run(initial_state(sc, g, q), q, material(sc, g), SourceTerm<double>{}, opt);
        FAIL("expected NumericOverflow");
    } catch (const NumericOverflow& e) {
        CHECK(e.step() > 0);
        CHECK(e.time() > 0);
    }
}

TEST_CASE("reconstruction of f in each quadrant") {
    const auto g = GridGeometry<double>::square(4, 0.0, 1.0);
    auto s = ParityState<double>::zeros(g, 1);
    s.r1[0] = R::constant(g, 1.0);
    s.r2[0] = R::constant(g, 3.0);
    s.j1[0] = J::constant(g, 2.0);
    s.j2[0] = J::constant(g, -4.0);
    const double eps = 0.25;
    CHECK(reconstruct_f(s, Quadrant::pp, eps)[0].max_coeff() == doctest::Approx(2.0));
    CHECK(reconstruct_f(s, Quadrant::mm, eps)[0].max_coeff() == doctest::Approx(4.0));
    CHECK(reconstruct_f(s, Quadrant::pm, eps)[0].max_coeff() == doctest::Approx(1.5));
    CHECK(reconstruct_f(s, Quadrant::mp, eps)[0].max_coeff() == doctest::Approx(0.5));
    const auto f = reconstruct_f(s, Quadrant::pp, eps)[0];
    CHECK(f.min_coeff() == doctest::Approx(f.max_coeff()));
}

TEST_CASE("reconstruction round-trips the parity definition") {
    const auto sc = gauss(0.5);
    const auto g = sc.grid(32);
    const auto q = gauss_nodes<double>(2);
    auto sc2 = sc;
    sc2.initial_f = [](double x, double y, double xi, double eta) {
        return (1 + 0.3 * xi + 0.1 * eta + 0.2 * xi * eta) * (2 + std::sin(std::numbers::pi * x) * std::cos(std::numbers::pi * y));
    };
    const auto s = initial_state(sc2, g, q);
    const auto f = reconstruct_f(s, Quadrant::pm, sc2.epsilon);
    for (Eigen::Index d = 0; d < q.size(); ++d) {
        const auto exact = sample_on_R<double>(
            [&](double x, double y) { return sc2.initial_f(x, y, q.xi[d], -q.eta[d]); }, g);
        CHECK((f[static_cast<std::size_t>(d)] - exact).max_abs() < 1e-2);
    }
}
