#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hgd/pfaffian.hpp"
#include "hgd/vonmises.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace hgd;
using hgd::testing::random_annulus_point;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SufficientStats zero_stats() { return {0.0, 0.0, 1}; }

// Central finite differences of the quadrature oracle.
Vector oracle_gradient(const Vector& x, const SufficientStats& stats) {
    Vector g(2);
    const double h = 1e-5 * std::max(1.0, x.norm());
    for (int i = 0; i < 2; ++i) {
        Vector xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        g(i) = (vm_objective_oracle({xp(0), xp(1)}, stats) -
                vm_objective_oracle({xm(0), xm(1)}, stats)) /
               (2.0 * h);
    }
    return g;
}

Matrix oracle_hessian(const Vector& x, const SufficientStats& stats) {
    Matrix h(2, 2);
    const double dh = 1e-4 * std::max(1.0, x.norm());
    auto L = [&](double a, double b) { return vm_objective_oracle({a, b}, stats); };
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            Vector xpp = x, xpm = x, xmp = x, xmm = x;
            xpp(i) += dh; xpp(j) += dh;
            xpm(i) += dh; xpm(j) -= dh;
            xmp(i) -= dh; xmp(j) += dh;
            xmm(i) -= dh; xmm(j) -= dh;
            h(i, j) = (L(xpp(0), xpp(1)) - L(xpm(0), xpm(1)) - L(xmp(0), xmp(1)) +
                       L(xmm(0), xmm(1))) /
                      (4.0 * dh * dh);
        }
    }
    return h;
}

}  // namespace

TEST_CASE("propagate: zero-length path returns the state unchanged") {
    const SufficientStats stats{0.3, 0.2, 10};
    const PfaffianSystem sys = vm_pfaffian_system(stats);
    const StateVector s = vm_initial_state({1.5, 0.5}, stats);
    const StateVector out = propagate(sys, s, s.point, IntegratorConfig{});
    CHECK(out.F == s.F);
    CHECK(out.point == s.point);
}

TEST_CASE("propagate: von Mises segment matches the Bessel series oracle") {
    const SufficientStats stats = zero_stats();
    const PfaffianSystem sys = vm_pfaffian_system(stats);

    StateVector s;
    s.point = Vector(2);
    s.point << 1.0, 0.0;
    s.F = Vector(2);
    s.F << kTwoPi * bessel_i0(1.0), kTwoPi * bessel_i1(1.0);

    Vector target(2);
    target << 2.0, 0.0;
    const StateVector out = propagate(sys, s, target, IntegratorConfig{});
    CHECK(out.F(0) == doctest::Approx(kTwoPi * bessel_i0(2.0)).epsilon(1e-8));
    CHECK(out.F(1) == doctest::Approx(kTwoPi * bessel_i1(2.0)).epsilon(1e-8));
}

TEST_CASE("propagate: closed square loop returns to the initial F") {
    const SufficientStats stats{0.4, -0.1, 10};
    const PfaffianSystem sys = vm_pfaffian_system(stats);
    const StateVector start = vm_initial_state({1.0, 0.0}, stats);

    StateVector s = start;
    const double corners[4][2] = {{2.0, 0.0}, {2.0, 1.0}, {1.0, 1.0}, {1.0, 0.0}};
    for (const auto& c : corners) {
        Vector t(2);
        t << c[0], c[1];
        s = propagate(sys, s, t, IntegratorConfig{});
    }
    CHECK(s.F(0) == doctest::Approx(start.F(0)).epsilon(1e-8));
    CHECK(s.F(1) == doctest::Approx(start.F(1)).epsilon(1e-8));
}

TEST_CASE("propagate: there-and-back consistency on random segments") {
    const SufficientStats stats{0.2, 0.5, 10};
    const PfaffianSystem sys = vm_pfaffian_system(stats);
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const Vector a = random_annulus_point(rng, 0.5, 8.0);
        const Vector b = random_annulus_point(rng, 0.5, 8.0);
        const StateVector sa = vm_initial_state({a(0), a(1)}, stats);
        StateVector s;
        try {
            s = propagate(sys, sa, b, IntegratorConfig{});
            s = propagate(sys, s, a, IntegratorConfig{});
        } catch (const SingularPath&) {
            continue;  // segment grazed the origin; reroute is the caller's job
        }
        CHECK(s.F(0) == doctest::Approx(sa.F(0)).epsilon(1e-8));
        CHECK(s.F(1) == doctest::Approx(sa.F(1)).epsilon(1e-8));
    }
}

TEST_CASE("propagate: RK4 error drops ~16x when substeps double") {
    const SufficientStats stats = zero_stats();
    const PfaffianSystem sys = vm_pfaffian_system(stats);

    StateVector s;
    s.point = Vector(2);
    s.point << 0.6, 0.2;
    s.F = Vector(2);
    const double k0 = s.point.norm();
    s.F << kTwoPi * bessel_i0(k0), kTwoPi * bessel_i1(k0);

    Vector target(2);
    target << 5.0, 4.0;
    const double exact = kTwoPi * bessel_i0(target.norm());

    auto err_with = [&](int steps) {
        IntegratorConfig cfg;
        cfg.substeps_per_unit = 1;
        cfg.min_substeps = steps;
        return std::abs(propagate(sys, s, target, cfg).F(0) - exact);
    };

    const double ratio = err_with(32) / err_with(64);
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("propagate: refuses paths through the singular clearance") {
    const SufficientStats stats = zero_stats();
    const PfaffianSystem sys = vm_pfaffian_system(stats);
    const StateVector s = vm_initial_state({-1.0, 0.0}, stats);
    Vector target(2);
    target << 1.0, 0.0;  // straight through the origin
    CHECK_THROWS_AS(propagate(sys, s, target, IntegratorConfig{}), SingularPath);
}

TEST_CASE("gradient: symmetric data gives a symmetric gradient on the diagonal") {
    const SufficientStats stats{0.4, 0.4, 10};
    const PfaffianSystem sys = vm_pfaffian_system(stats);
    const StateVector s = vm_initial_state({1.7, 1.7}, stats);
    const Vector g = gradient(sys, s);
    CHECK(g(0) == doctest::Approx(g(1)).epsilon(1e-12));
}

TEST_CASE("gradient: matches finite differences of the quadrature oracle") {
    const SufficientStats stats{0.3, 0.2, 10};
    const PfaffianSystem sys = vm_pfaffian_system(stats);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x = random_annulus_point(rng, 0.5, 8.0);
        const StateVector s = vm_initial_state({x(0), x(1)}, stats);
        const Vector g = gradient(sys, s);
        const Vector g_fd = oracle_gradient(x, stats);
        for (int i = 0; i < 2; ++i) {
            CHECK(g(i) == doctest::Approx(g_fd(i)).epsilon(1e-5));
        }
    }
}

TEST_CASE("gradient and hessian are linear in F") {
    const SufficientStats stats{0.1, -0.2, 10};
    const PfaffianSystem sys = vm_pfaffian_system(stats);
    Vector x(2);
    x << 2.0, 1.0;

    StateVector zero{x, Vector::Zero(2)};
    CHECK(gradient(sys, zero).norm() == 0.0);
    CHECK(hessian(sys, zero).norm() == 0.0);

    StateVector a{x, Vector(2)}, b{x, Vector(2)};
    a.F << 1.3, -0.4;
    b.F << 0.2, 2.5;
    StateVector combo{x, (2.0 * a.F + 3.0 * b.F).eval()};
    const Vector g_combo = gradient(sys, combo);
    const Vector g_lin = 2.0 * gradient(sys, a) + 3.0 * gradient(sys, b);
    CHECK((g_combo - g_lin).norm() == doctest::Approx(0.0).epsilon(1e-12));
    const Matrix h_combo = hessian(sys, combo);
    const Matrix h_lin = 2.0 * hessian(sys, a) + 3.0 * hessian(sys, b);
    CHECK((h_combo - h_lin).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("hessian: matches second differences of the oracle and is symmetric") {
    const SufficientStats stats{0.3, 0.2, 10};
    const PfaffianSystem sys = vm_pfaffian_system(stats);
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const Vector x = random_annulus_point(rng, 0.5, 8.0);
        const StateVector s = vm_initial_state({x(0), x(1)}, stats);
        const Matrix h = hessian(sys, s);
        CHECK(h(0, 1) == h(1, 0));  // exact, post-symmetrization
        const Matrix h_fd = oracle_hessian(x, stats);
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                CHECK(h(i, j) == doctest::Approx(h_fd(i, j)).epsilon(1e-4));
            }
        }
    }
}

TEST_CASE("hessian: diagonal symmetry for symmetric data") {
    const SufficientStats stats{0.4, 0.4, 10};
    const PfaffianSystem sys = vm_pfaffian_system(stats);
    const StateVector s = vm_initial_state({1.2, 1.2}, stats);
    const Matrix h = hessian(sys, s);
    CHECK(h(0, 0) == doctest::Approx(h(1, 1)).epsilon(1e-10));
}

TEST_CASE("hessian: finite-difference matrix derivatives agree with analytic ones") {
    const SufficientStats stats{0.3, -0.1, 10};
    PfaffianSystem sys = vm_pfaffian_system(stats);
    const StateVector s = vm_initial_state({1.4, -2.2}, stats);
    const Matrix h_analytic = hessian(sys, s);
    sys.matrix_derivatives = nullptr;
    const Matrix h_fd = hessian(sys, s);
    CHECK((h_analytic - h_fd).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("check_integrability: von Mises system passes at random points") {
    const SufficientStats stats{0.25, 0.6, 10};
    const PfaffianSystem sys = vm_pfaffian_system(stats);
    std::mt19937_64 rng(17);
    std::vector<Vector> pts;
    for (int i = 0; i < 100; ++i) {
        pts.push_back(random_annulus_point(rng, 0.5, 8.0));
    }
    CHECK(check_integrability(sys, pts, 1e-6));
}

TEST_CASE("check_integrability: non-commuting constant matrices fail") {
    PfaffianSystem sys;
    sys.dim = 2;
    sys.rank = 2;
    sys.matrices = [](const Vector&) {
        Matrix p1(2, 2), p2(2, 2);
        p1 << 0, 1, 1, 0;
        p2 << 0, 1, 0, 0;
        return std::vector<Matrix>{p1, p2};
    };
    sys.singular = [](const Vector&) { return false; };
    Vector x = Vector::Zero(2);
    CHECK_FALSE(check_integrability(sys, {x}, 1e-6));
}

TEST_CASE("check_integrability: commuting constant matrices pass") {
    PfaffianSystem sys;
    sys.dim = 2;
    sys.rank = 2;
    sys.matrices = [](const Vector&) {
        Matrix p1(2, 2);
        p1 << 0, 1, 1, 0;
        return std::vector<Matrix>{p1, Matrix::Zero(2, 2)};
    };
    sys.singular = [](const Vector&) { return false; };
    Vector x = Vector::Zero(2);
    CHECK(check_integrability(sys, {x}, 1e-6));
}

TEST_CASE("check_integrability: one variable is vacuously integrable") {
    const PfaffianSystem sys = hgd::testing::quadratic_1d();
    Vector x(1);
    x << 3.0;
    CHECK(check_integrability(sys, {x}, 1e-6));
}

TEST_CASE("gradient: throws on the singular locus") {
    const SufficientStats stats = zero_stats();
    const PfaffianSystem sys = vm_pfaffian_system(stats);
    StateVector s{Vector::Zero(2), Vector::Zero(2)};
    CHECK_THROWS_AS(gradient(sys, s), SingularPoint);
}
