#include "frontforge/errors.hpp"
#include "frontforge/generators.hpp"
#include "frontforge/integrability.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

using namespace frontforge;

namespace {

Vec pt(double u, double v) {
    Vec p(2);
    p << u, v;
    return p;
}

double soliton_error(int n) {
    const DomainGrid g = DomainGrid::plane(-2, 2, n, -2, 2, n);
    const ThetaField t = solve_sine_gordon_goursat(
        2.0, [](double u) { return exact_soliton(u, -2.0); }, [](double v) { return exact_soliton(-2.0, v); }, g);
    double err = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec p = g.node(i, j);
            err = std::max(err, std::abs(t.values()(i, j) - exact_soliton(p(0), p(1))));
        }
    return err;
}

}  // namespace

TEST_CASE("exact soliton values, limits and equation") {
    CHECK(exact_soliton(0, 0) == doctest::Approx(M_PI).epsilon(1e-15));
    CHECK(exact_soliton(-30, -10) < 1e-15);
    CHECK(exact_soliton(20, 20) == doctest::Approx(2 * M_PI).epsilon(1e-15));
    const double h = 1e-3;
    for (double w : {-1.5, -0.3, 0.0, 0.7, 1.9}) {
        const double u = 0.5 * w, v = 0.5 * w;
        auto mixed = [&](double s) {
            return (exact_soliton(u + s, v + s) - exact_soliton(u + s, v - s) - exact_soliton(u - s, v + s) +
                    exact_soliton(u - s, v - s)) /
                   (4 * s * s);
        };
        const double target = std::sin(exact_soliton(u, v));
        CHECK(std::abs(mixed(h) - target) < 1e-6);
        CHECK(std::abs((4 * mixed(h / 2) - mixed(h)) / 3 - target) < 1e-8);
        const ThetaJet j = soliton_jet()(u, v);
        CHECK(j.tuv == doctest::Approx(target).epsilon(1e-13));
    }
}

TEST_CASE("Goursat with c = 1 is additive") {
    const DomainGrid g = DomainGrid::plane(-1, 1, 51, 0, 2, 41);
    auto f0 = [](double u) { return std::sin(3 * u) + 1.0; };
    auto g0 = [](double v) { return std::sin(-3.0) + 1.0 + v * v; };
    const ThetaField t = solve_sine_gordon_goursat(1.0, f0, g0, g);
    double err = 0.0;
    for (int j = 0; j < 41; ++j)
        for (int i = 0; i < 51; ++i) {
            const Vec p = g.node(i, j);
            err = std::max(err, std::abs(t.values()(i, j) - (f0(p(0)) + g0(p(1)) - f0(-1.0))));
        }
    CHECK(err < 1e-12);
    CHECK(t.pde_residual() < 1e-12);
}

TEST_CASE("Goursat reproduces the soliton at second order") {
    const double e101 = soliton_error(101), e201 = soliton_error(201), e401 = soliton_error(401);
    CHECK(e101 / e201 >= 3.5);
    CHECK(e101 / e201 <= 4.5);
    CHECK(e201 / e401 >= 3.5);
    // Second order with error constant ≈ 1.3: 401 nodes over [-2,2]² land near 1.3e-4.
    CHECK(e401 < 1.5e-4);
}

TEST_CASE("Goursat rejects a corner mismatch") {
    const DomainGrid g = DomainGrid::plane(0, 1, 5, 0, 1, 5);
    CHECK_THROWS_AS(solve_sine_gordon_goursat(0.0, Vec::Zero(5), Vec::Ones(5), g), InputError);
}

TEST_CASE("sinh-Gordon with zero boundary is zero") {
    const ThetaField t = solve_sinh_gordon_dirichlet(DomainGrid::plane(-1, 1, 21, -1, 1, 21), [](double, double) { return 0.0; });
    CHECK(t.values().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sinh-Gordon manufactured solution") {
    // A cubic is differentiated exactly by the five-point Laplacian.
    auto tm = [](double u, double v) { return 0.3 + 0.5 * u * u - 0.2 * u * v + 0.1 * v * v * v; };
    auto lap = [](double, double v) { return 1.0 + 0.6 * v; };
    auto src = [&](double u, double v) { return lap(u, v) + 4.0 * std::sinh(tm(u, v)); };
    const DomainGrid g = DomainGrid::plane(-1, 1, 41, -1, 1, 41);
    const ThetaField t = solve_sinh_gordon_dirichlet(g, tm, src);
    double err = 0.0;
    for (int j = 0; j < 41; ++j)
        for (int i = 0; i < 41; ++i) {
            const Vec p = g.node(i, j);
            err = std::max(err, std::abs(t.values()(i, j) - tm(p(0), p(1))));
        }
    CHECK(err < 1e-6);
    CHECK(t.pde_residual() < 1e-8);
}

TEST_CASE("small boundary data follows the linearized equation") {
    const DomainGrid g = DomainGrid::plane(-1, 1, 31, -1, 1, 31);
    auto b = [](double u, double v) { return std::cos(u) + 0.5 * v; };
    const int n = 31, ni = n - 2;
    const double iu2 = 1.0 / (g.step(0) * g.step(0));
    // Linear oracle: Δ_h θ + 4θ = 0 with the same boundary.
    auto linear = [&](double eps) {
        std::vector<Eigen::Triplet<double>> trip;
        Vec rhs = Vec::Zero(ni * ni);
        auto idx = [&](int i, int j) { return (j - 1) * ni + (i - 1); };
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) {
                trip.emplace_back(idx(i, j), idx(i, j), -4 * iu2 + 4.0);
                const int di[4] = {-1, 1, 0, 0}, dj[4] = {0, 0, -1, 1};
                for (int k = 0; k < 4; ++k) {
                    const int a = i + di[k], c = j + dj[k];
                    if (a == 0 || c == 0 || a == n - 1 || c == n - 1) {
                        const Vec p = g.node(a, c);
                        rhs(idx(i, j)) -= iu2 * eps * b(p(0), p(1));
                    } else {
                        trip.emplace_back(idx(i, j), idx(a, c), iu2);
                    }
                }
            }
        Eigen::SparseMatrix<double> A(ni * ni, ni * ni);
        A.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
        return Vec(lu.solve(rhs));
    };
    double prev = 0.0;
    for (double eps : {0.02, 0.01}) {
        const ThetaField t = solve_sinh_gordon_dirichlet(g, [&](double u, double v) { return eps * b(u, v); });
        const Vec lin = linear(eps);
        double diff = 0.0;
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) diff = std::max(diff, std::abs(t.values()(i, j) - lin((j - 1) * ni + i - 1)));
        // The constant is large because 4 sits close to the first Dirichlet eigenvalue π²/2.
        CHECK(diff < 100 * eps * eps * eps);
        if (prev > 0) CHECK(prev / diff > 6.0);
        prev = diff;
    }
}

TEST_CASE("Newton failure carries the last iterate") {
    NewtonOptions opt;
    opt.max_iterations = 1;
    const DomainGrid g = DomainGrid::plane(-1, 1, 11, -1, 1, 11);
    try {
        solve_sinh_gordon_dirichlet(g, [](double u, double) { return u; }, {}, opt);
        FAIL("expected nonconvergence");
    } catch (const NonConvergence& e) {
        CHECK(e.last_iterate().rows() == 11);
    }
}

TEST_CASE("generated bundles carry the expected forms") {
    const ThetaField th = ThetaField::from_exact(DomainGrid::plane(-2, 2, 21, -2, 2, 21), soliton_jet());
    const FrontBundleField cheb = chebyshev_bundle(th);
    const Box box{Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)};
    const FrontBundleField cl =
        curvatureline_bundle(ThetaField::from_exact(DomainGrid::plane(-1, 1, 9, -1, 1, 9), sinh_gordon_wave(1.2, 0.0, box)));
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int n = 0; n < 200; ++n) {
        const Vec p = pt(U(rng), U(rng));
        const double t = exact_soliton(p(0), p(1));
        const FundamentalForms f = fundamental_forms(cheb, p);
        CHECK(f.I(0, 1) == doctest::Approx(std::cos(t)));
        CHECK(f.II(0, 1) == doctest::Approx(std::sin(t)));
        CHECK(f.III(0, 1) == doctest::Approx(-std::cos(t)));
        CHECK(phi_jacobian(cheb, p) == doctest::Approx(std::sin(t)));
        CHECK(front_condition_margin(cheb, p) == doctest::Approx(2.0));
        CHECK(compatibility_residual(cheb, p) < 1e-14);

        const double s = cl.sample(p).phi(0, 0);  // 2 cosh(θ/2)
        const double tc = 2.0 * std::acosh(s / 2.0);
        const FundamentalForms g = fundamental_forms(cl, p);
        CHECK(g.I(0, 0) == doctest::Approx(4 * std::pow(std::cosh(tc / 2), 2)));
        CHECK(std::abs(g.II(0, 0) - g.II(1, 1)) < 1e-12);
        CHECK(std::abs(g.I(0, 1)) < 1e-15);
        CHECK(std::abs(phi_jacobian(cl, p)) == doctest::Approx(2 * std::sinh(tc)));
        CHECK(front_condition_margin(cl, p) >= 4.0 - 1e-12);
        CHECK(two_d_integrability_residual(cl, 0.0, p) < 1e-8);
        CHECK(compatibility_residual(cl, p) < 1e-14);
    }
}

TEST_CASE("sinh-Gordon wave vanishes on lines and solves the equation") {
    const Box box{Vec::Constant(2, -2.0), Vec::Constant(2, 2.0)};
    const auto w = sinh_gordon_wave(1.0, 0.3, box);
    CHECK(std::abs(w(0.0, 0.0).t) < 1e-15);
    for (double u : {-1.9, -0.4, 0.8, 1.7}) {
        const ThetaJet j = w(u, 0.5);
        CHECK(std::abs(j.tuu + j.tvv + 4 * std::sinh(j.t)) < 1e-8);
        const double h = 1e-4;
        CHECK((w(u + h, 0.5).t - w(u - h, 0.5).t) / (2 * h) == doctest::Approx(j.tu).epsilon(1e-7));
    }
}

TEST_CASE("reflection flips the sign of the mixed derivative") {
    const ThetaField th = ThetaField::from_exact(DomainGrid::plane(-2, 2, 21, -1, 1, 11), soliton_jet());
    const ThetaField r = reflect_u(th);
    const ThetaJet a = th.evaluate(0.3, 0.2), b = r.evaluate(-0.3, 0.2);
    CHECK(a.t == b.t);
    CHECK(a.tuv == -b.tuv);
    CHECK(b.tuv == doctest::Approx(-std::sin(b.t)));
    const ThetaField g(th.grid(), th.values(), ThetaSource::goursat, 0.0);
    const ThetaField rg = reflect_u(g);
    CHECK(rg.values()(0, 3) == g.values()(20, 3));
}

TEST_CASE("Hermite interpolation of tabulated theta") {
    const DomainGrid g = DomainGrid::plane(-1, 1, 81, -1, 1, 81);
    const ThetaField exact = ThetaField::from_exact(g, soliton_jet(0.7, 0.5));
    const ThetaField tab(g, exact.values(), ThetaSource::goursat, 0.0);
    const ThetaJet a = tab.evaluate(0.1234, -0.377), b = exact.evaluate(0.1234, -0.377);
    CHECK(std::abs(a.t - b.t) < 1e-8);
    CHECK(std::abs(a.tu - b.tu) < 1e-6);
    CHECK(std::abs(a.tuv - b.tuv) < 1e-3);
    CHECK(tab.evaluate(g.coord(0, 7), g.coord(1, 30)).t == doctest::Approx(exact.values()(7, 30)).epsilon(1e-15));
}

TEST_CASE("theta CSV round trip is bit exact") {
    const DomainGrid g = DomainGrid::plane(-1, 1.5, 7, 0, 2, 5);
    const ThetaField t = ThetaField::from_exact(g, soliton_jet(0.3, 1.7));
    const std::string path = "theta_roundtrip.csv";
    write_theta_csv(path, t);
    const ThetaField r = read_theta_csv(path);
    CHECK(r.values() == t.values());
    CHECK(r.grid().upper(0) == 1.5);
    CHECK(r.source() == ThetaSource::exact);
    std::remove(path.c_str());
}
