#include "frontforge/errors.hpp"
#include "frontforge/generators.hpp"
#include "frontforge/integrability.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace frontforge;

namespace {

Vec pt(double u, double v) {
    Vec p(2);
    p << u, v;
    return p;
}

FrontBundleField soliton_field(double a = 1.0, double b = 1.0) {
    return chebyshev_bundle(ThetaField::from_exact(DomainGrid::plane(-2, 2, 21, -2, 2, 21), soliton_jet(a, b)));
}

FrontBundleField flat_field() {
    Box b{Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)};
    auto s = [](const Vec&) {
        return BundleSample{Mat::Identity(2, 2), Mat::Zero(2, 2), {Mat::Zero(2, 2), Mat::Zero(2, 2)}};
    };
    return FrontBundleField(2, b, s);
}

}  // namespace

TEST_CASE("Chebyshev bundles are integrable exactly when theta_uv = (1-c) sin theta") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    struct Case {
        double c;
        FrontBundleField field;
    };
    const Case cases[] = {
        {0.0, soliton_field()},
        {-1.0, soliton_field(2.0, 1.0)},
        {1.0, chebyshev_bundle(ThetaField::from_exact(DomainGrid::plane(-2, 2, 9, -2, 2, 9), linear_theta(0.4, 0.7, -0.3)))},
    };
    for (const auto& cs : cases) {
        for (int n = 0; n < 200; ++n) {
            const Vec p = pt(U(rng), U(rng));
            const BundleJet j = cs.field.jet(p);
            CHECK(codazzi_residual(j, Homomorphism::phi) < 1e-12);
            CHECK(codazzi_residual(j, Homomorphism::psi) < 1e-12);
            CHECK(gauss_residual(j, cs.c) < 1e-10);
            CHECK(two_d_integrability_residual(j, cs.c) < 1e-10);
            CHECK(std::abs(gauss_residual(j, cs.c) - two_d_integrability_residual(j, cs.c)) < 1e-14);
        }
    }
}

TEST_CASE("wrong curvature constant shows up linearly") {
    const FrontBundleField f = soliton_field();
    for (double u : {-1.3, -0.2, 0.5, 1.1}) {
        const Vec p = pt(u, 0.3);
        const double s = std::sin(exact_soliton(p(0), p(1)));
        CHECK(gauss_residual(f, 0.5, p) == doctest::Approx(0.5 * std::abs(s)).epsilon(1e-10));
    }
}

TEST_CASE("scaled connection breaks Codazzi and the 2-D identity where sin theta is nonzero") {
    const FrontBundleField f = scale_connection(soliton_field(), 1.1);
    const Vec p = pt(0.4, 0.1);
    CHECK(codazzi_residual(f, p, Homomorphism::phi) > 1e-3);
    CHECK(two_d_integrability_residual(f, 0.0, p) > 1e-3);
}

TEST_CASE("flat field has zero residuals") {
    const FrontBundleField f = flat_field();
    const Vec p = pt(0.1, 0.2);
    CHECK(codazzi_residual(f, p, Homomorphism::phi) == 0.0);
    CHECK(gauss_residual(f, 0.0, p) == 0.0);
    CHECK(two_d_integrability_residual(f, 0.0, p) == 0.0);
    CHECK(gauss_curvature_identity_residual(f, p, 1e-8) < 1e-12);
}

TEST_CASE("d omega equals K times the signed area density") {
    const FrontBundleField cheb = soliton_field();
    for (double u : {-1.0, 0.3, 0.9}) {
        const Vec p = pt(u, 0.25);
        CHECK(brioschi_curvature(cheb, p) == doctest::Approx(-1.0).epsilon(1e-6));
        CHECK(gauss_curvature_identity_residual(cheb, p, 1e-8) < 1e-6);
    }
    const Box box{Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)};
    const FrontBundleField cl =
        curvatureline_bundle(ThetaField::from_exact(DomainGrid::plane(-1, 1, 9, -1, 1, 9), sinh_gordon_wave(1.5, 0.4, box)));
    for (double u : {-0.8, 0.5}) {
        const Vec p = pt(u, 0.6);
        CHECK(brioschi_curvature(cl, p) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(gauss_curvature_identity_residual(cl, p, 1e-8) < 1e-6);
    }
    CHECK_THROWS_AS(gauss_curvature_identity_residual(cheb, pt(0.3, -0.3), 1e-8), RegularityError);
}

TEST_CASE("finite-difference residuals converge at second order") {
    const FrontBundleField f = soliton_field();
    const Vec p = pt(0.35, -0.1);
    double prev = 0.0;
    for (double h : {0.04, 0.02, 0.01}) {
        const BundleJet j = finite_difference_jet(f.sample_fn(), f.domain(), p, h);
        const double r = two_d_integrability_residual(j, 0.0);
        if (prev > 0.0) CHECK(prev / r >= 3.5);
        prev = r;
    }
}

TEST_CASE("grid report collects maxima") {
    const ResidualReport r = integrability_report(soliton_field(), 0.0, DomainGrid::plane(-2, 2, 41, -2, 2, 41));
    CHECK(r.analytic);
    CHECK(r.max_all() < 1e-10);
    CHECK(r.two_d.rows() == 41);
    const ResidualReport bad = integrability_report(soliton_field(), 0.5, DomainGrid::plane(-2, 2, 41, -2, 2, 41));
    CHECK(bad.max_gauss > 0.4);
}
