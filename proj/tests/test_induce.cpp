#include "frontforge/errors.hpp"
#include "frontforge/forms.hpp"
#include "frontforge/induce.hpp"
#include "frontforge/integrability.hpp"
#include "frontforge/realizer.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace frontforge;

namespace {

Vec random_point(const Box& b, std::mt19937& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Vec p(b.dim());
    for (int k = 0; k < b.dim(); ++k) p(k) = b.lo(k) + (b.hi(k) - b.lo(k)) * U(rng);
    return p;
}

Vec pt(double u, double v) {
    Vec p(2);
    p << u, v;
    return p;
}

}  // namespace

TEST_CASE("fixture normals are unit normals") {
    std::mt19937 rng(42);
    for (const char* name : {"s2xr:a=1", "s2xr:a=5", "pseudosphere", "cuspidal:beta=0.5", "sphere", "plane"}) {
        const ParametrizedFrontal F = frontal_fixture_by_name(name);
        for (int n = 0; n < 200; ++n) CHECK(frontal_defect(F, random_point(F.domain, rng)) < 1e-10);
    }
}

TEST_CASE("fixture names") {
    CHECK(frontal_fixture_by_name("s2xr:a=2").name == "s2xr:a=2");
    CHECK(frontal_fixture_by_name("s2xr").m == 3);
    CHECK_THROWS_AS(frontal_fixture_by_name("torus"), InputError);
    CHECK_THROWS_AS(frontal_fixture_by_name("s2xr:a=x"), InputError);
    CHECK_THROWS_AS(frontal_fixture_by_name("s2xr:b=1"), InputError);
    CHECK_THROWS_AS(frontal_fixture_by_name("s2xr:a=-1"), ParameterError);
}

TEST_CASE("induced gauge is an oriented orthonormal frame of the normal complement") {
    std::mt19937 rng(7);
    for (const char* name : {"s2xr:a=2", "pseudosphere", "sphere"}) {
        const ParametrizedFrontal F = frontal_fixture_by_name(name);
        for (int n = 0; n < 50; ++n) {
            const Vec p = random_point(F.domain, rng);
            const Mat E = induced_gauge(F, p);
            CHECK((E.transpose() * E - Mat::Identity(F.m, F.m)).cwiseAbs().maxCoeff() < 1e-13);
            CHECK((E.transpose() * F.normal(p)).cwiseAbs().maxCoeff() < 1e-13);
            Mat full(E.rows(), E.cols() + 1);
            full << E, F.normal(p);
            CHECK(full.determinant() > 0.0);
        }
    }
}

TEST_CASE("sphere and plane bundles") {
    const FrontBundleField s = induce_bundle(fixture_unit_sphere());
    const FrontBundleField pl = induce_bundle(fixture_plane());
    std::mt19937 rng(3);
    for (int n = 0; n < 100; ++n) {
        const Vec p = random_point(s.domain(), rng);
        const FundamentalForms f = fundamental_forms(s, p);
        // ν = f makes ψ = φ, so II = −φᵀψ = −I.
        CHECK((f.II + f.I).cwiseAbs().maxCoeff() < 1e-13);
        CHECK(plane_curvature(f.I, f.II, pt(1, 0), pt(0, 1)) == doctest::Approx(1.0).epsilon(1e-12));
        const Vec q = random_point(pl.domain(), rng);
        CHECK(pl.sample(q).psi.norm() == 0.0);
        CHECK(fundamental_forms(pl, q).II.norm() == 0.0);
    }
}

TEST_CASE("induced bundles satisfy the Codazzi and Gauss equations") {
    std::mt19937 rng(42);
    for (const char* name : {"pseudosphere", "s2xr:a=1", "s2xr:a=2", "cuspidal:beta=0.5", "sphere"}) {
        const FrontBundleField b = induce_bundle(frontal_fixture_by_name(name));
        double gauss = 0.0, codazzi = 0.0, compat = 0.0, margin = 1.0;
        for (int n = 0; n < 1000; ++n) {
            const Vec p = random_point(b.domain(), rng);
            const BundleJet j = b.jet(p);
            gauss = std::max(gauss, gauss_residual(j, 0.0));
            codazzi = std::max({codazzi, codazzi_residual(j, Homomorphism::phi), codazzi_residual(j, Homomorphism::psi)});
            compat = std::max(compat, compatibility_residual(b, p));
            margin = std::min(margin, front_condition_margin(j.value));
        }
        INFO(name);
        CHECK(gauss < 1e-6);
        CHECK(codazzi < 1e-6);
        CHECK(compat < 1e-8);
        CHECK(margin > 0.0);
    }
}

TEST_CASE("tractroid has extrinsic curvature -1 and its cuspidal edge at u = 0") {
    const FrontBundleField b = induce_bundle(fixture_pseudosphere());
    std::mt19937 rng(11);
    for (int n = 0; n < 200; ++n) {
        const Vec p = random_point(b.domain(), rng);
        if (std::abs(p(0)) < 1e-3) continue;
        const FundamentalForms f = fundamental_forms(b, p);
        CHECK(plane_curvature(f.I, f.II, pt(1, 0), pt(0, 1)) == doctest::Approx(-1.0).epsilon(1e-8));
    }
    for (double v : {-3.0, -1.0, 0.0, 2.5}) CHECK(std::abs(phi_jacobian(b, pt(0.0, v))) < 1e-15);
    CHECK(std::abs(phi_jacobian(b, pt(0.5, 0.0))) > 0.1);
}

TEST_CASE("s2xr singular set and null direction") {
    const FrontBundleField b = induce_bundle(fixture_s2xr(1.0));
    Vec p(3);
    p << 1.2, 0.3, 0.0;
    CHECK(std::abs(phi_jacobian(b, p)) < 1e-15);
    Vec t(3);
    t << 0, 0, 1;
    CHECK((b.sample(p).phi * t).norm() < 1e-15);
    p(2) = 0.2;
    CHECK(std::abs(phi_jacobian(b, p)) > 1e-3);
}

TEST_CASE("finite-difference frontal matches the analytic one") {
    const ParametrizedFrontal A = fixture_pseudosphere();
    const ParametrizedFrontal F = frontal_from_maps(
        "tractroid-fd", A.model, 2, A.domain, [A](const Vec& p) { return A.position(p); },
        [A](const Vec& p) { return A.normal(p); });
    ParametrizedFrontal Fr = F;
    Fr.references = A.references;
    const FrontBundleField a = induce_bundle(A), f = induce_bundle(Fr);
    CHECK(f.provenance() == Provenance::grid_interpolated);
    std::mt19937 rng(5);
    for (int n = 0; n < 20; ++n) {
        const Vec p = random_point(A.domain, rng);
        const BundleJet ja = a.jet(p), jf = f.jet(p);
        CHECK((ja.value.phi - jf.value.phi).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((ja.partial[0].conn[1] - jf.partial[0].conn[1]).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("wrong normal is rejected") {
    ParametrizedFrontal F = fixture_pseudosphere();
    const ParametrizedFrontal good = F;
    F.jet = [good](const Vec& p) {
        FrontalJet j = good.jet(p);
        j.nu = Vec::Unit(3, 2);
        j.dnu.setZero();
        for (auto& m : j.ddnu) m.setZero();
        return j;
    };
    CHECK_THROWS_AS(induce_bundle(F), PreconditionError);
}

TEST_CASE("pivoted references avoid the normal") {
    const std::vector<Vec> r = gauge_references(fixture_plane());
    REQUIRE(r.size() == 2);
    CHECK(r[0] == Vec::Unit(3, 0));
    CHECK(r[1] == Vec::Unit(3, 1));
}

TEST_CASE("pseudosphere round trip") {
    const ParametrizedFrontal F = fixture_pseudosphere();
    const DomainGrid g = DomainGrid::plane(-1, 1, 201, -M_PI, M_PI, 201);
    const RealizedFront r = integrate_frame(induce_bundle(F), 0, g, Mat::Identity(3, 3));
    RealizedFront truth = r;
    for (int j = 0; j < 201; ++j)
        for (int i = 0; i < 201; ++i) {
            truth.positions.col(g.linear(i, j)) = F.position(g.node(i, j));
            truth.normals.col(g.linear(i, j)) = F.normal(g.node(i, j));
        }
    const IsometryFit fit = isometry_between(r, truth);
    MESSAGE("round trip residual " << fit.residual << ", holonomy " << r.holonomy_residual_max);
    CHECK(fit.residual < 1e-4);
    CHECK_FALSE(r.integrability_warning);
}
