#include "frontforge/errors.hpp"
#include "frontforge/fixtures.hpp"
#include "frontforge/generators.hpp"
#include "frontforge/realizer.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace frontforge;

namespace {

Box square(double a, double b) { return Box{Vec::Constant(2, a), Vec::Constant(2, b)}; }

Vec pt(double u, double v) {
    Vec p(2);
    p << u, v;
    return p;
}

Mat rotation3(double a, double b) {
    Mat x = Mat::Identity(3, 3), z = Mat::Identity(3, 3);
    x(1, 1) = std::cos(a), x(1, 2) = -std::sin(a), x(2, 1) = std::sin(a), x(2, 2) = std::cos(a);
    z(0, 0) = std::cos(b), z(0, 1) = -std::sin(b), z(1, 0) = std::sin(b), z(1, 1) = std::cos(b);
    return z * x;
}

BundleSample random_sample(std::mt19937& rng) {
    std::normal_distribution<double> N;
    BundleSample s;
    s.phi = Mat::NullaryExpr(2, 2, [&] { return N(rng); });
    s.psi = Mat::NullaryExpr(2, 2, [&] { return N(rng); });
    for (int k = 0; k < 2; ++k) {
        const double w = N(rng);
        Mat a(2, 2);
        a << 0, w, -w, 0;
        s.conn.push_back(a);
    }
    return s;
}

}  // namespace

TEST_CASE("structure-algebra generators") {
    std::mt19937 rng(42);
    BundleSample zero{Mat::Zero(2, 2), Mat::Zero(2, 2), {Mat::Zero(2, 2), Mat::Zero(2, 2)}};
    CHECK(build_omega_tilde(zero, 0, pt(1, 0)).norm() == 0.0);
    const Mat J = AmbientModel::for_curvature(-1, 2).J();
    for (int n = 0; n < 100; ++n) {
        const BundleSample s = random_sample(rng);
        const Vec d = pt(0.3, -1.2);
        const Mat e = build_omega_tilde(s, 0, d);
        CHECK((e + e.transpose()).norm() < 1e-15);
        const Mat sp = build_omega_tilde(s, 1, d);
        CHECK((sp + sp.transpose()).norm() < 1e-15);
        const Mat hy = build_omega_tilde(s, -1, d);
        CHECK((hy.transpose() * J + J * hy).norm() < 1e-15);
    }
    CHECK_THROWS_AS(build_omega_tilde(zero, 2, pt(1, 0)), ParameterError);
}

TEST_CASE("projection to the structure group") {
    const AmbientModel euc = AmbientModel::for_curvature(0, 2), hyp = AmbientModel::for_curvature(-1, 2);
    const Mat R = rotation3(0.4, 1.1);
    CHECK((project_structure_group(R, euc) - R).norm() < 1e-14);
    Mat S(3, 3);
    S << 1, 2, 3, 2, -1, 0.5, 3, 0.5, 2;
    const Mat P = project_structure_group(Mat::Identity(3, 3) + 1e-6 * S, euc);
    CHECK(group_violation(P, euc) < 1e-14);
    CHECK(P.determinant() == doctest::Approx(1.0));
    CHECK((P - Mat::Identity(3, 3) - 1e-6 * S).cwiseAbs().maxCoeff() < 2e-6 * S.cwiseAbs().maxCoeff());

    Mat B = Mat::Identity(4, 4);
    B(0, 0) = B(1, 1) = std::cosh(0.7);
    B(0, 1) = B(1, 0) = std::sinh(0.7);
    Mat noisy = B;
    noisy(2, 3) += 1e-5;
    noisy(0, 2) -= 2e-5;
    const Mat L = project_structure_group(noisy, hyp);
    CHECK(group_violation(L, hyp) < 1e-14);
    CHECK((L - B).cwiseAbs().maxCoeff() < 1e-4);
    CHECK_THROWS_AS(project_structure_group(2.0 * R, euc), DivergenceError);
}

TEST_CASE("flat field realizes the plane exactly") {
    const DomainGrid g = DomainGrid::plane(-1, 1, 21, -1, 1, 21);
    const RealizedFront r = integrate_frame(flat_field(square(-1, 1)), 0, g, Mat::Identity(3, 3));
    for (int j = 0; j < 21; ++j)
        for (int i = 0; i < 21; ++i) {
            const Vec p = g.node(i, j);
            CHECK((r.position(i, j) - Vec((Vec(3) << p(0), p(1), 0.0).finished())).norm() < 1e-14);
            CHECK((r.normal(i, j) - Vec((Vec(3) << 0, 0, 1).finished())).norm() < 1e-15);
        }
    CHECK(r.holonomy_residual_max < 1e-14);
    CHECK_FALSE(r.integrability_warning);
}

TEST_CASE("pseudospherical realization from the soliton") {
    const DomainGrid g = DomainGrid::plane(-2, 2, 201, -2, 2, 201);
    const FrontBundleField f = soliton_chebyshev_field(square(-2, 2));
    const RealizedFront r = integrate_frame(f, 0, g, Mat::Identity(3, 3));
    CHECK_FALSE(r.integrability_warning);
    CHECK(r.max_group_violation < 1e-10);
    const Mat K = realized_gaussian_curvature(r);
    const RealizedForms rf = realized_forms(r);
    double kerr = 0.0, ierr = 0.0, iierr = 0.0, iiierr = 0.0;
    for (int j = 0; j < 201; ++j)
        for (int i = 0; i < 201; ++i) {
            const Vec p = g.node(i, j);
            const double t = exact_soliton(p(0), p(1));
            if (std::abs(std::sin(t)) > 0.1) kerr = std::max(kerr, std::abs(K(i, j) + 1.0));
            ierr = std::max({ierr, std::abs(rf.E(i, j) - 1), std::abs(rf.F(i, j) - std::cos(t)), std::abs(rf.G(i, j) - 1)});
            iierr = std::max({iierr, std::abs(rf.L(i, j)), std::abs(rf.M(i, j) - std::sin(t)), std::abs(rf.N(i, j))});
            iiierr = std::max({iiierr, std::abs(rf.e3(i, j) - 1), std::abs(rf.f3(i, j) + std::cos(t)),
                               std::abs(rf.g3(i, j) - 1)});
        }
    MESSAGE("K error " << kerr << ", I " << ierr << ", II " << iierr << ", III " << iiierr);
    CHECK(kerr < 2e-4);
    CHECK(ierr < 5e-4);
    CHECK(iierr < 5e-4);
    CHECK(iiierr < 5e-4);

    RealizeOptions col;
    col.order = SweepOrder::column_major;
    col.holonomy = false;
    const RealizedFront rc = integrate_frame(f, 0, g, Mat::Identity(3, 3), col);
    CHECK((rc.positions - r.positions).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("sphere and hyperbolic models keep their quadrics") {
    const DomainGrid g = DomainGrid::plane(-1, 1, 81, -1, 1, 81);
    const FrontBundleField sph =
        chebyshev_bundle(ThetaField::from_exact(g, linear_theta(1.0, 0.6, 0.8)));
    const RealizedFront rs = integrate_frame(sph, 1, g, Mat::Identity(4, 4));
    CHECK_FALSE(rs.integrability_warning);
    const FrontBundleField hyp = soliton_chebyshev_field(square(-1, 1), 2.0, 1.0);
    const RealizedFront rh = integrate_frame(hyp, -1, g, Mat::Identity(4, 4));
    CHECK_FALSE(rh.integrability_warning);
    double es = 0.0, eh = 0.0;
    for (Eigen::Index n = 0; n < rs.positions.cols(); ++n) {
        const Vec f = rs.positions.col(n), nu = rs.normals.col(n);
        es = std::max({es, std::abs(f.dot(f) - 1), std::abs(f.dot(nu))});
        const Vec x = rh.positions.col(n), y = rh.normals.col(n);
        eh = std::max({eh, std::abs(rh.model.dot(x, x) + 1), std::abs(rh.model.dot(x, y)),
                       std::abs(rh.model.dot(y, y) - 1)});
        CHECK(x(0) > 0.0);
    }
    CHECK(es < 1e-10);
    CHECK(eh < 1e-10);

    // I of the realization and its normal map match I and III of the data.
    const RealizedForms fh = realized_forms(rh);
    const RealizedForms fn = realized_forms(normal_map(rh));
    const FrontBundleField swapped = swap_roles(hyp);
    double err = 0.0;
    for (int j = 5; j < 76; j += 7)
        for (int i = 5; i < 76; i += 7) {
            const FundamentalForms d = fundamental_forms(hyp, g.node(i, j));
            const FundamentalForms s = fundamental_forms(swapped, g.node(i, j));
            err = std::max({err, std::abs(fh.F(i, j) - d.I(0, 1)), std::abs(fn.F(i, j) - d.III(0, 1)),
                            std::abs(fn.E(i, j) - s.I(0, 0))});
        }
    CHECK(err < 1e-6);
    CHECK(normal_map(rh).model.tag == AmbientTag::de_sitter);
}

TEST_CASE("uniqueness up to isometry") {
    const DomainGrid g = DomainGrid::plane(-2, 2, 101, -2, 2, 101);
    const FrontBundleField f = soliton_chebyshev_field(square(-2, 2));
    RealizeOptions o;
    o.holonomy = false;
    const RealizedFront r1 = integrate_frame(f, 0, g, Mat::Identity(3, 3), o);
    const Mat A = rotation3(0.9, -2.3);
    const RealizedFront r2 = integrate_frame(f, 0, g, A, o);
    const IsometryFit same = isometry_between(r1, r1);
    CHECK((same.A - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(same.residual < 1e-12);
    const IsometryFit fit = isometry_between(r1, r2);
    CHECK((fit.A - A).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(fit.residual < 1e-8);

    const RealizedFront fine = integrate_frame(f, 0, g.refined(2), Mat::Identity(3, 3), o);
    RealizedFront restricted = r1;
    for (int j = 0; j < 101; ++j)
        for (int i = 0; i < 101; ++i) {
            restricted.positions.col(g.linear(i, j)) = fine.position(2 * i, 2 * j);
            restricted.normals.col(g.linear(i, j)) = fine.normal(2 * i, 2 * j);
        }
    CHECK(isometry_between(r1, restricted).residual < 1e-5);

    // Hyperbolic: a boost applied to the base frame is recovered.
    const DomainGrid gh = DomainGrid::plane(-1, 1, 41, -1, 1, 41);
    const FrontBundleField hyp = soliton_chebyshev_field(square(-1, 1), 2.0, 1.0);
    Mat B = Mat::Identity(4, 4);
    B(0, 0) = B(2, 2) = std::cosh(0.4);
    B(0, 2) = B(2, 0) = std::sinh(0.4);
    const RealizedFront h1 = integrate_frame(hyp, -1, gh, Mat::Identity(4, 4), o);
    const RealizedFront h2 = integrate_frame(hyp, -1, gh, B, o);
    const IsometryFit hf = isometry_between(h1, h2);
    CHECK((hf.A - B).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(hf.residual < 1e-8);
}

TEST_CASE("holonomy defect orders") {
    const FrontBundleField f = soliton_chebyshev_field(square(-2, 2));
    const Vec lo = pt(0.2, -0.1);
    double prev = 0.0;
    for (double h : {0.2, 0.1, 0.05}) {
        const double r = holonomy_residual(f, 0, lo, lo + pt(h, h));
        if (prev > 0.0) CHECK(prev / r >= 7.0);
        prev = r;
    }
    // With ω scaled by 1.1 the loop defect is the curvature defect times the area.
    const FrontBundleField bad = scale_connection(f, 1.1);
    const double h = 0.01;
    const Vec c = pt(0.3, 0.1);
    const double dw = -0.1 * std::sin(exact_soliton(c(0), c(1)));
    CHECK(holonomy_residual(bad, 0, c - pt(h / 2, h / 2), c + pt(h / 2, h / 2)) ==
          doctest::Approx(std::abs(dw) * h * h).epsilon(0.02));
    const DomainGrid g = DomainGrid::plane(-1, 1, 41, -1, 1, 41);
    CHECK(integrate_frame(bad, 0, g, Mat::Identity(3, 3)).integrability_warning);
}

TEST_CASE("map realization") {
    const DomainGrid g = DomainGrid::plane(0.5, 1.5, 101, 0.0, M_PI, 101);
    const RealizedFront r = realize_map(polar_map_field(Box{pt(0.5, 0.0), pt(1.5, M_PI)}), 0, g, Mat::Identity(3, 3));
    RealizedFront truth = r;
    for (int j = 0; j < 101; ++j)
        for (int i = 0; i < 101; ++i) {
            const Vec p = g.node(i, j);
            truth.positions.col(g.linear(i, j)) << p(0) * std::cos(p(1)), p(0) * std::sin(p(1)), 0.0;
            truth.normals.col(g.linear(i, j)) << 0, 0, 1;
        }
    CHECK(isometry_between(r, truth).residual < 1e-8);
    CHECK(r.transverse_deviation < 1e-8);

    const DomainGrid gc = DomainGrid::plane(-1, 1, 41, -1, 1, 41);
    const RealizedFront rc = realize_map(cubic_map_field(square(-1, 1)), 0, gc, Mat::Identity(3, 3));
    RealizedFront tc = rc;
    for (int j = 0; j < 41; ++j)
        for (int i = 0; i < 41; ++i) {
            const Vec p = gc.node(i, j);
            tc.positions.col(gc.linear(i, j)) << p(0), p(1) * p(1) * p(1), 0.0;
        }
    CHECK(isometry_between(rc, tc).residual < 1e-8);
    CHECK_THROWS_AS(realize_map(soliton_chebyshev_field(square(-1, 1)), 0, gc, Mat::Identity(3, 3)), PreconditionError);
}

TEST_CASE("role swap") {
    const FrontBundleField f = soliton_chebyshev_field(square(-1, 1));
    const FrontBundleField s = swap_roles(f), ss = swap_roles(s);
    const Vec p = pt(0.3, -0.7);
    CHECK(ss.sample(p).phi == f.sample(p).phi);
    CHECK(ss.jet(p).partial[1].psi == f.jet(p).partial[1].psi);
    const FundamentalForms a = fundamental_forms(f, p), b = fundamental_forms(s, p);
    CHECK((a.I - b.III).norm() < 1e-15);
    CHECK((a.III - b.I).norm() < 1e-15);
    CHECK((a.II - b.II.transpose()).norm() < 1e-15);
    CHECK(front_condition_margin(s, p) == doctest::Approx(front_condition_margin(f, p)));
}

TEST_CASE("general curvature by rescaling") {
    // θ linear solves θ_uv = 0 = (1 − c) sin θ for c = 1; rescaled data realizes on a sphere of radius 1/2.
    const DomainGrid g = DomainGrid::plane(-0.5, 0.5, 41, -0.5, 0.5, 41);
    const FrontBundleField base = chebyshev_bundle(ThetaField::from_exact(g, linear_theta(1.0, 0.6, 0.8)));
    const FrontBundleField half = map_linear(base, [](const BundleSample& s) {
        BundleSample t = s;
        t.phi *= 0.5;
        return t;
    });
    const RealizedFront r = integrate_frame(scale_for_curvature(half, 4.0), 1, g, Mat::Identity(4, 4));
    CHECK_FALSE(r.integrability_warning);
}
