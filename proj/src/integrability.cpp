#include "frontforge/integrability.hpp"

#include "frontforge/errors.hpp"
#include "frontforge/forms.hpp"

#include <algorithm>
#include <cmath>

namespace frontforge {

namespace {

Vec unit(int m, int k) {
    Vec e = Vec::Zero(m);
    e(k) = 1.0;
    return e;
}

}  // namespace

double codazzi_residual(const BundleJet& jet, Homomorphism which) {
    const int m = jet.value.dim();
    double worst = 0.0;
    for (int j = 0; j < m; ++j)
        for (int k = j + 1; k < m; ++k) {
            const Mat dj = which == Homomorphism::phi ? jet.covariant_phi(unit(m, j)) : jet.covariant_psi(unit(m, j));
            const Mat dk = which == Homomorphism::phi ? jet.covariant_phi(unit(m, k)) : jet.covariant_psi(unit(m, k));
            worst = std::max(worst, (dj.col(k) - dk.col(j)).norm());
        }
    return worst;
}

double codazzi_residual(const FrontBundleField& field, const Vec& p, Homomorphism which) {
    return codazzi_residual(field.jet(p), which);
}

double connection_form_curl(const BundleJet& jet) {
    if (jet.value.dim() != 2) throw DimensionError("connection form curl needs m = 2");
    return jet.partial[0].conn[1](0, 1) - jet.partial[1].conn[0](0, 1);
}

double two_d_integrability_residual(const BundleJet& jet, double c) {
    if (jet.value.dim() != 2) throw DimensionError("two-dimensional identity needs m = 2");
    const Mat& phi = jet.value.phi;
    const Mat& psi = jet.value.psi;
    const double alpha = phi(0, 0) * phi(1, 1) - phi(1, 0) * phi(0, 1);
    const double beta = psi(0, 0) * psi(1, 1) - psi(1, 0) * psi(0, 1);
    return std::abs(connection_form_curl(jet) - c * alpha - beta);
}

double two_d_integrability_residual(const FrontBundleField& field, double c, const Vec& p) {
    if (field.dim() != 2) throw DimensionError("two-dimensional identity needs m = 2");
    return two_d_integrability_residual(field.jet(p), c);
}

Mat connection_curvature(const BundleJet& jet, int j, int k) {
    const Mat& aj = jet.value.conn[j];
    const Mat& ak = jet.value.conn[k];
    return jet.partial[j].conn[k] - jet.partial[k].conn[j] + aj * ak - ak * aj;
}

double gauss_residual(const BundleJet& jet, double c) {
    const int m = jet.value.dim();
    const Mat& phi = jet.value.phi;
    const Mat& psi = jet.value.psi;
    double worst = 0.0;
    for (int x = 0; x < m; ++x)
        for (int y = x + 1; y < m; ++y) {
            const Mat r = connection_curvature(jet, x, y);
            for (int a = 0; a < m; ++a)
                for (int b = a + 1; b < m; ++b) {
                    const double lhs = r(b, a);
                    const double rp = phi(a, y) * phi(b, x) - phi(b, y) * phi(a, x);
                    const double rq = psi(a, y) * psi(b, x) - psi(b, y) * psi(a, x);
                    worst = std::max(worst, std::abs(lhs - c * rp - rq));
                }
        }
    return worst;
}

double gauss_residual(const FrontBundleField& field, double c, const Vec& p) {
    return gauss_residual(field.jet(p), c);
}

double brioschi_curvature(const FrontBundleField& field, const Vec& p, double h) {
    if (field.dim() != 2) throw DimensionError("Brioschi curvature needs m = 2");
    if (h <= 0.0) h = field.fd_step();
    // I and its first derivatives from a jet: ∂_k I = ∂_kφᵀφ + φᵀ∂_kφ.
    struct MetricJet1 {
        Mat I, Iu, Iv;
    };
    auto metric = [&](const Vec& q) {
        const BundleJet j = field.jet(q);
        const Mat& f = j.value.phi;
        const Mat& fu = j.partial[0].phi;
        const Mat& fv = j.partial[1].phi;
        return MetricJet1{f.transpose() * f, fu.transpose() * f + f.transpose() * fu,
                          fv.transpose() * f + f.transpose() * fv};
    };
    const Box& box = field.domain();
    auto diff = [&](int axis, auto pick) {
        Vec e = Vec::Zero(2);
        e(axis) = h;
        const bool fwd = p(axis) + h <= box.hi(axis), bwd = p(axis) - h >= box.lo(axis);
        if (fwd && bwd) return (pick(metric(p + e)) - pick(metric(p - e))) / (2 * h);
        if (fwd) return (4 * pick(metric(p + e)) - 3 * pick(metric(p)) - pick(metric(p + 2 * e))) / (2 * h);
        return (3 * pick(metric(p)) - 4 * pick(metric(p - e)) + pick(metric(p - 2 * e))) / (2 * h);
    };
    const MetricJet1 c0 = metric(p);
    MetricJet2 g;
    g.E = c0.I(0, 0);
    g.F = c0.I(0, 1);
    g.G = c0.I(1, 1);
    g.Eu = c0.Iu(0, 0);
    g.Ev = c0.Iv(0, 0);
    g.Fu = c0.Iu(0, 1);
    g.Fv = c0.Iv(0, 1);
    g.Gu = c0.Iu(1, 1);
    g.Gv = c0.Iv(1, 1);
    g.Evv = diff(1, [](const MetricJet1& x) { return x.Iv(0, 0); });
    g.Fuv = 0.5 * (diff(1, [](const MetricJet1& x) { return x.Iu(0, 1); }) +
                   diff(0, [](const MetricJet1& x) { return x.Iv(0, 1); }));
    g.Guu = diff(0, [](const MetricJet1& x) { return x.Iu(1, 1); });
    return brioschi(g);
}

double gauss_curvature_identity_residual(const FrontBundleField& field, const Vec& p, double tol_reg) {
    const BundleJet j = field.jet(p);
    const double lambda = j.value.phi.determinant();
    if (std::abs(lambda) <= tol_reg) throw RegularityError("point is φ-singular");
    return std::abs(connection_form_curl(j) - brioschi_curvature(field, p) * lambda);
}

double ResidualReport::max_all() const {
    return std::max({max_codazzi_phi, max_codazzi_psi, max_gauss, max_two_d});
}

ResidualReport integrability_report(const FrontBundleField& field, double c, const DomainGrid& grid) {
    if (grid.dim() != 2) throw DimensionError("grid reports are planar");
    const int nu = grid.count(0), nv = grid.count(1);
    ResidualReport r;
    r.hu = grid.step(0);
    r.hv = grid.step(1);
    r.analytic = field.has_analytic_jet();
    r.codazzi_phi = Mat::Zero(nu, nv);
    r.codazzi_psi = Mat::Zero(nu, nv);
    r.gauss = Mat::Zero(nu, nv);
    const bool planar = field.dim() == 2;
    if (planar) r.two_d = Mat::Zero(nu, nv);
    parallel_for(grid.size(), [&](std::size_t idx) {
        const int i = static_cast<int>(idx % nu), j = static_cast<int>(idx / nu);
        const BundleJet jet = field.jet(grid.node(i, j));
        r.codazzi_phi(i, j) = codazzi_residual(jet, Homomorphism::phi);
        r.codazzi_psi(i, j) = codazzi_residual(jet, Homomorphism::psi);
        r.gauss(i, j) = gauss_residual(jet, c);
        if (planar) r.two_d(i, j) = two_d_integrability_residual(jet, c);
    });
    r.max_codazzi_phi = r.codazzi_phi.maxCoeff();
    r.max_codazzi_psi = r.codazzi_psi.maxCoeff();
    r.max_gauss = r.gauss.maxCoeff();
    r.max_two_d = planar ? r.two_d.maxCoeff() : 0.0;
    return r;
}

}  // namespace frontforge
