#include "frontforge/bundle.hpp"

#include "frontforge/errors.hpp"
#include "frontforge/forms.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>

namespace frontforge {

Mat BundleSample::conn_along(const Vec& x) const {
    const int m = dim();
    Mat out = Mat::Zero(m, m);
    for (std::size_t k = 0; k < conn.size(); ++k) out += x(static_cast<Eigen::Index>(k)) * conn[k];
    return out;
}

BundleSample& BundleSample::operator+=(const BundleSample& o) {
    phi += o.phi;
    psi += o.psi;
    for (std::size_t k = 0; k < conn.size(); ++k) conn[k] += o.conn[k];
    return *this;
}

BundleSample& BundleSample::operator*=(double s) {
    phi *= s;
    psi *= s;
    for (auto& a : conn) a *= s;
    return *this;
}

BundleSample operator+(BundleSample a, const BundleSample& b) { return a += b; }
BundleSample operator-(BundleSample a, const BundleSample& b) {
    a.phi -= b.phi;
    a.psi -= b.psi;
    for (std::size_t k = 0; k < a.conn.size(); ++k) a.conn[k] -= b.conn[k];
    return a;
}
BundleSample operator*(double s, BundleSample a) { return a *= s; }

namespace {

Mat covariant(const Mat& value, const std::vector<BundleSample>& partial, const Mat& conn_x, const Vec& x,
              Mat BundleSample::*member) {
    Mat out = conn_x * value;
    for (std::size_t k = 0; k < partial.size(); ++k) out += x(static_cast<Eigen::Index>(k)) * (partial[k].*member);
    return out;
}

}  // namespace

Mat BundleJet::covariant_phi(const Vec& x) const {
    return covariant(value.phi, partial, value.conn_along(x), x, &BundleSample::phi);
}

Mat BundleJet::covariant_psi(const Vec& x) const {
    return covariant(value.psi, partial, value.conn_along(x), x, &BundleSample::psi);
}

FrontBundleField::FrontBundleField(int m, Box domain, SampleFn sample, JetFn jet, Provenance provenance)
    : m_(m), domain_(std::move(domain)), sample_(std::move(sample)), jet_(std::move(jet)), provenance_(provenance) {
    if (m != 2 && m != 3) throw DimensionError("bundle rank must be 2 or 3");
    if (domain_.dim() != m) throw DimensionError("domain dimension must equal the bundle rank");
    if (!sample_) throw InputError("field needs a sampler");
}

BundleSample FrontBundleField::sample(const Vec& p) const {
    if (!domain_.contains(p)) throw DomainError("point outside the field domain");
    return sample_(p);
}

BundleJet FrontBundleField::jet(const Vec& p) const {
    if (!domain_.contains(p)) throw DomainError("point outside the field domain");
    if (jet_) return jet_(p);
    return finite_difference_jet(sample_, domain_, p, fd_step());
}

BundleJet finite_difference_jet(const FrontBundleField::SampleFn& sample, const Box& domain, const Vec& p,
                                double h) {
    BundleJet out;
    out.value = sample(p);
    const int m = domain.dim();
    out.partial.reserve(m);
    for (int k = 0; k < m; ++k) {
        Vec e = Vec::Zero(m);
        e(k) = h;
        const bool fwd = p(k) + h <= domain.hi(k);
        const bool bwd = p(k) - h >= domain.lo(k);
        if (fwd && bwd) {
            out.partial.push_back((0.5 / h) * (sample(p + e) - sample(p - e)));
        } else if (fwd) {
            out.partial.push_back((0.5 / h) * (4.0 * sample(p + e) - 3.0 * out.value - sample(p + 2.0 * e)));
        } else if (bwd) {
            out.partial.push_back((0.5 / h) * (3.0 * out.value - 4.0 * sample(p - e) + sample(p - 2.0 * e)));
        } else {
            throw InsufficientStencil("domain too thin for a finite-difference step");
        }
    }
    return out;
}

FrontBundleField FrontBundleField::from_grid(const DomainGrid& grid, std::vector<BundleSample> nodes) {
    if (grid.dim() != 2) throw DimensionError("grid interpolation is implemented for planar grids");
    if (nodes.size() != grid.size()) throw InputError("node sample count does not match the grid");
    const int m = nodes.front().dim();
    auto data = std::make_shared<const std::vector<BundleSample>>(std::move(nodes));
    auto sampler = [grid, data](const Vec& p) {
        const int nu = grid.count(0), nv = grid.count(1);
        const double x = std::clamp((p(0) - grid.lower(0)) / grid.step(0), 0.0, nu - 1.0);
        const double y = std::clamp((p(1) - grid.lower(1)) / grid.step(1), 0.0, nv - 1.0);
        const int i = std::min(static_cast<int>(x), nu - 2);
        const int j = std::min(static_cast<int>(y), nv - 2);
        const double s = x - i, t = y - j;
        const auto& d = *data;
        return (1 - s) * (1 - t) * d[grid.linear(i, j)] + s * (1 - t) * d[grid.linear(i + 1, j)] +
               (1 - s) * t * d[grid.linear(i, j + 1)] + s * t * d[grid.linear(i + 1, j + 1)];
    };
    return FrontBundleField(m, grid.box(), sampler, {}, Provenance::grid_interpolated);
}

FrontBundleField map_linear(const FrontBundleField& field, std::function<BundleSample(const BundleSample&)> transform) {
    auto base = std::make_shared<const FrontBundleField>(field);
    auto tf = std::make_shared<const std::function<BundleSample(const BundleSample&)>>(std::move(transform));
    FrontBundleField::SampleFn sample = [base, tf](const Vec& p) { return (*tf)(base->sample_fn()(p)); };
    FrontBundleField::JetFn jet;
    if (field.has_analytic_jet()) {
        jet = [base, tf](const Vec& p) {
            BundleJet j = base->jet_fn()(p);
            j.value = (*tf)(j.value);
            for (auto& d : j.partial) d = (*tf)(d);
            return j;
        };
    }
    return FrontBundleField(field.dim(), field.domain(), sample, jet, field.provenance());
}

FrontBundleField scale_connection(const FrontBundleField& field, double s) {
    return map_linear(field, [s](const BundleSample& x) {
        BundleSample y = x;
        for (auto& a : y.conn) a *= s;
        return y;
    });
}

FrontBundleField change_gauge(const FrontBundleField& field, const Mat& G) {
    if (G.rows() != field.dim() || G.cols() != field.dim()) throw DimensionError("gauge matrix has the wrong size");
    if ((G.transpose() * G - Mat::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() > 1e-12)
        throw InputError("gauge change must be orthogonal");
    return map_linear(field, [G](const BundleSample& x) {
        BundleSample y = x;
        y.phi = G * x.phi;
        y.psi = G * x.psi;
        for (auto& a : y.conn) a = G * a * G.transpose();
        return y;
    });
}

FrontBundleField pullback_affine(const FrontBundleField& field, const Mat& M, const Vec& b, Box new_domain) {
    const int m = field.dim();
    if (M.rows() != m || M.cols() != m || b.size() != m) throw DimensionError("affine map has the wrong size");
    auto base = std::make_shared<const FrontBundleField>(field);
    // Columns pull back as φ ↦ φ M; connection along ∂'_k is Σ_l M_{lk} conn_l.
    auto pull = [M, m](const BundleSample& x) {
        BundleSample y;
        y.phi = x.phi * M;
        y.psi = x.psi * M;
        y.conn.assign(m, Mat::Zero(m, m));
        for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l) y.conn[k] += M(l, k) * x.conn[l];
        return y;
    };
    FrontBundleField::SampleFn sample = [base, pull, M, b](const Vec& p) { return pull(base->sample(M * p + b)); };
    FrontBundleField::JetFn jet;
    if (field.has_analytic_jet()) {
        jet = [base, pull, M, b, m](const Vec& p) {
            const BundleJet j = base->jet(M * p + b);
            BundleJet out;
            out.value = pull(j.value);
            for (int k = 0; k < m; ++k) {
                BundleSample d = M(0, k) * pull(j.partial[0]);
                for (int l = 1; l < m; ++l) d += M(l, k) * pull(j.partial[l]);
                out.partial.push_back(std::move(d));
            }
            return out;
        };
    }
    return FrontBundleField(m, std::move(new_domain), sample, jet, field.provenance());
}

Mat eval_phi(const FrontBundleField& field, const Vec& p) { return field.sample(p).phi; }

FundamentalForms fundamental_forms(const BundleSample& s) {
    return {first_form(s.phi), second_form(s.phi, s.psi), third_form(s.psi)};
}

FundamentalForms fundamental_forms(const FrontBundleField& field, const Vec& p) {
    return fundamental_forms(field.sample(p));
}

double phi_jacobian(const FrontBundleField& field, const Vec& p) { return field.sample(p).phi.determinant(); }

double compatibility_residual(const FrontBundleField& field, const Vec& p) {
    const BundleSample s = field.sample(p);
    return compatibility_defect(s.phi, s.psi);
}

double front_condition_margin(const BundleSample& s) {
    const Mat sum = first_form(s.phi) + third_form(s.psi);
    Eigen::SelfAdjointEigenSolver<Mat> eig(sum, Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0);
}

double front_condition_margin(const FrontBundleField& field, const Vec& p) {
    return front_condition_margin(field.sample(p));
}

double connection_antisymmetry_defect(const BundleSample& s) {
    double worst = 0.0;
    for (const auto& a : s.conn) worst = std::max(worst, (a + a.transpose()).cwiseAbs().maxCoeff());
    return worst;
}

}  // namespace frontforge
