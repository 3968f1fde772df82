#pragma once

#include "frontforge/grid.hpp"

#include <functional>
#include <vector>

namespace frontforge {

/// Fiber data at one point of the base, in a fixed positively oriented orthonormal gauge.
///
/// `phi` and `psi` are m×m with column j holding φ(∂_j) and ψ(∂_j). `conn[k]` is the
/// connection matrix along ∂_k: entry (l, i) is ω_i^l(∂_k), so D_X ξ = X(ξ) + conn(X) ξ
/// for a section ξ given by its components. Each conn[k] is antisymmetric.
struct BundleSample {
    Mat phi;
    Mat psi;
    std::vector<Mat> conn;

    int dim() const { return static_cast<int>(phi.cols()); }
    /// conn(X) = Σ X^k conn[k]
    Mat conn_along(const Vec& x) const;

    BundleSample& operator+=(const BundleSample& o);
    BundleSample& operator*=(double s);
};

BundleSample operator+(BundleSample a, const BundleSample& b);
BundleSample operator-(BundleSample a, const BundleSample& b);
BundleSample operator*(double s, BundleSample a);

/// Value plus first partial derivatives of every entry.
struct BundleJet {
    BundleSample value;
    std::vector<BundleSample> partial;

    /// (D_X φ) as a matrix: columns (D_X φ)(∂_j) = ∂_X φ_j + conn(X) φ_j.
    Mat covariant_phi(const Vec& x) const;
    Mat covariant_psi(const Vec& x) const;
};

enum class Provenance { analytic, grid_interpolated };

struct FundamentalForms {
    Mat I;
    Mat II;
    Mat III;
};

/// Intrinsic (φ, ψ, D) data over a box, evaluable pointwise. Immutable once built.
class FrontBundleField {
public:
    using SampleFn = std::function<BundleSample(const Vec&)>;
    using JetFn = std::function<BundleJet(const Vec&)>;

    FrontBundleField(int m, Box domain, SampleFn sample, JetFn jet = {},
                     Provenance provenance = Provenance::analytic);

    /// Bilinear interpolation of node samples (m = 2); `nodes` indexed by grid.linear(i, j).
    static FrontBundleField from_grid(const DomainGrid& grid, std::vector<BundleSample> nodes);

    int dim() const { return m_; }
    const Box& domain() const { return domain_; }
    Provenance provenance() const { return provenance_; }
    bool has_analytic_jet() const { return static_cast<bool>(jet_); }

    /// Finite-difference step used when no analytic jet exists: 1e-4 · diameter.
    double fd_step() const { return 1e-4 * domain_.diameter(); }

    /// Throws DomainError outside the domain.
    BundleSample sample(const Vec& p) const;
    /// Analytic when available, else central differences (one-sided at the boundary).
    BundleJet jet(const Vec& p) const;

    const SampleFn& sample_fn() const { return sample_; }
    const JetFn& jet_fn() const { return jet_; }

private:
    int m_;
    Box domain_;
    SampleFn sample_;
    JetFn jet_;
    Provenance provenance_;
};

/// Central-difference jet of an arbitrary sampler (one-sided second order near the edges).
BundleJet finite_difference_jet(const FrontBundleField::SampleFn& sample, const Box& domain, const Vec& p,
                                double h);

/// Apply the same pointwise transform to values and derivatives. `transform` must be linear
/// in (φ, ψ, conn) with coefficients constant over the base.
FrontBundleField map_linear(const FrontBundleField& field, std::function<BundleSample(const BundleSample&)> transform);

/// Multiply every connection matrix by `s` (used to build non-integrable perturbations).
FrontBundleField scale_connection(const FrontBundleField& field, double s);

/// Constant change of orthonormal gauge ξ ↦ Gξ. det G = -1 flips the co-orientation.
FrontBundleField change_gauge(const FrontBundleField& field, const Mat& G);

/// Pull back by the affine map p ↦ M p + b, returning a field over `new_domain`.
FrontBundleField pullback_affine(const FrontBundleField& field, const Mat& M, const Vec& b, Box new_domain);

Mat eval_phi(const FrontBundleField& field, const Vec& p);
FundamentalForms fundamental_forms(const FrontBundleField& field, const Vec& p);
FundamentalForms fundamental_forms(const BundleSample& s);
/// λ_φ = det(φ_1, …, φ_m)
double phi_jacobian(const FrontBundleField& field, const Vec& p);
double compatibility_residual(const FrontBundleField& field, const Vec& p);
/// Smallest eigenvalue of I + III; positive certifies Ker φ ∩ Ker ψ = {0}.
double front_condition_margin(const FrontBundleField& field, const Vec& p);
double front_condition_margin(const BundleSample& s);
/// max |conn + connᵀ| over all directions.
double connection_antisymmetry_defect(const BundleSample& s);

}  // namespace frontforge
