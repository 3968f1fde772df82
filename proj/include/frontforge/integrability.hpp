#pragma once

#include "frontforge/bundle.hpp"

namespace frontforge {

enum class Homomorphism { phi, psi };

/// max over coordinate pairs j<k of ‖D_j χ_k − D_k χ_j‖.
double codazzi_residual(const BundleJet& jet, Homomorphism which);
double codazzi_residual(const FrontBundleField& field, const Vec& p, Homomorphism which);

/// dω(∂_u,∂_v) where D e_1 = −ω e_2; ω(∂_k) is conn[k](0,1).
double connection_form_curl(const BundleJet& jet);

/// |dω − cα − β| on (∂_u, ∂_v); m = 2 only.
double two_d_integrability_residual(const BundleJet& jet, double c);
double two_d_integrability_residual(const FrontBundleField& field, double c, const Vec& p);

/// Curvature of D on (∂_j, ∂_k): ∂_j A_k − ∂_k A_j + [A_j, A_k].
Mat connection_curvature(const BundleJet& jet, int j, int k);

/// max over fiber pairs (a,b) and coordinate pairs of the Gauss-equation defect.
double gauss_residual(const BundleJet& jet, double c);
double gauss_residual(const FrontBundleField& field, double c, const Vec& p);

/// Gaussian curvature of I by the Brioschi formula; second derivatives of I are taken by
/// central differences of the jet with step `h` (0 selects the field's fd_step).
double brioschi_curvature(const FrontBundleField& field, const Vec& p, double h = 0.0);

/// |dω − K_φ λ_φ|; throws RegularityError when |λ_φ| ≤ tol_reg.
double gauss_curvature_identity_residual(const FrontBundleField& field, const Vec& p, double tol_reg);

struct ResidualReport {
    double max_codazzi_phi = 0.0;
    double max_codazzi_psi = 0.0;
    double max_gauss = 0.0;
    double max_two_d = 0.0;
    /// nu×nv tables (m = 2); two_d is left empty for m = 3.
    Mat codazzi_phi, codazzi_psi, gauss, two_d;
    double hu = 0.0, hv = 0.0;
    bool analytic = false;

    double max_all() const;
};

/// Residuals at every node of a planar grid, evaluated in parallel.
ResidualReport integrability_report(const FrontBundleField& field, double c, const DomainGrid& grid);

}  // namespace frontforge
