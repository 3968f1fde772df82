#pragma once

// φ-singular sets: extraction, classification, conormals, the singular shape operator and
// singular curvatures, extrinsic curvature near A₂ points, and the boundedness theorem harness.

#include "frontforge/bundle.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace frontforge {

enum class SingularClass { degenerate, nondegenerate_non_A2, A2 };

std::string to_string(SingularClass c);

struct SingularTolerances {
    /// |λ| < node · scale after projection, scale = max |λ| over the grid nodes.
    double node = 1e-8;
    /// ‖dλ‖ < nondegenerate · gradient scale marks a degenerate point.
    double nondegenerate = 1e-8;
    /// A₂ iff |dλ(η)| > a2 · gradient scale.
    double a2 = 1e-6;
    /// Relative step of the difference quotients of n along Σ (times the domain diameter).
    double step = 1e-3;
    /// ⟨D_X n, n⟩ / |D_X n| above this raises ConsistencyError.
    double conormal_leak = 1e-6;
};

struct SingularPointRecord {
    Vec location;
    double lambda = 0.0;
    Vec dlambda;
    SingularClass classification = SingularClass::degenerate;
    /// Unit null vector, oriented so that dλ(η) ≥ 0.
    Vec eta;
    double lambda_prime = 0.0;
    /// ds²_φ-orthonormal basis of T_pΣ (m × (m−1)), ordered so (e_1, …, e_{m−1}, η) is positive.
    Mat tangent;
    Vec conormal;
    /// S_φ in the basis `tangent`; empty unless curvatures were computed.
    Mat shape_operator;
    double symmetry_residual = 0.0;
    /// Ascending singular principal curvatures and their directions (domain vectors).
    std::vector<double> kappas;
    std::vector<Vec> kappa_directions;
    /// Why curvatures are missing, if they are.
    std::string note;
};

/// Zero set of λ_φ: nodes projected onto Σ, with m = 2 polylines (node indices in curve order)
/// or m = 3 triangles.
struct SingularSet {
    int m = 2;
    std::vector<Vec> nodes;
    std::vector<std::vector<int>> curves;
    std::vector<bool> closed;
    std::vector<std::array<int, 3>> triangles;
    /// Cells on which λ vanishes at every corner; nothing is extracted there.
    int degenerate_cells = 0;
    /// Crossings dropped because projection left the domain or failed to converge.
    int dropped = 0;
    double lambda_scale = 0.0;
};

double phi_jacobian_gradient_norm(const FrontBundleField& field, const Vec& p);
/// ∇λ_φ at p from the field's jet.
Vec phi_jacobian_gradient(const FrontBundleField& field, const Vec& p);

/// Newton iteration along ∇λ onto {λ = 0}; empty when it leaves the domain or stalls.
std::optional<Vec> project_to_singular_set(const FrontBundleField& field, const Vec& start, double lambda_scale);

/// Marching squares (m = 2) or marching tetrahedra over a Freudenthal split of each cube
/// (m = 3) with linear edge interpolation, followed by projection of every crossing onto Σ.
SingularSet extract_singular_set(const FrontBundleField& field, const DomainGrid& grid,
                                 const SingularTolerances& tol = {});

/// Nondegeneracy, null direction, λ′ and the A₂ test at a point of Σ. `gradient_scale`
/// defaults to ‖dλ(p)‖. Throws RankError when rank φ_p < m − 1.
SingularPointRecord classify_singular_point(const FrontBundleField& field, const Vec& p,
                                            const SingularTolerances& tol = {}, double gradient_scale = 0.0);

/// Unit fiber vector completing the orthonormalized φ(e_i) to a positive frame.
/// `basis` is m × (m−1). Throws RankError when the φ(e_i) are dependent.
Vec conormal(const FrontBundleField& field, const Vec& p, const Mat& basis);
Vec conormal(const Mat& phi, const Mat& basis);

/// S_φ(X) = −sgn(dλ(η)) φ⁻¹(D_X n) in the record's tangent basis; fills shape_operator,
/// symmetry_residual, kappas and kappa_directions. Throws ClassificationError unless A₂.
void singular_shape_operator(const FrontBundleField& field, SingularPointRecord& record,
                             const SingularTolerances& tol = {});

/// Record with curvatures at an A₂ point (classification followed by the shape operator).
SingularPointRecord singular_principal_curvatures(const FrontBundleField& field, const Vec& p,
                                                  const SingularTolerances& tol = {});

/// κ_φ along an extracted curve (m = 2) at node `index` of curve `curve`, traversed in stored
/// order: −sgn(dλ(η)) ⟨D_{γ̇} n, φ(γ̇)⟩ / |φ(γ̇)|² with {γ̇, η} and {φ(γ̇), n} positive.
double singular_curvature_2d(const FrontBundleField& field, const SingularSet& set, int curve, int index,
                             bool reversed = false, const SingularTolerances& tol = {});

/// (II(X,X) II(Y,Y) − II(X,Y)²) / (I(X,X) I(Y,Y) − I(X,Y)²) at a regular point.
/// Throws RegularityError on Σ and DegeneratePlaneError for dependent X, Y.
double extrinsic_curvature(const FrontBundleField& field, const Vec& p, const Vec& X, const Vec& Y);

/// Chart around an A₂ point with Σ = {ũ_m = 0}, ∂̃_1 = X at p, ∂̃_m null on Σ and
/// ⟨φ̃_j, D̃_m φ̃_m⟩ = 0 at p:  x(ũ) = σ(ũ' − ũ_m² a) + ũ_m η(σ(ũ' − ũ_m² a)), where σ
/// projects p + Σ u_j t_j onto Σ.
struct AdaptedChart {
    Vec p;
    /// m × (m−1) tangent vectors t_j at p, t_1 = X.
    Mat tangents;
    Vec eta;
    /// Shift constants solving 2 Σ_j a_j h_jk = ⟨D_m φ_m, φ_k⟩.
    Vec shift;
    /// φ(t_j) at p (n × (m−1)), D̃_m φ̃_m and ψ(η) at p in the shifted chart.
    Mat phi_tangent;
    Vec covariant_phi_mm;
    Vec psi_m;
    /// max_j |⟨φ̃_j, D̃_m φ̃_m⟩| at p in the shifted chart.
    double property4_residual = 0.0;
    double lambda_scale = 0.0;

    /// Domain point of chart coordinates ũ; empty when projection fails.
    std::optional<Vec> point(const FrontBundleField& field, const Vec& u) const;
    /// ∂x/∂ũ at ũ (m × m) by fourth-order differences with step h.
    Mat jacobian(const FrontBundleField& field, const Vec& u, double h) const;
};

AdaptedChart adapted_coordinates(const FrontBundleField& field, const Vec& p, const Vec& X,
                                 const SingularTolerances& tol = {});

/// One-sided limit of K^ext(∂̃_1 ∧ ∂̃_m) at an A₂ point:
/// (∂_m⟨φ_1,ψ_1⟩ ∂_m⟨φ_m,ψ_m⟩ − (∂_m⟨φ_m,ψ_1⟩)²) / |φ_1 ∧ D_m φ_m|² in adapted coordinates,
/// ∂_m by Richardson-extrapolated central differences.
double limit_extrinsic_curvature_at_A2(const FrontBundleField& field, const Vec& p, const Vec& X,
                                       const SingularTolerances& tol = {});

enum class ItemStatus { passed, failed, not_applicable };

std::string to_string(ItemStatus s);

struct BddOptions {
    /// Largest transversal offset (times the domain diameter); offsets ε, ε/2, ε/4 on both sides.
    double offset = 5e-3;
    /// Directions of T_pΣ in the fan (m = 3).
    int fan = 4;
    /// Growth exponents below this count as unbounded.
    double unbounded_exponent = -0.5;
    /// ‖II‖ on Σ below this (times the scale of II) counts as vanishing.
    double second_form_zero = 1e-8;
    /// Singular principal curvatures within this of 0 count as zero.
    double kappa_zero = 1e-8;
    /// K^ext above −kext_zero counts as non-negative, above +kext_zero as bounded below by δ > 0.
    double kext_zero = 1e-10;
};

struct BddNode {
    int node = -1;
    double growth_exponent = 0.0;
    double min_kext = 0.0;
    double max_abs_kext = 0.0;
    bool sign_change = false;
    double second_form_norm = 0.0;
};

struct BddReport {
    std::vector<BddNode> nodes;
    /// Nodes skipped because they are not A₂ (or have no curvature data).
    std::vector<int> excluded;
    double max_second_form_on_sigma = 0.0;
    double min_growth_exponent = 0.0;
    double max_growth_exponent = 0.0;
    double min_kext = 0.0;
    bool bounded = true;
    bool sign_change = false;
    int kappa_negative = 0, kappa_zero = 0, kappa_positive = 0;
    ItemStatus item1 = ItemStatus::not_applicable;
    ItemStatus item2 = ItemStatus::not_applicable;
    ItemStatus item3 = ItemStatus::not_applicable;
    ItemStatus item3_strict = ItemStatus::not_applicable;
};

/// Samples K^ext on a transversal fan at every A₂ record: planes X ∧ η with X in T_pΣ at offsets
/// ±ε, ±ε/2, ±ε/4 along η; fits the growth exponent of max |K^ext| against ε and checks the
/// implications of the boundedness theorem on the data.
BddReport theorem_bdd_report(const FrontBundleField& field, const std::vector<SingularPointRecord>& records,
                             const BddOptions& options = {});

struct AnalysisReport {
    SingularSet set;
    std::vector<SingularPointRecord> records;
    BddReport bdd;
};

/// extract → classify → curvatures (A₂ nodes) → boundedness report.
AnalysisReport analyze(const FrontBundleField& field, const DomainGrid& grid, const SingularTolerances& tol = {},
                       const BddOptions& options = {});

/// Columns u, v[, w], lambda, lambda_prime, class, eta_u, eta_v[, eta_w], kappa_1[, kappa_2],
/// growth_exponent; one row per record, values printed with 17 significant digits.
void write_analysis_csv(const std::string& path, const AnalysisReport& report);

}  // namespace frontforge
