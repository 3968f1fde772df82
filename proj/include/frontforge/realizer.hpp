#pragma once

#include "frontforge/bundle.hpp"

#include <string>
#include <vector>

namespace frontforge {

enum class AmbientTag { euclidean, sphere, hyperbolic, de_sitter };

std::string to_string(AmbientTag t);

/// Ambient space form as a quadric (or affine space) in a linear model space.
struct AmbientModel {
    AmbientTag tag = AmbientTag::euclidean;
    int m = 2;

    /// c ∈ {0, 1, −1} selects Euclidean, sphere or hyperbolic space.
    static AmbientModel for_curvature(int c, int m);

    int curvature() const;
    /// Linear dimension of the model space: m+1 (Euclidean) or m+2.
    int n() const { return tag == AmbientTag::euclidean ? m + 1 : m + 2; }
    /// Size of the structure-group matrices (the Euclidean frame omits the position).
    int frame_size() const { return n(); }
    bool lorentzian() const { return tag == AmbientTag::hyperbolic || tag == AmbientTag::de_sitter; }
    /// Gram matrix of the model bilinear form: Id or diag(−1, 1, …, 1).
    Mat J() const;
    double dot(const Vec& a, const Vec& b) const;
};

/// Structure-algebra generator of dF = F Ω̃ along `direction` at a sample.
/// c = 0: (m+1)-square; c = ±1: (m+2)-square with e_0 = f in front.
Mat build_omega_tilde(const BundleSample& s, int c, const Vec& direction);
Mat build_omega_tilde(const FrontBundleField& field, int c, const Vec& p, const Vec& direction);

/// Nearest structure-group element: polar factor with det +1 (Euclidean/sphere) or signed
/// J-Gram–Schmidt keeping column 0 future pointing (hyperbolic). Throws DivergenceError when the
/// input violates the group constraint by 0.5 or more.
Mat project_structure_group(const Mat& F, const AmbientModel& model);
/// max |FᵀJF − J|
double group_violation(const Mat& F, const AmbientModel& model);

struct RealizedFront {
    DomainGrid grid;
    AmbientModel model;
    /// n × (nu·nv); column grid.linear(i, j).
    Mat positions;
    Mat normals;
    /// Structure-group element per node; Euclidean frames are (m+1)-square (e_1, …, e_m, ν).
    std::vector<Mat> frames;
    /// (nu−1) × (nv−1) loop defects; empty when holonomy was not requested.
    Mat holonomy;
    double holonomy_residual_max = 0.0;
    double max_group_violation = 0.0;
    double integrability_residual = 0.0;
    bool integrability_warning = false;
    bool initial_frame_projected = false;
    /// Set by realize_map: deviation from the totally geodesic hypersurface; negative when unused.
    double transverse_deviation = -1.0;
    int base_i = 0;
    int base_j = 0;

    Vec position(int i, int j) const { return positions.col(static_cast<Eigen::Index>(grid.linear(i, j))); }
    Vec normal(int i, int j) const { return normals.col(static_cast<Eigen::Index>(grid.linear(i, j))); }
};

enum class SweepOrder { row_major, column_major };

struct RealizeOptions {
    SweepOrder order = SweepOrder::row_major;
    /// Base node; negative selects the grid centre.
    int base_i = -1;
    int base_j = -1;
    /// Max Codazzi/Gauss residual over the nodes above which the result is flagged;
    /// negative skips the check.
    double integrability_threshold = 1e-6;
    bool holonomy = true;
};

/// Spine-then-ribs RK4 integration of dF = F Ω̃ (and df = Σ g^l e_l for c = 0) with
/// projection to the structure group after every step. For c = 0, `origin` is f at the base.
RealizedFront integrate_frame(const FrontBundleField& field, int c, const DomainGrid& grid, const Mat& F0,
                              const RealizeOptions& options = {}, const Vec& origin = Vec());

/// ‖F_loop − Id‖_max around the axis-aligned rectangle with opposite corners lo, hi,
/// one RK4 step per side. For c = 0 the loop carries the translation part too.
double holonomy_residual(const FrontBundleField& field, int c, const Vec& lo, const Vec& hi);

/// Realization of a coherent tangent bundle (ψ ≡ 0) as a map into a totally geodesic
/// hypersurface. Throws PreconditionError for nonzero ψ and ConsistencyError when the
/// image leaves the hypersurface by more than 1e−8.
RealizedFront realize_map(const FrontBundleField& field, int c, const DomainGrid& grid, const Mat& F0,
                          const RealizeOptions& options = {});

/// Exchange φ and ψ; ω unchanged.
FrontBundleField swap_roles(const FrontBundleField& field);

/// The realized unit normal as a map: S^m for Euclidean and sphere fronts, de Sitter space for
/// hyperbolic fronts. Frames are dropped.
RealizedFront normal_map(const RealizedFront& front);

/// φ scaled by √|c| so that a c-integrable field becomes sign(c)-integrable; the realized
/// positions of the original are then the scaled model's divided by √|c|.
FrontBundleField scale_for_curvature(const FrontBundleField& field, double c);

struct IsometryFit {
    Mat A;
    Vec t;
    double residual = 0.0;
    bool ambiguous = false;
};

/// Least-squares ambient isometry taking R1 onto R2: Kabsch with translation (Euclidean),
/// orthogonal Procrustes (sphere), or a least-squares linear fit projected to SO₀(1, m+1)
/// (hyperbolic). Positions and normals both enter the fit; `residual` is the max position error.
IsometryFit isometry_between(const RealizedFront& r1, const RealizedFront& r2);

/// Per-node tables of a realized surface's fundamental forms, from differences of truncation
/// order `order` of positions and normals under the ambient bilinear form. Brioschi divides by
/// (EG − F²)², so near-degenerate metrics need the high default.
struct RealizedForms {
    Mat E, F, G;
    Mat L, M, N;
    Mat e3, f3, g3;
};

RealizedForms realized_forms(const RealizedFront& front, int order = 8);
/// Brioschi curvature of the realized first fundamental form at every node.
Mat realized_gaussian_curvature(const RealizedFront& front, int order = 8);

}  // namespace frontforge
