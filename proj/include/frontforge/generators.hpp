#pragma once

#include "frontforge/bundle.hpp"

#include <functional>
#include <memory>
#include <string>

namespace frontforge {

enum class ThetaSource { exact, goursat, elliptic };

std::string to_string(ThetaSource s);

/// θ with all partial derivatives up to order two.
struct ThetaJet {
    double t = 0, tu = 0, tv = 0, tuu = 0, tuv = 0, tvv = 0;
};

/// Scalar solution over a planar grid. values(i, j) = θ(node(i, j)). Off the nodes θ is
/// either the closed form it came from or the bicubic Hermite interpolant whose nodal
/// slopes are fourth-order differences of the table.
class ThetaField {
public:
    using ExactFn = std::function<ThetaJet(double, double)>;

    ThetaField(DomainGrid grid, Mat values, ThetaSource source, double pde_residual);
    /// Tabulates `exact` on the grid and keeps it for off-node evaluation.
    static ThetaField from_exact(DomainGrid grid, ExactFn exact);

    const DomainGrid& grid() const { return grid_; }
    const Mat& values() const { return values_; }
    ThetaSource source() const { return source_; }
    double pde_residual() const { return pde_residual_; }
    bool has_exact() const { return static_cast<bool>(exact_); }
    const ExactFn& exact() const { return exact_; }

    ThetaJet evaluate(double u, double v) const;

private:
    struct Slopes {
        Mat tu, tv, tuv;
    };

    DomainGrid grid_;
    Mat values_;
    ThetaSource source_;
    double pde_residual_;
    ExactFn exact_;
    std::shared_ptr<const Slopes> slopes_;
};

/// θ = 4·atan(exp(u + v)).
double exact_soliton(double u, double v);
/// Jet of θ = 4·atan(exp(a·u + b·v)), which solves θ_uv = a·b·sinθ.
ThetaField::ExactFn soliton_jet(double a = 1.0, double b = 1.0);
/// θ = t0 + a·u + b·v; solves θ_uv = 0.
ThetaField::ExactFn linear_theta(double t0, double a, double b);

/// Plane wave θ(u, v) = Θ(u cos α + v sin α) with Θ'' = −4 sinh Θ, Θ(0) = 0, Θ'(0) = slope.
/// Θ is tabulated by fine RK4 and evaluated by quintic Hermite interpolation using Θ, Θ', Θ''.
/// Solves θ_uu + θ_vv = −4 sinh θ and vanishes on parallel lines.
ThetaField::ExactFn sinh_gordon_wave(double slope, double angle, const Box& domain);

/// Right-hand-side factor of the Goursat solver's equation θ_uv = (c−1) sinθ.
inline double goursat_coefficient(double c) { return c - 1.0; }
/// The Chebyshev bundle is c-integrable iff θ_uv = (1−c) sinθ.
inline double chebyshev_coefficient(double c) { return 1.0 - c; }

/// Characteristic marching for θ_uv = (c−1) sinθ with θ given on v = v_min (f0, indexed by i)
/// and on u = u_min (g0, indexed by j).
ThetaField solve_sine_gordon_goursat(double c, const Vec& f0, const Vec& g0, const DomainGrid& grid);
ThetaField solve_sine_gordon_goursat(double c, const std::function<double(double)>& f0,
                                     const std::function<double(double)>& g0, const DomainGrid& grid);

struct NewtonOptions {
    double tolerance = 1e-10;
    int max_iterations = 50;
    int max_halvings = 20;
};

/// Damped Newton on the five-point discretization of θ_uu + θ_vv + 4 sinhθ = s with θ = boundary
/// on the grid boundary. `source` defaults to zero. Throws NonConvergence with the last iterate.
ThetaField solve_sinh_gordon_dirichlet(const DomainGrid& grid, const std::function<double(double, double)>& boundary,
                                       const std::function<double(double, double)>& source = {},
                                       const NewtonOptions& options = {});

/// φ = cos(θ/2)(du+dv)a₁ − sin(θ/2)(du−dv)a₂, ψ = −sin(θ/2)(du+dv)a₁ − cos(θ/2)(du−dv)a₂,
/// ω = (θ_u du − θ_v dv)/2. Jets are exact in θ's jet.
FrontBundleField chebyshev_bundle(const ThetaField& theta);

/// φ = 2[cosh(θ/2) du a₁ + sinh(θ/2) dv a₂], ψ = −2[sinh(θ/2) du a₁ + cosh(θ/2) dv a₂],
/// ω = (θ_v du − θ_u dv)/2.
FrontBundleField curvatureline_bundle(const ThetaField& theta);

/// θ'(u, v) = θ(−u, v) on the mirrored grid; flips the sign of θ_uv.
ThetaField reflect_u(const ThetaField& theta);

/// Header row `nu,nv,u_min,u_max,v_min,v_max,source,pde_residual`, one value row, then nv
/// rows of nu values (row j holds θ(·, v_j)).
void write_theta_csv(const std::string& path, const ThetaField& theta);
ThetaField read_theta_csv(const std::string& path);

}  // namespace frontforge
