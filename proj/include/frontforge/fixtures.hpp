#pragma once

// Closed-form bundle fields used across the toolkit: trivial and map-type fields given
// directly in a gauge, and generator outputs with exact jets.

#include "frontforge/bundle.hpp"

namespace frontforge {

/// φ = identity columns, ψ = 0, ω = 0.
FrontBundleField flat_field(const Box& box);

/// φ = d(u cos v, u sin v) in the standard gauge, ψ = 0, ω = 0. Singular along u = 0.
FrontBundleField polar_map_field(const Box& box);

/// φ = d(u, v³), ψ = 0, ω = 0: λ = 3v² vanishes to second order on v = 0.
FrontBundleField cubic_map_field(const Box& box);

/// φ_u = (1, 0), φ_v = (0, 2v), ψ = 0, ω = 0: the fold (u, v²) with II ≡ 0.
FrontBundleField fold_field(const Box& box);

/// Chebyshev bundle of θ = 4·atan(exp(a·u + b·v)); (1 − a·b)-integrable.
FrontBundleField soliton_chebyshev_field(const Box& box, double a = 1.0, double b = 1.0);

/// Curvature-line bundle of the sinh-Gordon plane wave; 0-integrable with K = 1.
FrontBundleField sinh_wave_field(const Box& box, double slope = 1.0, double angle = 0.3);

}  // namespace frontforge
