#pragma once

// Front bundles induced by explicitly parametrized frontals, and the closed-form fixtures.

#include "frontforge/bundle.hpp"
#include "frontforge/dual.hpp"
#include "frontforge/forms.hpp"
#include "frontforge/realizer.hpp"

#include <functional>
#include <string>
#include <vector>

namespace frontforge {

/// Position and unit normal with their first and second partials at one point.
/// df(a, j) = ∂_j f_a, ddf[k](a, j) = ∂_k ∂_j f_a.
struct FrontalJet {
    Vec f, nu;
    Mat df, dnu;
    std::vector<Mat> ddf, ddnu;
};

struct ParametrizedFrontal {
    std::string name;
    int m = 2;
    AmbientModel model;
    Box domain;
    std::function<FrontalJet(const Vec&)> jet;
    /// False when the partials are finite differences of the maps.
    bool analytic = true;
    /// Ambient vectors whose projections to E_f are orthonormalized into the gauge, in order.
    /// Empty: chosen by pivoting over the standard basis at the domain centre.
    std::vector<Vec> references;

    Vec position(const Vec& p) const { return jet(p).f; }
    Vec normal(const Vec& p) const { return jet(p).nu; }
};

namespace detail {
template <int M>
using Jet2 = Dual<Dual<double, M>, M>;

template <int M>
FrontalJet unpack_jet(const VecX<Jet2<M>>& f, const VecX<Jet2<M>>& nu) {
    const Eigen::Index n = f.size();
    FrontalJet j;
    j.f.resize(n), j.nu.resize(n), j.df.resize(n, M), j.dnu.resize(n, M);
    j.ddf.assign(M, Mat(n, M));
    j.ddnu.assign(M, Mat(n, M));
    for (Eigen::Index a = 0; a < n; ++a) {
        j.f(a) = f(a).v.v;
        j.nu(a) = nu(a).v.v;
        for (int k = 0; k < M; ++k) {
            j.df(a, k) = f(a).d[k].v;
            j.dnu(a, k) = nu(a).d[k].v;
            for (int l = 0; l < M; ++l) {
                j.ddf[k](a, l) = f(a).d[k].d[l];
                j.ddnu[k](a, l) = nu(a).d[k].d[l];
            }
        }
    }
    return j;
}
}  // namespace detail

/// Frontal whose position and normal are scalar-generic kernels `VecX<S> -> VecX<S>`;
/// all partials are exact (nested duals).
template <int M, typename PosKernel, typename NormalKernel>
ParametrizedFrontal frontal_from_kernels(std::string name, AmbientModel model, Box domain, PosKernel f,
                                         NormalKernel nu) {
    ParametrizedFrontal F;
    F.name = std::move(name);
    F.m = M;
    F.model = model;
    F.domain = std::move(domain);
    F.jet = [f, nu](const Vec& p) {
        const VecX<detail::Jet2<M>> q = seed<M>(seed<M>(VecX<double>(p)));
        return detail::unpack_jet<M>(f(q), nu(q));
    };
    return F;
}

/// Frontal from plain maps; partials by fourth-order central differences with step `h`.
ParametrizedFrontal frontal_from_maps(std::string name, AmbientModel model, int m, Box domain,
                                      std::function<Vec(const Vec&)> f, std::function<Vec(const Vec&)> nu,
                                      double h = 1e-3);

/// max(|⟨∂_j f, ν⟩|, |⟨ν, ν⟩ − 1|, and |⟨f, ν⟩|, |⟨f, f⟩ ∓ 1| in the curved models).
double frontal_defect(const ParametrizedFrontal& F, const Vec& p);

/// Orthonormal frame (n × m, ambient form) of E_f = ν^⊥ (∩ f^⊥ when c ≠ 0) at p, oriented so
/// that det(f, e_1, …, e_m, ν) > 0 (f omitted for c = 0). Throws RankError when the projected
/// references degenerate.
Mat induced_gauge(const ParametrizedFrontal& F, const Vec& p);

/// The reference vectors induce_bundle uses (explicit or pivoted at the domain centre).
std::vector<Vec> gauge_references(const ParametrizedFrontal& F);

/// φ(∂_j) = ⟨e_i, ∂_j f⟩, ψ(∂_j) = ⟨e_i, ∂_j ν⟩, ω_i^l(∂_k) = ⟨∂_k e_i, e_l⟩ in the induced gauge.
/// Values and jets are exact in the frontal's jet. Throws PreconditionError when the frontal
/// defect exceeds 1e−8 on a coarse lattice over the domain.
FrontBundleField induce_bundle(const ParametrizedFrontal& F);

/// ((a+t²)p, t³) over S² × ℝ with p in spherical coordinates (ϑ, ϕ) ∈ [0.6, 2.4] × [−1.5, 1.5],
/// t ∈ [−0.5, 0.5]; ν = (3t p, −2)/√(9t² + 4).
ParametrizedFrontal fixture_s2xr(double a);
/// Tractroid (sech u cos v, sech u sin v, u − tanh u), u ∈ [−1, 1], v ∈ [−π, π];
/// cuspidal edge along u = 0.
ParametrizedFrontal fixture_pseudosphere();
/// Cuspidal edge (u, v²/2, v³/6 + βu²/2) over [−1, 1]²; II(∂_u, ∂_u) = β on v = 0.
ParametrizedFrontal fixture_perturbed_cuspidal_edge(double beta);
/// Unit sphere with outward normal ν = f, (ϑ, ϕ) ∈ [0.5, 2.5] × [−1.5, 1.5].
ParametrizedFrontal fixture_unit_sphere();
/// z = 0 over [−1, 1]² with ν = e_z.
ParametrizedFrontal fixture_plane();

/// "s2xr:a=2", "pseudosphere", "cuspidal:beta=0.5", "sphere", "plane". Throws InputError.
ParametrizedFrontal frontal_fixture_by_name(const std::string& spec);
std::vector<std::string> frontal_fixture_names();

}  // namespace frontforge
