#pragma once

// Bridges scalar-generic samplers to BundleSample/BundleJet: evaluate once on doubles for
// values, once on Dual<double, N> for exact first partials.

#include "frontforge/bundle.hpp"
#include "frontforge/dual.hpp"
#include "frontforge/forms.hpp"

#include <vector>

namespace frontforge {

template <typename S>
struct BundleSampleT {
    MatX<S> phi;
    MatX<S> psi;
    std::vector<MatX<S>> conn;
};

inline BundleSample to_sample(const BundleSampleT<double>& s) { return {s.phi, s.psi, s.conn}; }

namespace detail {
template <typename S>
Mat values_of(const MatX<S>& a) {
    Mat out(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.size(); ++i) out(i) = value_of(a(i));
    return out;
}
template <int N>
Mat slot_of(const MatX<Dual<double, N>>& a, int k) {
    Mat out(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.size(); ++i) out(i) = a(i).d[k];
    return out;
}
}  // namespace detail

template <int N>
BundleJet to_jet(const BundleSampleT<Dual<double, N>>& s) {
    BundleJet j;
    j.value.phi = detail::values_of(s.phi);
    j.value.psi = detail::values_of(s.psi);
    for (const auto& a : s.conn) j.value.conn.push_back(detail::values_of(a));
    for (int k = 0; k < N; ++k) {
        BundleSample d;
        d.phi = detail::slot_of<N>(s.phi, k);
        d.psi = detail::slot_of<N>(s.psi, k);
        for (const auto& a : s.conn) d.conn.push_back(detail::slot_of<N>(a, k));
        j.partial.push_back(std::move(d));
    }
    return j;
}

/// Field whose sampler and exact jet both come from one scalar-generic kernel
/// `kernel(const VecX<S>& p) -> BundleSampleT<S>`.
template <int N, typename Kernel>
FrontBundleField field_from_kernel(const Box& box, Kernel kernel) {
    FrontBundleField::SampleFn sample = [kernel](const Vec& p) { return to_sample(kernel(VecX<double>(p))); };
    FrontBundleField::JetFn jet = [kernel](const Vec& p) { return to_jet<N>(kernel(seed<N>(VecX<double>(p)))); };
    return FrontBundleField(N, box, sample, jet, Provenance::analytic);
}

}  // namespace frontforge
