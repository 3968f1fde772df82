#include "frontforge/fixtures.hpp"

#include "frontforge/generators.hpp"
#include "frontforge/jet_eval.hpp"

namespace frontforge {

namespace {

template <typename S>
BundleSampleT<S> map_sample(const MatX<S>& phi) {
    BundleSampleT<S> s;
    s.phi = phi;
    s.psi = MatX<S>::Zero(2, 2);
    s.conn = {MatX<S>::Zero(2, 2), MatX<S>::Zero(2, 2)};
    return s;
}

DomainGrid grid_over(const Box& box) {
    return DomainGrid::plane(box.lo(0), box.hi(0), 5, box.lo(1), box.hi(1), 5);
}

}  // namespace

FrontBundleField flat_field(const Box& box) {
    return field_from_kernel<2>(box, [](const auto& p) {
        using S = typename std::decay_t<decltype(p)>::Scalar;
        return map_sample<S>(MatX<S>::Identity(2, 2));
    });
}

FrontBundleField polar_map_field(const Box& box) {
    return field_from_kernel<2>(box, [](const auto& p) {
        using S = typename std::decay_t<decltype(p)>::Scalar;
        using std::cos;
        using std::sin;
        MatX<S> phi(2, 2);
        phi << cos(p(1)), -p(0) * sin(p(1)), sin(p(1)), p(0) * cos(p(1));
        return map_sample<S>(phi);
    });
}

FrontBundleField cubic_map_field(const Box& box) {
    return field_from_kernel<2>(box, [](const auto& p) {
        using S = typename std::decay_t<decltype(p)>::Scalar;
        MatX<S> phi(2, 2);
        phi << S(1), S(0), S(0), p(1) * p(1) * 3.0;
        return map_sample<S>(phi);
    });
}

FrontBundleField fold_field(const Box& box) {
    return field_from_kernel<2>(box, [](const auto& p) {
        using S = typename std::decay_t<decltype(p)>::Scalar;
        MatX<S> phi(2, 2);
        phi << S(1), S(0), S(0), p(1) * 2.0;
        return map_sample<S>(phi);
    });
}

FrontBundleField soliton_chebyshev_field(const Box& box, double a, double b) {
    return chebyshev_bundle(ThetaField::from_exact(grid_over(box), soliton_jet(a, b)));
}

FrontBundleField sinh_wave_field(const Box& box, double slope, double angle) {
    return curvatureline_bundle(ThetaField::from_exact(grid_over(box), sinh_gordon_wave(slope, angle, box)));
}

}  // namespace frontforge
