#pragma once

// Pointwise algebra on fiber data, templated on the scalar so the same kernels run on
// doubles and on dual numbers. Columns of `phi`/`psi` are φ(∂_j), ψ(∂_j) in an
// orthonormal gauge; the fiber inner product is the dot product and μ = det.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace frontforge {

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// I_{jk} = <φ_j, φ_k>
template <typename Derived>
MatX<typename Derived::Scalar> first_form(const Eigen::MatrixBase<Derived>& phi) {
    return phi.transpose() * phi;
}

/// II_{jk} = -<φ_j, ψ_k>
template <typename DerivedA, typename DerivedB>
MatX<typename DerivedA::Scalar> second_form(const Eigen::MatrixBase<DerivedA>& phi,
                                            const Eigen::MatrixBase<DerivedB>& psi) {
    return -(phi.transpose() * psi);
}

/// III_{jk} = <ψ_j, ψ_k>
template <typename Derived>
MatX<typename Derived::Scalar> third_form(const Eigen::MatrixBase<Derived>& psi) {
    return psi.transpose() * psi;
}

/// max_{j<k} |<φ_j,ψ_k> - <φ_k,ψ_j>|
template <typename DerivedA, typename DerivedB>
double compatibility_defect(const Eigen::MatrixBase<DerivedA>& phi, const Eigen::MatrixBase<DerivedB>& psi) {
    const Eigen::MatrixXd cross = phi.transpose() * psi;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < cross.rows(); ++j)
        for (Eigen::Index k = j + 1; k < cross.cols(); ++k) worst = std::max(worst, std::abs(cross(j, k) - cross(k, j)));
    return worst;
}

/// Cofactor transpose; valid for singular input. Square sizes 1..3.
template <typename Derived>
MatX<typename Derived::Scalar> adjugate(const Eigen::MatrixBase<Derived>& a) {
    using S = typename Derived::Scalar;
    const Eigen::Index n = a.rows();
    MatX<S> adj(n, n);
    if (n == 1) {
        adj(0, 0) = S(1);
    } else if (n == 2) {
        adj << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
    } else {
        for (Eigen::Index i = 0; i < 3; ++i)
            for (Eigen::Index j = 0; j < 3; ++j) {
                const Eigen::Index r0 = (j + 1) % 3, r1 = (j + 2) % 3;
                const Eigen::Index c0 = (i + 1) % 3, c1 = (i + 2) % 3;
                adj(i, j) = a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0);
            }
    }
    return adj;
}

/// d(det φ) along one coordinate: tr(adj(φ) ∂φ).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar jacobian_derivative(const Eigen::MatrixBase<DerivedA>& phi,
                                              const Eigen::MatrixBase<DerivedB>& dphi) {
    return (adjugate(phi) * dphi).trace();
}

/// Ratio of plane determinants of II and I on span{X, Y}.
template <typename DerivedI, typename DerivedII>
double plane_curvature(const Eigen::MatrixBase<DerivedI>& first, const Eigen::MatrixBase<DerivedII>& second,
                       const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double ixx = x.dot(first * x), iyy = y.dot(first * y), ixy = x.dot(first * y);
    const double jxx = x.dot(second * x), jyy = y.dot(second * y), jxy = x.dot(second * y);
    return (jxx * jyy - jxy * jxy) / (ixx * iyy - ixy * ixy);
}

/// Gaussian curvature of E du² + 2F du dv + G dv² from the Brioschi formula.
struct MetricJet2 {
    double E, F, G;
    double Eu, Ev, Fu, Fv, Gu, Gv;
    double Evv, Fuv, Guu;
};

inline double brioschi(const MetricJet2& g) {
    Eigen::Matrix3d a, b;
    a << -0.5 * g.Evv + g.Fuv - 0.5 * g.Guu, 0.5 * g.Eu, g.Fu - 0.5 * g.Ev,
        g.Fv - 0.5 * g.Gu, g.E, g.F,
        0.5 * g.Gv, g.F, g.G;
    b << 0.0, 0.5 * g.Ev, 0.5 * g.Gu,
        0.5 * g.Ev, g.E, g.F,
        0.5 * g.Gu, g.F, g.G;
    const double w = g.E * g.G - g.F * g.F;
    return (a.determinant() - b.determinant()) / (w * w);
}

/// Structure-algebra generator of dF = F Ω̃ along one coordinate direction.
/// `g` = φ(∂), `psi_col` = ψ(∂), `conn` = connection matrix along ∂ (entry (l,i) = ω_i^l).
/// c = 0: (m+1)-square [[conn, -h],[hᵀ,0]] with h = -ψ(∂).
/// c = ±1: (m+2)-square with e_0 = f in front; the first row carries ∓gᵀ.
template <typename DerivedG, typename DerivedH, typename DerivedC>
MatX<typename DerivedG::Scalar> omega_tilde(const Eigen::MatrixBase<DerivedG>& g,
                                             const Eigen::MatrixBase<DerivedH>& psi_col,
                                             const Eigen::MatrixBase<DerivedC>& conn, int c) {
    using S = typename DerivedG::Scalar;
    const Eigen::Index m = g.size();
    const VecX<S> h = -psi_col;
    if (c == 0) {
        MatX<S> out = MatX<S>::Zero(m + 1, m + 1);
        out.topLeftCorner(m, m) = conn;
        out.block(0, m, m, 1) = -h;
        out.block(m, 0, 1, m) = h.transpose();
        return out;
    }
    MatX<S> out = MatX<S>::Zero(m + 2, m + 2);
    out.block(1, 0, m, 1) = g;
    out.block(0, 1, 1, m) = (c > 0 ? S(-1) : S(1)) * g.transpose();
    out.block(1, 1, m, m) = conn;
    out.block(1, m + 1, m, 1) = -h;
    out.block(m + 1, 1, 1, m) = h.transpose();
    return out;
}

}  // namespace frontforge
