#include "frontforge/realizer.hpp"

#include "frontforge/errors.hpp"
#include "frontforge/forms.hpp"
#include "frontforge/integrability.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>

namespace frontforge {

std::string to_string(AmbientTag t) {
    switch (t) {
        case AmbientTag::euclidean: return "euclidean";
        case AmbientTag::sphere: return "sphere";
        case AmbientTag::hyperbolic: return "hyperbolic";
        case AmbientTag::de_sitter: return "de_sitter";
    }
    return "unknown";
}

AmbientModel AmbientModel::for_curvature(int c, int m) {
    if (c != 0 && c != 1 && c != -1) throw ParameterError("ambient curvature must be 0, 1 or -1 (rescale first)");
    AmbientModel a;
    a.tag = c == 0 ? AmbientTag::euclidean : c > 0 ? AmbientTag::sphere : AmbientTag::hyperbolic;
    a.m = m;
    return a;
}

int AmbientModel::curvature() const {
    switch (tag) {
        case AmbientTag::euclidean: return 0;
        case AmbientTag::sphere: return 1;
        case AmbientTag::hyperbolic: return -1;
        case AmbientTag::de_sitter: return 1;
    }
    return 0;
}

Mat AmbientModel::J() const {
    Mat j = Mat::Identity(n(), n());
    if (lorentzian()) j(0, 0) = -1.0;
    return j;
}

double AmbientModel::dot(const Vec& a, const Vec& b) const {
    double s = a.dot(b);
    if (lorentzian()) s -= 2.0 * a(0) * b(0);
    return s;
}

Mat build_omega_tilde(const BundleSample& s, int c, const Vec& direction) {
    if (c != 0 && c != 1 && c != -1) throw ParameterError("ambient curvature must be 0, 1 or -1 (rescale first)");
    return omega_tilde(Vec(s.phi * direction), Vec(s.psi * direction), s.conn_along(direction), c);
}

Mat build_omega_tilde(const FrontBundleField& field, int c, const Vec& p, const Vec& direction) {
    return build_omega_tilde(field.sample(p), c, direction);
}

double group_violation(const Mat& F, const AmbientModel& model) {
    const Mat J = model.J();
    return (F.transpose() * J * F - J).cwiseAbs().maxCoeff();
}

Mat project_structure_group(const Mat& F, const AmbientModel& model) {
    if (F.rows() != model.frame_size() || F.cols() != model.frame_size())
        throw DimensionError("frame has the wrong size for the ambient model");
    if (!F.allFinite() || group_violation(F, model) >= 0.5)
        throw DivergenceError("frame drifted too far from the structure group");
    if (!model.lorentzian()) {
        Eigen::JacobiSVD<Mat> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Mat U = svd.matrixU();
        if ((U * svd.matrixV().transpose()).determinant() < 0) U.col(U.cols() - 1) *= -1.0;
        return U * svd.matrixV().transpose();
    }
    const Mat J = model.J();
    Mat out = F;
    for (Eigen::Index k = 0; k < out.cols(); ++k) {
        for (Eigen::Index l = 0; l < k; ++l) {
            const double nl = l == 0 ? -1.0 : 1.0;
            out.col(k) -= (out.col(k).dot(J * out.col(l)) / nl) * out.col(l);
        }
        const double q = out.col(k).dot(J * out.col(k));
        if (k == 0 ? q >= 0.0 : q <= 0.0) throw DivergenceError("frame lost its causal character");
        out.col(k) /= std::sqrt(std::abs(q));
    }
    if (out(0, 0) < 0.0) throw DivergenceError("frame is not time-orientation preserving");
    if (out.determinant() < 0.0) throw DivergenceError("frame is not orientation preserving");
    return out;
}

namespace {

// Working matrix for the ODE: for c = 0 the affine (m+2)-square [[F, f], [0, 1]].
Mat generator(const BundleSample& s, int c, const Vec& direction) {
    const Mat om = build_omega_tilde(s, c, direction);
    if (c != 0) return om;
    const Eigen::Index k = om.rows();
    Mat g = Mat::Zero(k + 1, k + 1);
    g.topLeftCorner(k, k) = om;
    g.block(0, k, k - 1, 1) = s.phi * direction;
    return g;
}

Mat rk4(const Mat& Y, const Mat& a, const Mat& mid, const Mat& b) {
    const Mat k1 = Y * a;
    const Mat k2 = (Y + 0.5 * k1) * mid;
    const Mat k3 = (Y + 0.5 * k2) * mid;
    const Mat k4 = (Y + k3) * b;
    return Y + (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
}

struct SampleCache {
    const DomainGrid& grid;
    std::vector<BundleSample> node, umid, vmid;

    SampleCache(const FrontBundleField& field, const DomainGrid& g) : grid(g) {
        const int nu = g.count(0), nv = g.count(1);
        node.resize(g.size());
        umid.resize(static_cast<std::size_t>((nu - 1) * nv));
        vmid.resize(static_cast<std::size_t>(nu * (nv - 1)));
        parallel_for(g.size(), [&](std::size_t idx) {
            const int i = static_cast<int>(idx % nu), j = static_cast<int>(idx / nu);
            const Vec p = g.node(i, j);
            node[idx] = field.sample(p);
            if (i + 1 < nu) {
                Vec q = p;
                q(0) = g.coord(0, i + 0.5);
                umid[static_cast<std::size_t>(j * (nu - 1) + i)] = field.sample(q);
            }
            if (j + 1 < nv) {
                Vec q = p;
                q(1) = g.coord(1, j + 0.5);
                vmid[static_cast<std::size_t>(j * nu + i)] = field.sample(q);
            }
        });
    }

    const BundleSample& at(int i, int j) const { return node[grid.linear(i, j)]; }
    const BundleSample& mid_u(int i, int j) const {
        return umid[static_cast<std::size_t>(j * (grid.count(0) - 1) + i)];
    }
    const BundleSample& mid_v(int i, int j) const { return vmid[static_cast<std::size_t>(j * grid.count(0) + i)]; }
};

Vec axis(int k, double scale) {
    Vec e = Vec::Zero(2);
    e(k) = scale;
    return e;
}

// One RK4 step from node (i, j) to its neighbour along `ax` in direction `dir` (±1).
Mat step_between(const SampleCache& cache, int c, const Mat& Y, int i, int j, int ax, int dir) {
    const double h = cache.grid.step(ax) * dir;
    const int i2 = ax == 0 ? i + dir : i, j2 = ax == 1 ? j + dir : j;
    const Vec d = axis(ax, h);
    const BundleSample& mid = ax == 0 ? cache.mid_u(std::min(i, i2), j) : cache.mid_v(i, std::min(j, j2));
    return rk4(Y, generator(cache.at(i, j), c, d), generator(mid, c, d), generator(cache.at(i2, j2), c, d));
}

Mat project_working(const Mat& Y, const AmbientModel& model, int c) {
    if (c != 0) return project_structure_group(Y, model);
    Mat out = Y;
    const Eigen::Index k = model.frame_size();
    out.topLeftCorner(k, k) = project_structure_group(Y.topLeftCorner(k, k), model);
    out.row(k).setZero();
    out(k, k) = 1.0;
    return out;
}

double holonomy_loop(const std::array<const BundleSample*, 8>& s, int c, double hu, double hv) {
    // Corners 0..3 counterclockwise from (lo, lo); mids 4..7 on the sides leaving each corner.
    const Vec du = axis(0, hu), dv = axis(1, hv);
    const Eigen::Index w = generator(*s[0], c, du).rows();
    Mat Y = Mat::Identity(w, w);
    Y = rk4(Y, generator(*s[0], c, du), generator(*s[4], c, du), generator(*s[1], c, du));
    Y = rk4(Y, generator(*s[1], c, dv), generator(*s[5], c, dv), generator(*s[2], c, dv));
    Y = rk4(Y, generator(*s[2], c, -du), generator(*s[6], c, -du), generator(*s[3], c, -du));
    Y = rk4(Y, generator(*s[3], c, -dv), generator(*s[7], c, -dv), generator(*s[0], c, -dv));
    return (Y - Mat::Identity(Y.rows(), Y.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

RealizedFront integrate_frame(const FrontBundleField& field, int c, const DomainGrid& grid, const Mat& F0,
                              const RealizeOptions& options, const Vec& origin) {
    if (field.dim() != 2 || grid.dim() != 2) throw DimensionError("grid realization needs m = 2");
    const AmbientModel model = AmbientModel::for_curvature(c, 2);
    const int nu = grid.count(0), nv = grid.count(1);
    RealizedFront out;
    out.grid = grid;
    out.model = model;
    out.base_i = options.base_i < 0 ? (nu - 1) / 2 : options.base_i;
    out.base_j = options.base_j < 0 ? (nv - 1) / 2 : options.base_j;
    if (out.base_i >= nu || out.base_j >= nv) throw InputError("base node outside the grid");

    Mat start = F0;
    if (F0.rows() != model.frame_size() || F0.cols() != model.frame_size())
        throw DimensionError("initial frame has the wrong size");
    if (group_violation(F0, model) > 1e-12) {
        start = project_structure_group(F0, model);
        out.initial_frame_projected = true;
    }

    if (options.integrability_threshold >= 0.0) {
        const ResidualReport rep = integrability_report(field, static_cast<double>(c), grid);
        out.integrability_residual = std::max({rep.max_codazzi_phi, rep.max_codazzi_psi, rep.max_gauss});
        out.integrability_warning = out.integrability_residual > options.integrability_threshold;
    }

    const SampleCache cache(field, grid);
    const int k = model.frame_size();
    const int w = c == 0 ? k + 1 : k;
    Mat Y0 = Mat::Identity(w, w);
    Y0.topLeftCorner(k, k) = start;
    if (c == 0 && origin.size() == k) Y0.block(0, k, k, 1) = origin;

    std::vector<Mat> work(grid.size());
    work[grid.linear(out.base_i, out.base_j)] = Y0;
    const int spine_axis = options.order == SweepOrder::row_major ? 0 : 1;
    const int rib_axis = 1 - spine_axis;
    auto at = [&](int s, int r) -> std::pair<int, int> {
        return spine_axis == 0 ? std::make_pair(s, r) : std::make_pair(r, s);
    };
    const int ns = grid.count(spine_axis), nr = grid.count(rib_axis);
    const int sb = spine_axis == 0 ? out.base_i : out.base_j, rb = spine_axis == 0 ? out.base_j : out.base_i;

    auto march = [&](int s0, int r0, int ax, int dir, int steps) {
        int s = s0, r = r0;
        for (int n = 0; n < steps; ++n) {
            const auto [i, j] = at(s, r);
            const Mat next = step_between(cache, c, work[grid.linear(i, j)], i, j, ax, dir);
            if (ax == spine_axis) s += dir; else r += dir;
            const auto [i2, j2] = at(s, r);
            work[grid.linear(i2, j2)] = project_working(next, model, c);
        }
    };
    march(sb, rb, spine_axis, +1, ns - 1 - sb);
    march(sb, rb, spine_axis, -1, sb);
    parallel_for(static_cast<std::size_t>(ns), [&](std::size_t s) {
        march(static_cast<int>(s), rb, rib_axis, +1, nr - 1 - rb);
        march(static_cast<int>(s), rb, rib_axis, -1, rb);
    });

    out.positions.resize(model.n(), static_cast<Eigen::Index>(grid.size()));
    out.normals.resize(model.n(), static_cast<Eigen::Index>(grid.size()));
    out.frames.resize(grid.size());
    double violation = 0.0;
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const Mat& Y = work[idx];
        out.frames[idx] = Y.topLeftCorner(k, k);
        violation = std::max(violation, group_violation(out.frames[idx], model));
        out.normals.col(static_cast<Eigen::Index>(idx)) = Y.col(k - 1).head(k);
        out.positions.col(static_cast<Eigen::Index>(idx)) = c == 0 ? Vec(Y.col(k).head(k)) : Vec(Y.col(0));
    }
    out.max_group_violation = violation;

    if (options.holonomy && nu > 1 && nv > 1) {
        out.holonomy = Mat::Zero(nu - 1, nv - 1);
        parallel_for(static_cast<std::size_t>((nu - 1) * (nv - 1)), [&](std::size_t idx) {
            const int i = static_cast<int>(idx % (nu - 1)), j = static_cast<int>(idx / (nu - 1));
            const std::array<const BundleSample*, 8> s = {&cache.at(i, j),        &cache.at(i + 1, j),
                                                          &cache.at(i + 1, j + 1), &cache.at(i, j + 1),
                                                          &cache.mid_u(i, j),     &cache.mid_v(i + 1, j),
                                                          &cache.mid_u(i, j + 1), &cache.mid_v(i, j)};
            out.holonomy(i, j) = holonomy_loop(s, c, grid.step(0), grid.step(1));
        });
        out.holonomy_residual_max = out.holonomy.maxCoeff();
    }
    return out;
}

double holonomy_residual(const FrontBundleField& field, int c, const Vec& lo, const Vec& hi) {
    if (field.dim() != 2) throw DimensionError("holonomy loops are planar");
    auto at = [&](double u, double v) {
        Vec p(2);
        p << u, v;
        return field.sample(p);
    };
    const double um = 0.5 * (lo(0) + hi(0)), vm = 0.5 * (lo(1) + hi(1));
    const BundleSample s[8] = {at(lo(0), lo(1)), at(hi(0), lo(1)), at(hi(0), hi(1)), at(lo(0), hi(1)),
                               at(um, lo(1)),    at(hi(0), vm),    at(um, hi(1)),    at(lo(0), vm)};
    return holonomy_loop({&s[0], &s[1], &s[2], &s[3], &s[4], &s[5], &s[6], &s[7]}, c, hi(0) - lo(0), hi(1) - lo(1));
}

RealizedFront realize_map(const FrontBundleField& field, int c, const DomainGrid& grid, const Mat& F0,
                          const RealizeOptions& options) {
    double psi_max = 0.0, phi_max = 0.0;
    for (int j = 0; j < grid.count(1); ++j)
        for (int i = 0; i < grid.count(0); ++i) {
            const BundleSample s = field.sample(grid.node(i, j));
            psi_max = std::max(psi_max, s.psi.cwiseAbs().maxCoeff());
            phi_max = std::max(phi_max, s.phi.cwiseAbs().maxCoeff());
        }
    if (psi_max > 1e-14 * std::max(1.0, phi_max)) throw PreconditionError("map realization needs ψ ≡ 0");
    RealizedFront r = integrate_frame(field, c, grid, F0, options);
    const Vec nu0 = r.normal(r.base_i, r.base_j);
    const Vec f0 = r.position(r.base_i, r.base_j);
    double dev = 0.0;
    for (Eigen::Index n = 0; n < r.positions.cols(); ++n) {
        const Vec f = r.positions.col(n);
        dev = std::max(dev, std::abs(c == 0 ? (f - f0).dot(nu0) : r.model.dot(f, nu0)));
        dev = std::max(dev, (r.normals.col(n) - nu0).cwiseAbs().maxCoeff());
    }
    r.transverse_deviation = dev;
    if (dev > 1e-8) throw ConsistencyError("realized map leaves the totally geodesic hypersurface");
    return r;
}

FrontBundleField swap_roles(const FrontBundleField& field) {
    return map_linear(field, [](const BundleSample& s) {
        BundleSample t = s;
        std::swap(t.phi, t.psi);
        return t;
    });
}

RealizedFront normal_map(const RealizedFront& front) {
    RealizedFront r = front;
    std::swap(r.positions, r.normals);
    r.frames.clear();
    r.holonomy.resize(0, 0);
    if (front.model.tag == AmbientTag::hyperbolic) r.model.tag = AmbientTag::de_sitter;
    if (front.model.tag == AmbientTag::euclidean) {
        // ν lands on the unit sphere of the same linear space.
        r.model.tag = AmbientTag::sphere;
        r.model.m = front.model.m - 1;
    }
    return r;
}

FrontBundleField scale_for_curvature(const FrontBundleField& field, double c) {
    if (c == 0.0) return field;
    const double s = std::sqrt(std::abs(c));
    return map_linear(field, [s](const BundleSample& x) {
        BundleSample y = x;
        y.phi *= s;
        return y;
    });
}

IsometryFit isometry_between(const RealizedFront& r1, const RealizedFront& r2) {
    if (r1.model.tag != r2.model.tag || r1.positions.cols() != r2.positions.cols() ||
        r1.positions.rows() != r2.positions.rows())
        throw InputError("realizations must share grid and model");
    const Eigen::Index n = r1.positions.rows(), N = r1.positions.cols();
    IsometryFit fit;
    fit.t = Vec::Zero(n);
    if (!r1.model.lorentzian()) {
        Vec c1 = Vec::Zero(n), c2 = Vec::Zero(n);
        if (r1.model.tag == AmbientTag::euclidean) {
            c1 = r1.positions.rowwise().mean();
            c2 = r2.positions.rowwise().mean();
        }
        const Mat X1 = r1.positions.colwise() - c1, X2 = r2.positions.colwise() - c2;
        const Mat H = X1 * X2.transpose() + r1.normals * r2.normals.transpose();
        Eigen::JacobiSVD<Mat> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Vec sv = svd.singularValues();
        fit.ambiguous = sv(n - 1) < 1e-10 * sv(0) && (n < 2 || sv(n - 2) < 1e-10 * sv(0));
        Mat D = Mat::Identity(n, n);
        if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0) D(n - 1, n - 1) = -1.0;
        fit.A = svd.matrixV() * D * svd.matrixU().transpose();
        fit.t = c2 - fit.A * c1;
    } else {
        Mat X1(n, 2 * N), X2(n, 2 * N);
        X1 << r1.positions, r1.normals;
        X2 << r2.positions, r2.normals;
        const Mat G = X1 * X1.transpose();
        Eigen::JacobiSVD<Mat> svd(G);
        fit.ambiguous = svd.singularValues()(n - 1) < 1e-10 * svd.singularValues()(0);
        const Mat ls = (X2 * X1.transpose()) * G.completeOrthogonalDecomposition().pseudoInverse();
        AmbientModel lorentz = r1.model;
        lorentz.tag = AmbientTag::hyperbolic;
        fit.A = project_structure_group(ls, lorentz);
    }
    const Mat moved = (fit.A * r1.positions).colwise() + fit.t;
    fit.residual = (moved - r2.positions).cwiseAbs().maxCoeff();
    return fit;
}

RealizedForms realized_forms(const RealizedFront& front, int order) {
    const DomainGrid& g = front.grid;
    const int nu = g.count(0), nv = g.count(1);
    const Eigen::Index n = front.positions.rows();
    auto table = [&](const Mat& data, Eigen::Index row) {
        Mat t(nu, nv);
        for (int j = 0; j < nv; ++j)
            for (int i = 0; i < nu; ++i) t(i, j) = data(row, static_cast<Eigen::Index>(g.linear(i, j)));
        return t;
    };
    std::vector<Mat> fu(n), fv(n), nu_(n), nv_(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const Mat f = table(front.positions, r), nn = table(front.normals, r);
        fu[r] = differentiate(f, 0, g.step(0), 1, order);
        fv[r] = differentiate(f, 1, g.step(1), 1, order);
        nu_[r] = differentiate(nn, 0, g.step(0), 1, order);
        nv_[r] = differentiate(nn, 1, g.step(1), 1, order);
    }
    RealizedForms out;
    for (Mat* m : {&out.E, &out.F, &out.G, &out.L, &out.M, &out.N, &out.e3, &out.f3, &out.g3}) *m = Mat::Zero(nu, nv);
    const double sgn0 = front.model.lorentzian() ? -1.0 : 1.0;
    for (Eigen::Index r = 0; r < n; ++r) {
        const double w = r == 0 ? sgn0 : 1.0;
        out.E += w * fu[r].cwiseProduct(fu[r]);
        out.F += w * fu[r].cwiseProduct(fv[r]);
        out.G += w * fv[r].cwiseProduct(fv[r]);
        out.L -= w * fu[r].cwiseProduct(nu_[r]);
        out.M -= w * 0.5 * (fu[r].cwiseProduct(nv_[r]) + fv[r].cwiseProduct(nu_[r]));
        out.N -= w * fv[r].cwiseProduct(nv_[r]);
        out.e3 += w * nu_[r].cwiseProduct(nu_[r]);
        out.f3 += w * nu_[r].cwiseProduct(nv_[r]);
        out.g3 += w * nv_[r].cwiseProduct(nv_[r]);
    }
    return out;
}

Mat realized_gaussian_curvature(const RealizedFront& front, int order) {
    const RealizedForms f = realized_forms(front, order);
    const DomainGrid& g = front.grid;
    const double hu = g.step(0), hv = g.step(1);
    auto d = [order](const Mat& t, int axis, double h, int k) { return differentiate(t, axis, h, k, order); };
    const Mat Eu = d(f.E, 0, hu, 1), Ev = d(f.E, 1, hv, 1), Fu = d(f.F, 0, hu, 1), Fv = d(f.F, 1, hv, 1),
              Gu = d(f.G, 0, hu, 1), Gv = d(f.G, 1, hv, 1);
    const Mat Evv = d(f.E, 1, hv, 2), Guu = d(f.G, 0, hu, 2), Fuv = d(Fu, 1, hv, 1);
    Mat K(f.E.rows(), f.E.cols());
    for (Eigen::Index j = 0; j < K.cols(); ++j)
        for (Eigen::Index i = 0; i < K.rows(); ++i) {
            const MetricJet2 m{f.E(i, j),  f.F(i, j),  f.G(i, j),  Eu(i, j),  Ev(i, j),  Fu(i, j),
                               Fv(i, j),   Gu(i, j),   Gv(i, j),   Evv(i, j), Fuv(i, j), Guu(i, j)};
            K(i, j) = brioschi(m);
        }
    return K;
}

}  // namespace frontforge
