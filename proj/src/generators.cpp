#include "frontforge/generators.hpp"

#include "frontforge/errors.hpp"
#include "frontforge/jet_eval.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace frontforge {

std::string to_string(ThetaSource s) {
    switch (s) {
        case ThetaSource::exact: return "exact";
        case ThetaSource::goursat: return "goursat";
        case ThetaSource::elliptic: return "elliptic";
    }
    return "unknown";
}

ThetaField::ThetaField(DomainGrid grid, Mat values, ThetaSource source, double pde_residual)
    : grid_(std::move(grid)), values_(std::move(values)), source_(source), pde_residual_(pde_residual) {
    if (grid_.dim() != 2) throw DimensionError("theta fields live on planar grids");
    if (values_.rows() != grid_.count(0) || values_.cols() != grid_.count(1))
        throw InputError("theta table does not match the grid");
    if (!values_.allFinite()) throw InputError("theta table has non-finite entries");
    if (grid_.count(0) >= 5 && grid_.count(1) >= 5) {
        auto s = std::make_shared<Slopes>();
        s->tu = diff_u(values_, grid_.step(0));
        s->tv = diff_v(values_, grid_.step(1));
        s->tuv = diff_v(s->tu, grid_.step(1));
        slopes_ = std::move(s);
    }
}

ThetaField ThetaField::from_exact(DomainGrid grid, ExactFn exact) {
    Mat values(grid.count(0), grid.count(1));
    for (int j = 0; j < grid.count(1); ++j)
        for (int i = 0; i < grid.count(0); ++i) {
            const Vec p = grid.node(i, j);
            values(i, j) = exact(p(0), p(1)).t;
        }
    ThetaField f(std::move(grid), std::move(values), ThetaSource::exact, 0.0);
    f.exact_ = std::move(exact);
    return f;
}

namespace {

// Cubic Hermite basis on [0,1]: index 0/1 = value at 0/1, 2/3 = slope at 0/1; with derivatives.
struct Hermite3 {
    std::array<double, 4> b, db, ddb;
    explicit Hermite3(double s) {
        const double s2 = s * s, s3 = s2 * s;
        b = {2 * s3 - 3 * s2 + 1, -2 * s3 + 3 * s2, s3 - 2 * s2 + s, s3 - s2};
        db = {6 * s2 - 6 * s, -6 * s2 + 6 * s, 3 * s2 - 4 * s + 1, 3 * s2 - 2 * s};
        ddb = {12 * s - 6, -12 * s + 6, 6 * s - 4, 6 * s - 2};
    }
};

}  // namespace

ThetaJet ThetaField::evaluate(double u, double v) const {
    if (exact_) return exact_(u, v);
    if (!slopes_) throw InsufficientStencil("theta interpolation needs at least five nodes per axis");
    const double hu = grid_.step(0), hv = grid_.step(1);
    const int nu = grid_.count(0), nv = grid_.count(1);
    const double x = std::clamp((u - grid_.lower(0)) / hu, 0.0, nu - 1.0);
    const double y = std::clamp((v - grid_.lower(1)) / hv, 0.0, nv - 1.0);
    const int i = std::min(static_cast<int>(x), nu - 2), j = std::min(static_cast<int>(y), nv - 2);
    const Hermite3 bs(x - i), bt(y - j);
    // Per-corner data scaled to the unit cell: value, u-slope, v-slope, cross slope.
    ThetaJet out;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const double f = values_(i + a, j + b);
            const double fu = slopes_->tu(i + a, j + b) * hu;
            const double fv = slopes_->tv(i + a, j + b) * hv;
            const double fuv = slopes_->tuv(i + a, j + b) * hu * hv;
            const std::array<double, 2> su = {static_cast<double>(a), static_cast<double>(2 + a)};
            const std::array<double, 2> sv = {static_cast<double>(b), static_cast<double>(2 + b)};
            const double coef[2][2] = {{f, fv}, {fu, fuv}};
            for (int p = 0; p < 2; ++p)
                for (int q = 0; q < 2; ++q) {
                    const int iu = static_cast<int>(su[p]), iv = static_cast<int>(sv[q]);
                    const double c = coef[p][q];
                    out.t += c * bs.b[iu] * bt.b[iv];
                    out.tu += c * bs.db[iu] * bt.b[iv];
                    out.tv += c * bs.b[iu] * bt.db[iv];
                    out.tuu += c * bs.ddb[iu] * bt.b[iv];
                    out.tuv += c * bs.db[iu] * bt.db[iv];
                    out.tvv += c * bs.b[iu] * bt.ddb[iv];
                }
        }
    out.tu /= hu;
    out.tv /= hv;
    out.tuu /= hu * hu;
    out.tuv /= hu * hv;
    out.tvv /= hv * hv;
    return out;
}

double exact_soliton(double u, double v) { return 4.0 * std::atan(std::exp(u + v)); }

ThetaField::ExactFn soliton_jet(double a, double b) {
    return [a, b](double u, double v) {
        const double w = a * u + b * v;
        const double sech = 1.0 / std::cosh(w), th = std::tanh(w);
        ThetaJet j;
        j.t = 4.0 * std::atan(std::exp(w));
        j.tu = 2.0 * a * sech;
        j.tv = 2.0 * b * sech;
        j.tuu = -2.0 * a * a * sech * th;
        j.tuv = -2.0 * a * b * sech * th;
        j.tvv = -2.0 * b * b * sech * th;
        return j;
    };
}

ThetaField::ExactFn linear_theta(double t0, double a, double b) {
    return [t0, a, b](double u, double v) {
        ThetaJet j;
        j.t = t0 + a * u + b * v;
        j.tu = a;
        j.tv = b;
        return j;
    };
}

ThetaField::ExactFn sinh_gordon_wave(double slope, double angle, const Box& domain) {
    const double ca = std::cos(angle), sa = std::sin(angle);
    double xmin = 0.0, xmax = 0.0;
    for (int corner = 0; corner < 4; ++corner) {
        const double u = (corner & 1) ? domain.hi(0) : domain.lo(0);
        const double v = (corner & 2) ? domain.hi(1) : domain.lo(1);
        const double x = u * ca + v * sa;
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
    }
    constexpr double H = 2e-3;
    constexpr int sub = 10;
    const int n_neg = static_cast<int>(std::ceil(-xmin / H)) + 2;
    const int n_pos = static_cast<int>(std::ceil(xmax / H)) + 2;
    // Knot k sits at x = (k − n_neg)·H; store (Θ, Θ').
    struct Table {
        double x0;
        std::vector<double> y, dy;
    };
    auto table = std::make_shared<Table>();
    table->x0 = -n_neg * H;
    table->y.assign(n_neg + n_pos + 1, 0.0);
    table->dy.assign(n_neg + n_pos + 1, 0.0);
    auto rhs = [](const Eigen::Vector2d& s) { return Eigen::Vector2d(s(1), -4.0 * std::sinh(s(0))); };
    auto march = [&](int from, int dir) {
        Eigen::Vector2d s(table->y[from], table->dy[from]);
        const double h = dir * H / sub;
        for (int k = from + dir; k >= 0 && k < static_cast<int>(table->y.size()); k += dir) {
            for (int r = 0; r < sub; ++r) {
                const Eigen::Vector2d k1 = rhs(s), k2 = rhs(s + 0.5 * h * k1), k3 = rhs(s + 0.5 * h * k2),
                                      k4 = rhs(s + h * k3);
                s += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
            }
            table->y[k] = s(0);
            table->dy[k] = s(1);
        }
    };
    table->y[n_neg] = 0.0;
    table->dy[n_neg] = slope;
    march(n_neg, +1);
    march(n_neg, -1);

    return [table, ca, sa](double u, double v) {
        const double x = u * ca + v * sa;
        const double pos = (x - table->x0) / H;
        const int k = std::clamp(static_cast<int>(std::floor(pos)), 0, static_cast<int>(table->y.size()) - 2);
        const double s = pos - k;
        const double y0 = table->y[k], y1 = table->y[k + 1];
        const double d0 = table->dy[k] * H, d1 = table->dy[k + 1] * H;
        const double a0 = -4.0 * std::sinh(y0) * H * H, a1 = -4.0 * std::sinh(y1) * H * H;
        // Quintic Hermite: value, derivative and second derivative in s.
        const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
        const double h0 = 1 - 10 * s3 + 15 * s4 - 6 * s5, h1 = s - 6 * s3 + 8 * s4 - 3 * s5,
                     h2 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5), h3 = 10 * s3 - 15 * s4 + 6 * s5,
                     h4 = -4 * s3 + 7 * s4 - 3 * s5, h5 = 0.5 * (s3 - 2 * s4 + s5);
        const double g0 = -30 * s2 + 60 * s3 - 30 * s4, g1 = 1 - 18 * s2 + 32 * s3 - 15 * s4,
                     g2 = 0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4), g3 = 30 * s2 - 60 * s3 + 30 * s4,
                     g4 = -12 * s2 + 28 * s3 - 15 * s4, g5 = 0.5 * (3 * s2 - 8 * s3 + 5 * s4);
        const double e0 = -60 * s + 180 * s2 - 120 * s3, e1 = -36 * s + 96 * s2 - 60 * s3,
                     e2 = 0.5 * (2 - 18 * s + 36 * s2 - 20 * s3), e3 = 60 * s - 180 * s2 + 120 * s3,
                     e4 = -24 * s + 84 * s2 - 60 * s3, e5 = 0.5 * (6 * s - 24 * s2 + 20 * s3);
        const double th = h0 * y0 + h1 * d0 + h2 * a0 + h3 * y1 + h4 * d1 + h5 * a1;
        const double dth = (g0 * y0 + g1 * d0 + g2 * a0 + g3 * y1 + g4 * d1 + g5 * a1) / H;
        const double ddth = (e0 * y0 + e1 * d0 + e2 * a0 + e3 * y1 + e4 * d1 + e5 * a1) / (H * H);
        ThetaJet j;
        j.t = th;
        j.tu = dth * ca;
        j.tv = dth * sa;
        j.tuu = ddth * ca * ca;
        j.tuv = ddth * ca * sa;
        j.tvv = ddth * sa * sa;
        return j;
    };
}

ThetaField solve_sine_gordon_goursat(double c, const Vec& f0, const Vec& g0, const DomainGrid& grid) {
    if (grid.dim() != 2) throw DimensionError("Goursat problem is planar");
    const int nu = grid.count(0), nv = grid.count(1);
    if (f0.size() != nu || g0.size() != nv) throw InputError("edge data does not match the grid");
    const double scale = std::max({1.0, std::abs(f0(0)), std::abs(g0(0))});
    if (std::abs(f0(0) - g0(0)) > 1e-12 * scale) throw InputError("edge data disagree at the corner");
    const double k = goursat_coefficient(c);
    const double hh = grid.step(0) * grid.step(1);
    Mat t(nu, nv);
    t.col(0) = f0;
    t.row(0) = g0.transpose();
    for (int j = 1; j < nv; ++j)
        for (int i = 1; i < nu; ++i) {
            const double base = t(i - 1, j) + t(i, j - 1) - t(i - 1, j - 1);
            double x = base;
            for (int it = 0; it < 2; ++it) {
                const double mean = 0.25 * (t(i - 1, j) + t(i, j - 1) + t(i - 1, j - 1) + x);
                x = base + hh * k * std::sin(mean);
            }
            t(i, j) = x;
        }
    double residual = 0.0;
    for (int j = 1; j < nv; ++j)
        for (int i = 1; i < nu; ++i) {
            const double mixed = (t(i, j) - t(i - 1, j) - t(i, j - 1) + t(i - 1, j - 1)) / hh;
            const double rhs = 0.25 * k *
                               (std::sin(t(i, j)) + std::sin(t(i - 1, j)) + std::sin(t(i, j - 1)) +
                                std::sin(t(i - 1, j - 1)));
            residual = std::max(residual, std::abs(mixed - rhs));
        }
    return ThetaField(grid, std::move(t), ThetaSource::goursat, residual);
}

ThetaField solve_sine_gordon_goursat(double c, const std::function<double(double)>& f0,
                                     const std::function<double(double)>& g0, const DomainGrid& grid) {
    Vec a(grid.count(0)), b(grid.count(1));
    for (int i = 0; i < grid.count(0); ++i) a(i) = f0(grid.coord(0, i));
    for (int j = 0; j < grid.count(1); ++j) b(j) = g0(grid.coord(1, j));
    return solve_sine_gordon_goursat(c, a, b, grid);
}

namespace {

struct Elliptic {
    const DomainGrid& grid;
    Mat source;
    int nu, nv;
    double iu2, iv2;

    int index(int i, int j) const { return (j - 1) * (nu - 2) + (i - 1); }

    Mat residual(const Mat& t) const {
        Mat r = Mat::Zero(nu, nv);
        for (int j = 1; j < nv - 1; ++j)
            for (int i = 1; i < nu - 1; ++i)
                r(i, j) = (t(i - 1, j) - 2 * t(i, j) + t(i + 1, j)) * iu2 +
                          (t(i, j - 1) - 2 * t(i, j) + t(i, j + 1)) * iv2 + 4.0 * std::sinh(t(i, j)) - source(i, j);
        return r;
    }

    Eigen::SparseMatrix<double> jacobian(const Mat& t) const {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(5 * (nu - 2) * (nv - 2)));
        for (int j = 1; j < nv - 1; ++j)
            for (int i = 1; i < nu - 1; ++i) {
                const int row = index(i, j);
                trip.emplace_back(row, row, -2 * iu2 - 2 * iv2 + 4.0 * std::cosh(t(i, j)));
                if (i > 1) trip.emplace_back(row, index(i - 1, j), iu2);
                if (i < nu - 2) trip.emplace_back(row, index(i + 1, j), iu2);
                if (j > 1) trip.emplace_back(row, index(i, j - 1), iv2);
                if (j < nv - 2) trip.emplace_back(row, index(i, j + 1), iv2);
            }
        const int n = (nu - 2) * (nv - 2);
        Eigen::SparseMatrix<double> a(n, n);
        a.setFromTriplets(trip.begin(), trip.end());
        return a;
    }
};

double interior_max(const Mat& r) { return r.cwiseAbs().maxCoeff(); }

}  // namespace

ThetaField solve_sinh_gordon_dirichlet(const DomainGrid& grid, const std::function<double(double, double)>& boundary,
                                       const std::function<double(double, double)>& source,
                                       const NewtonOptions& options) {
    if (grid.dim() != 2) throw DimensionError("sinh-Gordon problem is planar");
    const int nu = grid.count(0), nv = grid.count(1);
    if (nu < 3 || nv < 3) throw InputError("grid has no interior nodes");
    Elliptic prob{grid, Mat::Zero(nu, nv), nu, nv, 1.0 / (grid.step(0) * grid.step(0)),
                  1.0 / (grid.step(1) * grid.step(1))};
    Mat t = Mat::Zero(nu, nv);
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) {
            const Vec p = grid.node(i, j);
            if (i == 0 || j == 0 || i == nu - 1 || j == nv - 1) {
                t(i, j) = boundary(p(0), p(1));
                if (!std::isfinite(t(i, j))) throw InputError("boundary data must be finite");
            }
            if (source) prob.source(i, j) = source(p(0), p(1));
        }

    Mat r = prob.residual(t);
    double rnorm = interior_max(r);
    for (int it = 0; it < options.max_iterations; ++it) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(prob.jacobian(t));
        if (lu.info() != Eigen::Success) throw NonConvergence("Newton matrix is singular", t);
        Vec rhs((nu - 2) * (nv - 2));
        for (int j = 1; j < nv - 1; ++j)
            for (int i = 1; i < nu - 1; ++i) rhs(prob.index(i, j)) = -r(i, j);
        const Vec delta = lu.solve(rhs);
        double step = 1.0;
        Mat trial;
        Mat rt;
        double rtn = 0.0;
        for (int halving = 0;; ++halving) {
            trial = t;
            for (int j = 1; j < nv - 1; ++j)
                for (int i = 1; i < nu - 1; ++i) trial(i, j) += step * delta(prob.index(i, j));
            rt = prob.residual(trial);
            rtn = interior_max(rt);
            if (std::isfinite(rtn) && (rtn < rnorm || rnorm == 0.0)) break;
            if (halving == options.max_halvings) break;
            step *= 0.5;
        }
        if (!std::isfinite(rtn)) throw NonConvergence("Newton iterate left the finite range", t);
        const double update = step * delta.cwiseAbs().maxCoeff();
        t = std::move(trial);
        r = std::move(rt);
        rnorm = rtn;
        if (update < options.tolerance) return ThetaField(grid, std::move(t), ThetaSource::elliptic, rnorm);
    }
    throw NonConvergence("sinh-Gordon Newton iteration did not converge", t);
}

namespace {

template <typename S>
BundleSampleT<S> chebyshev_kernel(const S& t, const S& tu, const S& tv) {
    using std::cos;
    using std::sin;
    const S c = cos(t * 0.5), s = sin(t * 0.5);
    BundleSampleT<S> out;
    out.phi.resize(2, 2);
    out.phi << c, c, -s, s;
    out.psi.resize(2, 2);
    out.psi << -s, -s, -c, c;
    const S wu = tu * 0.5, wv = -tv * 0.5;
    MatX<S> au(2, 2), av(2, 2);
    au << S(0), wu, -wu, S(0);
    av << S(0), wv, -wv, S(0);
    out.conn = {au, av};
    return out;
}

template <typename S>
BundleSampleT<S> curvatureline_kernel(const S& t, const S& tu, const S& tv) {
    using std::cosh;
    using std::sinh;
    const S ch = cosh(t * 0.5), sh = sinh(t * 0.5);
    BundleSampleT<S> out;
    out.phi.resize(2, 2);
    out.phi << ch * 2.0, S(0), S(0), sh * 2.0;
    out.psi.resize(2, 2);
    out.psi << sh * -2.0, S(0), S(0), ch * -2.0;
    const S wu = tv * 0.5, wv = -tu * 0.5;
    MatX<S> au(2, 2), av(2, 2);
    au << S(0), wu, -wu, S(0);
    av << S(0), wv, -wv, S(0);
    out.conn = {au, av};
    return out;
}

template <typename Kernel>
FrontBundleField theta_bundle(const ThetaField& theta, Kernel kernel) {
    auto th = std::make_shared<const ThetaField>(theta);
    FrontBundleField::SampleFn sample = [th, kernel](const Vec& p) {
        const ThetaJet j = th->evaluate(p(0), p(1));
        return to_sample(kernel(j.t, j.tu, j.tv));
    };
    FrontBundleField::JetFn jet = [th, kernel](const Vec& p) {
        using D = Dual<double, 2>;
        const ThetaJet j = th->evaluate(p(0), p(1));
        D t(j.t), tu(j.tu), tv(j.tv);
        t.d = {j.tu, j.tv};
        tu.d = {j.tuu, j.tuv};
        tv.d = {j.tuv, j.tvv};
        return to_jet<2>(kernel(t, tu, tv));
    };
    const Provenance prov = theta.has_exact() ? Provenance::analytic : Provenance::grid_interpolated;
    return FrontBundleField(2, theta.grid().box(), sample, jet, prov);
}

}  // namespace

FrontBundleField chebyshev_bundle(const ThetaField& theta) {
    return theta_bundle(theta, [](const auto& t, const auto& tu, const auto& tv) { return chebyshev_kernel(t, tu, tv); });
}

FrontBundleField curvatureline_bundle(const ThetaField& theta) {
    return theta_bundle(theta,
                        [](const auto& t, const auto& tu, const auto& tv) { return curvatureline_kernel(t, tu, tv); });
}

ThetaField reflect_u(const ThetaField& theta) {
    const DomainGrid& g = theta.grid();
    const DomainGrid mirrored =
        DomainGrid::plane(-g.upper(0), -g.lower(0), g.count(0), g.lower(1), g.upper(1), g.count(1));
    if (theta.has_exact()) {
        const auto src = theta.exact();
        return ThetaField::from_exact(mirrored, [src](double u, double v) {
            ThetaJet j = src(-u, v);
            j.tu = -j.tu;
            j.tuv = -j.tuv;
            return j;
        });
    }
    return ThetaField(mirrored, theta.values().colwise().reverse(), theta.source(), theta.pde_residual());
}

void write_theta_csv(const std::string& path, const ThetaField& theta) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw InputError("cannot open " + path + " for writing");
    const DomainGrid& g = theta.grid();
    std::fprintf(out, "nu,nv,u_min,u_max,v_min,v_max,source,pde_residual\n");
    std::fprintf(out, "%d,%d,%.17g,%.17g,%.17g,%.17g,%s,%.17g\n", g.count(0), g.count(1), g.lower(0), g.upper(0),
                 g.lower(1), g.upper(1), to_string(theta.source()).c_str(), theta.pde_residual());
    for (int j = 0; j < g.count(1); ++j)
        for (int i = 0; i < g.count(0); ++i)
            std::fprintf(out, "%.17g%c", theta.values()(i, j), i + 1 == g.count(0) ? '\n' : ',');
    std::fclose(out);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        cells.push_back(cell);
    }
    return cells;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(s, &used);
    } catch (const std::exception&) {
        throw InputError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw InputError("not a number: '" + s + "'");
    return x;
}

}  // namespace

ThetaField read_theta_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError(path + ": missing header");
    const auto names = split_csv(line);
    if (!std::getline(in, line)) throw InputError(path + ": missing header values");
    const auto vals = split_csv(line);
    if (names.size() < 6 || vals.size() != names.size() || names[0] != "nu" || names[1] != "nv")
        throw InputError(path + ": malformed header");
    const int nu = static_cast<int>(parse_double(vals[0])), nv = static_cast<int>(parse_double(vals[1]));
    const DomainGrid g = DomainGrid::plane(parse_double(vals[2]), parse_double(vals[3]), nu, parse_double(vals[4]),
                                           parse_double(vals[5]), nv);
    ThetaSource source = ThetaSource::goursat;
    double residual = 0.0;
    for (std::size_t k = 6; k < names.size(); ++k) {
        if (names[k] == "source")
            source = vals[k] == "elliptic" ? ThetaSource::elliptic
                     : vals[k] == "exact"  ? ThetaSource::exact
                                           : ThetaSource::goursat;
        if (names[k] == "pde_residual") residual = parse_double(vals[k]);
    }
    Mat t(nu, nv);
    for (int j = 0; j < nv; ++j) {
        if (!std::getline(in, line)) throw InputError(path + ": too few rows");
        const auto row = split_csv(line);
        if (static_cast<int>(row.size()) != nu) throw InputError(path + ": row has the wrong length");
        for (int i = 0; i < nu; ++i) t(i, j) = parse_double(row[i]);
    }
    return ThetaField(g, std::move(t), source, residual);
}

}  // namespace frontforge
