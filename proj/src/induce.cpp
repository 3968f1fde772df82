#include "frontforge/induce.hpp"

#include "frontforge/errors.hpp"
#include "frontforge/forms.hpp"
#include "frontforge/jet_eval.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace frontforge {

namespace {

template <typename T>
T ambient_dot(const VecX<T>& a, const VecX<T>& b, bool lorentz) {
    T s(0.0);
    for (Eigen::Index i = 0; i < a.size(); ++i) s = s + (lorentz && i == 0 ? T(-1.0) * a(i) * b(i) : a(i) * b(i));
    return s;
}

struct GaugeSetup {
    AmbientModel model;
    std::vector<Vec> refs;
};

// E_f frame from f and ν (any scalar type): project the references, Gram–Schmidt, orient.
template <typename T>
std::vector<VecX<T>> gauge_frame(const VecX<T>& f, const VecX<T>& nu, const GaugeSetup& st) {
    const bool lor = st.model.lorentzian();
    const bool curved = st.model.tag != AmbientTag::euclidean;
    const T ff = ambient_dot(f, f, lor), nn = ambient_dot(nu, nu, lor);
    std::vector<VecX<T>> e;
    for (const Vec& r0 : st.refs) {
        VecX<T> w = r0.cast<T>();
        if (curved) w = w - f * (ambient_dot(w, f, lor) / ff);
        w = w - nu * (ambient_dot(w, nu, lor) / nn);
        for (const auto& b : e) w = w - b * ambient_dot(w, b, lor);
        const T q = ambient_dot(w, w, lor);
        using std::sqrt;
        if (!(value_of(q) > 1e-16)) throw RankError("projected gauge references are dependent at this point");
        e.push_back(w / sqrt(q));
    }
    const Eigen::Index n = f.size();
    Mat frame(n, n);
    int col = 0;
    if (curved) frame.col(col++) = f.unaryExpr([](const T& x) { return value_of(x); });
    for (const auto& b : e) frame.col(col++) = b.unaryExpr([](const T& x) { return value_of(x); });
    frame.col(col) = nu.unaryExpr([](const T& x) { return value_of(x); });
    if (frame.determinant() < 0.0) e.back() = -e.back();
    return e;
}

template <int M, typename S>
BundleSampleT<S> induced_kernel(const FrontalJet& J, const GaugeSetup& st, const VecX<S>& delta) {
    using D = Dual<S, M>;
    const VecX<D> x = seed<M>(delta);
    const Eigen::Index n = J.f.size();
    auto taylor = [&](const Vec& v0, const Mat& d1, const std::vector<Mat>& d2) {
        VecX<D> out(n);
        for (Eigen::Index a = 0; a < n; ++a) {
            D s(v0(a));
            for (int j = 0; j < M; ++j) {
                s = s + d1(a, j) * x(j);
                for (int k = 0; k < M; ++k) s = s + (0.5 * d2[k](a, j)) * x(k) * x(j);
            }
            out(a) = s;
        }
        return out;
    };
    const VecX<D> f = taylor(J.f, J.df, J.ddf), nu = taylor(J.nu, J.dnu, J.ddnu);
    const std::vector<VecX<D>> e = gauge_frame(f, nu, st);
    const bool lor = st.model.lorentzian();
    auto pair = [&](const VecX<D>& a, const VecX<D>& b, int k) {
        S s(0.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const S t = a(i).v * b(i).d[k];
            s = s + (lor && i == 0 ? S(-1.0) * t : t);
        }
        return s;
    };
    BundleSampleT<S> out;
    out.phi.resize(M, M);
    out.psi.resize(M, M);
    out.conn.assign(M, MatX<S>(M, M));
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            out.phi(i, j) = pair(e[i], f, j);
            out.psi(i, j) = pair(e[i], nu, j);
            for (int k = 0; k < M; ++k) out.conn[k](j, i) = pair(e[j], e[i], k);
        }
    return out;
}

template <int M>
FrontBundleField induce_fixed(const ParametrizedFrontal& F, const GaugeSetup& st) {
    const auto jet_of = F.jet;
    FrontBundleField::SampleFn sample = [jet_of, st](const Vec& p) {
        return to_sample(induced_kernel<M, double>(jet_of(p), st, VecX<double>::Zero(M)));
    };
    FrontBundleField::JetFn jet = [jet_of, st](const Vec& p) {
        return to_jet<M>(induced_kernel<M, Dual<double, M>>(jet_of(p), st, seed<M>(VecX<double>(VecX<double>::Zero(M)))));
    };
    return FrontBundleField(M, F.domain, sample, jet, F.analytic ? Provenance::analytic : Provenance::grid_interpolated);
}

Vec unit(int n, int k) {
    Vec e = Vec::Zero(n);
    e(k) = 1.0;
    return e;
}

}  // namespace

ParametrizedFrontal frontal_from_maps(std::string name, AmbientModel model, int m, Box domain,
                                      std::function<Vec(const Vec&)> f, std::function<Vec(const Vec&)> nu,
                                      double h) {
    if (m != 2 && m != 3) throw DimensionError("frontals are supported for m = 2 and 3");
    if (domain.dim() != m) throw DimensionError("domain dimension must equal m");
    ParametrizedFrontal F;
    F.name = std::move(name);
    F.m = m;
    F.model = model;
    F.domain = std::move(domain);
    F.analytic = false;
    auto d1 = [m, h](const std::function<Vec(const Vec&)>& g, const Vec& p) {
        const Vec g0 = g(p);
        Mat out(g0.size(), m);
        for (int j = 0; j < m; ++j) {
            Vec s = Vec::Zero(m);
            s(j) = h;
            out.col(j) = (g(p - 2 * s) - 8.0 * g(p - s) + 8.0 * g(p + s) - g(p + 2 * s)) / (12.0 * h);
        }
        return out;
    };
    F.jet = [f, nu, d1, m, h](const Vec& p) {
        FrontalJet J;
        J.f = f(p);
        J.nu = nu(p);
        J.df = d1(f, p);
        J.dnu = d1(nu, p);
        for (int k = 0; k < m; ++k) {
            Vec s = Vec::Zero(m);
            s(k) = h;
            auto dk = [&](const std::function<Vec(const Vec&)>& g) {
                return Mat((d1(g, p - 2 * s) - 8.0 * d1(g, p - s) + 8.0 * d1(g, p + s) - d1(g, p + 2 * s)) / (12.0 * h));
            };
            J.ddf.push_back(dk(f));
            J.ddnu.push_back(dk(nu));
        }
        return J;
    };
    return F;
}

double frontal_defect(const ParametrizedFrontal& F, const Vec& p) {
    const FrontalJet J = F.jet(p);
    const bool lor = F.model.lorentzian();
    double d = std::abs(ambient_dot<double>(J.nu, J.nu, lor) - 1.0);
    for (int j = 0; j < F.m; ++j) d = std::max(d, std::abs(ambient_dot<double>(J.df.col(j), J.nu, lor)));
    if (F.model.tag != AmbientTag::euclidean) {
        d = std::max(d, std::abs(ambient_dot<double>(J.f, J.nu, lor)));
        d = std::max(d, std::abs(ambient_dot<double>(J.f, J.f, lor) - F.model.curvature()));
    }
    return d;
}

std::vector<Vec> gauge_references(const ParametrizedFrontal& F) {
    if (!F.references.empty()) return F.references;
    const FrontalJet J = F.jet(F.domain.center());
    const bool lor = F.model.lorentzian();
    const Eigen::Index n = J.f.size();
    std::vector<Vec> removed = {J.nu};
    if (F.model.tag != AmbientTag::euclidean) removed.push_back(J.f);
    std::vector<Vec> chosen;
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (int pick = 0; pick < F.m; ++pick) {
        int best = -1;
        double best_norm = -1.0;
        for (int k = 0; k < n; ++k) {
            if (used[k]) continue;
            Vec w = unit(static_cast<int>(n), k);
            for (const Vec& b : removed) w -= b * (ambient_dot<double>(w, b, lor) / ambient_dot<double>(b, b, lor));
            const double q = ambient_dot<double>(w, w, lor);
            if (q > best_norm + 1e-12) {
                best_norm = q;
                best = k;
            }
        }
        Vec w = unit(static_cast<int>(n), best);
        for (const Vec& b : removed) w -= b * (ambient_dot<double>(w, b, lor) / ambient_dot<double>(b, b, lor));
        removed.push_back(w);
        used[best] = true;
        chosen.push_back(unit(static_cast<int>(n), best));
    }
    return chosen;
}

Mat induced_gauge(const ParametrizedFrontal& F, const Vec& p) {
    const FrontalJet J = F.jet(p);
    const std::vector<Vec> e = gauge_frame<double>(J.f, J.nu, GaugeSetup{F.model, gauge_references(F)});
    Mat out(J.f.size(), F.m);
    for (int i = 0; i < F.m; ++i) out.col(i) = e[i];
    return out;
}

FrontBundleField induce_bundle(const ParametrizedFrontal& F) {
    if (F.m != 2 && F.m != 3) throw DimensionError("frontals are supported for m = 2 and 3");
    const Box& b = F.domain;
    const int per_axis = 5;
    const int total = F.m == 2 ? per_axis * per_axis : per_axis * per_axis * per_axis;
    for (int idx = 0; idx < total; ++idx) {
        Vec p(F.m);
        int r = idx;
        for (int k = 0; k < F.m; ++k) {
            p(k) = b.lo(k) + (b.hi(k) - b.lo(k)) * (r % per_axis) / (per_axis - 1.0);
            r /= per_axis;
        }
        if (frontal_defect(F, p) > 1e-8) throw PreconditionError("ν is not a unit normal of f on " + F.name);
    }
    const GaugeSetup st{F.model, gauge_references(F)};
    return F.m == 2 ? induce_fixed<2>(F, st) : induce_fixed<3>(F, st);
}

namespace {

Box box2(double u0, double u1, double v0, double v1) {
    Vec lo(2), hi(2);
    lo << u0, v0;
    hi << u1, v1;
    return {lo, hi};
}

}  // namespace

ParametrizedFrontal fixture_s2xr(double a) {
    if (!(a > 0.0)) throw ParameterError("s2xr needs a > 0");
    Vec lo(3), hi(3);
    lo << 0.6, -1.5, -0.5;
    hi << 2.4, 1.5, 0.5;
    auto sphere_point = [](const auto& q) {
        using S = typename std::decay_t<decltype(q)>::Scalar;
        using std::cos, std::sin;
        VecX<S> p(3);
        p << sin(q(0)) * cos(q(1)), sin(q(0)) * sin(q(1)), cos(q(0));
        return p;
    };
    auto f = [a, sphere_point](const auto& q) {
        using S = typename std::decay_t<decltype(q)>::Scalar;
        const VecX<S> p = sphere_point(q);
        const S t = q(2);
        VecX<S> out(4);
        out << p * (a + t * t), t * t * t;
        return out;
    };
    auto nu = [sphere_point](const auto& q) {
        using S = typename std::decay_t<decltype(q)>::Scalar;
        using std::sqrt;
        const VecX<S> p = sphere_point(q);
        const S t = q(2);
        const S r = sqrt(9.0 * t * t + 4.0);
        VecX<S> out(4);
        out << p * (3.0 * t) / r, S(-2.0) / r;
        return out;
    };
    std::ostringstream name;
    name << "s2xr:a=" << a;
    ParametrizedFrontal F = frontal_from_kernels<3>(name.str(), AmbientModel::for_curvature(0, 3), Box{lo, hi}, f, nu);
    F.references = {unit(4, 0), unit(4, 1), unit(4, 2)};
    return F;
}

ParametrizedFrontal fixture_pseudosphere() {
    auto f = [](const auto& q) {
        using S = typename std::decay_t<decltype(q)>::Scalar;
        using std::cos, std::sin, std::cosh, std::tanh;
        const S sech = 1.0 / cosh(q(0));
        VecX<S> out(3);
        out << sech * cos(q(1)), sech * sin(q(1)), q(0) - tanh(q(0));
        return out;
    };
    auto nu = [](const auto& q) {
        using S = typename std::decay_t<decltype(q)>::Scalar;
        using std::cos, std::sin, std::cosh, std::tanh;
        const S th = tanh(q(0));
        VecX<S> out(3);
        out << th * cos(q(1)), th * sin(q(1)), 1.0 / cosh(q(0));
        return out;
    };
    ParametrizedFrontal F = frontal_from_kernels<2>("pseudosphere", AmbientModel::for_curvature(0, 2),
                                                    box2(-1, 1, -M_PI, M_PI), f, nu);
    F.references = {unit(3, 0), unit(3, 1)};
    return F;
}

ParametrizedFrontal fixture_perturbed_cuspidal_edge(double beta) {
    auto f = [beta](const auto& q) {
        using S = typename std::decay_t<decltype(q)>::Scalar;
        VecX<S> out(3);
        out << q(0), 0.5 * q(1) * q(1), q(1) * q(1) * q(1) / 6.0 + 0.5 * beta * q(0) * q(0);
        return out;
    };
    auto nu = [beta](const auto& q) {
        using S = typename std::decay_t<decltype(q)>::Scalar;
        using std::sqrt;
        VecX<S> w(3);
        w << -beta * q(0), -0.5 * q(1), S(1.0);
        const S r = sqrt(w(0) * w(0) + w(1) * w(1) + 1.0);
        return VecX<S>(w / r);
    };
    std::ostringstream name;
    name << "cuspidal:beta=" << beta;
    return frontal_from_kernels<2>(name.str(), AmbientModel::for_curvature(0, 2), box2(-1, 1, -1, 1), f, nu);
}

ParametrizedFrontal fixture_unit_sphere() {
    auto f = [](const auto& q) {
        using S = typename std::decay_t<decltype(q)>::Scalar;
        using std::cos, std::sin;
        VecX<S> out(3);
        out << sin(q(0)) * cos(q(1)), sin(q(0)) * sin(q(1)), cos(q(0));
        return out;
    };
    return frontal_from_kernels<2>("sphere", AmbientModel::for_curvature(0, 2), box2(0.5, 2.5, -1.5, 1.5), f, f);
}

ParametrizedFrontal fixture_plane() {
    auto f = [](const auto& q) {
        using S = typename std::decay_t<decltype(q)>::Scalar;
        VecX<S> out(3);
        out << q(0), q(1), S(0.0);
        return out;
    };
    auto nu = [](const auto& q) {
        using S = typename std::decay_t<decltype(q)>::Scalar;
        VecX<S> out(3);
        out << S(0.0), S(0.0), S(1.0);
        return out;
    };
    return frontal_from_kernels<2>("plane", AmbientModel::for_curvature(0, 2), box2(-1, 1, -1, 1), f, nu);
}

ParametrizedFrontal frontal_fixture_by_name(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string base = spec.substr(0, colon);
    std::map<std::string, double> params;
    if (colon != std::string::npos) {
        std::stringstream rest(spec.substr(colon + 1));
        std::string item;
        while (std::getline(rest, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw InputError("fixture parameter '" + item + "' is not key=value");
            try {
                std::size_t used = 0;
                const std::string value = item.substr(eq + 1);
                params[item.substr(0, eq)] = std::stod(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
            } catch (const std::exception&) {
                throw InputError("fixture parameter '" + item + "' has a non-numeric value");
            }
        }
    }
    auto take = [&](const std::string& key, double fallback) {
        const auto it = params.find(key);
        if (it == params.end()) return fallback;
        const double v = it->second;
        params.erase(it);
        return v;
    };
    ParametrizedFrontal F;
    if (base == "s2xr") F = fixture_s2xr(take("a", 1.0));
    else if (base == "pseudosphere") F = fixture_pseudosphere();
    else if (base == "cuspidal") F = fixture_perturbed_cuspidal_edge(take("beta", 0.5));
    else if (base == "sphere") F = fixture_unit_sphere();
    else if (base == "plane") F = fixture_plane();
    else throw InputError("unknown frontal fixture '" + base + "'");
    if (!params.empty()) throw InputError("unknown parameter '" + params.begin()->first + "' for fixture " + base);
    return F;
}

std::vector<std::string> frontal_fixture_names() { return {"s2xr", "pseudosphere", "cuspidal", "sphere", "plane"}; }

}  // namespace frontforge
