#include "frontforge/grid.hpp"

#include "frontforge/errors.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdlib>
#include <cmath>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace frontforge {

bool Box::contains(const Vec& p, double rel_slack) const {
    if (p.size() != lo.size()) return false;
    const double slack = rel_slack * diameter();
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        if (!(p(k) >= lo(k) - slack && p(k) <= hi(k) + slack)) return false;
    }
    return true;
}

DomainGrid DomainGrid::plane(double u_min, double u_max, int nu, double v_min, double v_max, int nv) {
    if (!(u_min < u_max) || !(v_min < v_max)) throw InputError("grid bounds must be increasing");
    if (nu < 2 || nv < 2) throw InputError("grid needs at least two nodes per axis");
    DomainGrid g;
    g.dim_ = 2;
    g.lo_[0] = u_min;
    g.hi_[0] = u_max;
    g.n_[0] = nu;
    g.lo_[1] = v_min;
    g.hi_[1] = v_max;
    g.n_[1] = nv;
    return g;
}

DomainGrid DomainGrid::solid(double u_min, double u_max, int nu, double v_min, double v_max, int nv,
                             double w_min, double w_max, int nw) {
    DomainGrid g = plane(u_min, u_max, nu, v_min, v_max, nv);
    if (!(w_min < w_max)) throw InputError("grid bounds must be increasing");
    if (nw < 2) throw InputError("grid needs at least two nodes per axis");
    g.dim_ = 3;
    g.lo_[2] = w_min;
    g.hi_[2] = w_max;
    g.n_[2] = nw;
    return g;
}

Vec DomainGrid::node(int i, int j) const {
    Vec p(2);
    p << coord(0, i), coord(1, j);
    return p;
}

Vec DomainGrid::node(int i, int j, int k) const {
    Vec p(3);
    p << coord(0, i), coord(1, j), coord(2, k);
    return p;
}

std::size_t DomainGrid::size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim_; ++a) s *= static_cast<std::size_t>(n_[a]);
    return s;
}

Box DomainGrid::box() const {
    Box b;
    b.lo.resize(dim_);
    b.hi.resize(dim_);
    for (int a = 0; a < dim_; ++a) {
        b.lo(a) = lo_[a];
        b.hi(a) = hi_[a];
    }
    return b;
}

DomainGrid DomainGrid::refined(int factor) const {
    DomainGrid g = *this;
    for (int a = 0; a < dim_; ++a) g.n_[a] = factor * (n_[a] - 1) + 1;
    return g;
}

namespace {

std::atomic<int> g_threads{0};

int default_threads() {
    if (const char* env = std::getenv("FRONTFORGE_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

void set_thread_count(int n) { g_threads = std::max(n, 0); }

int thread_count() {
    const int n = g_threads.load();
    return n > 0 ? n : default_threads();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t end = std::min(n, (w + 1) * chunk);
                for (std::size_t i = w * chunk; i < end; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

namespace {

// One row of a 4th-order derivative along a contiguous sequence.
template <typename Get>
double d4(Get f, int i, int n, double h) {
    if (i >= 2 && i + 2 < n) return (f(i - 2) - 8.0 * f(i - 1) + 8.0 * f(i + 1) - f(i + 2)) / (12.0 * h);
    if (i == 0) return (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) / (12.0 * h);
    if (i == 1) return (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) / (12.0 * h);
    if (i == n - 1)
        return (25.0 * f(n - 1) - 48.0 * f(n - 2) + 36.0 * f(n - 3) - 16.0 * f(n - 4) + 3.0 * f(n - 5)) /
               (12.0 * h);
    return (3.0 * f(n - 1) + 10.0 * f(n - 2) - 18.0 * f(n - 3) + 6.0 * f(n - 4) - f(n - 5)) / (12.0 * h);
}

// Fornberg weights for the derivative of order `d` at x = 0 from nodes at offsets `x`.
std::vector<double> fd_weights(const std::vector<double>& x, int d) {
    const int n = static_cast<int>(x.size());
    Mat c = Mat::Zero(n, d + 1);
    c(0, 0) = 1.0;
    double c1 = 1.0;
    for (int i = 1; i < n; ++i) {
        double c2 = 1.0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            for (int k = std::min(i, d); k >= 0; --k) {
                if (j == i - 1)
                    c(i, k) = c1 * ((k > 0 ? k * c(i - 1, k - 1) : 0.0) - x[i - 1] * c(i - 1, k)) / c2;
                c(j, k) = (x[i] * c(j, k) - (k > 0 ? k * c(j, k - 1) : 0.0)) / c3;
            }
        }
        c1 = c2;
    }
    return std::vector<double>(c.col(d).data(), c.col(d).data() + n);
}

// Per-node stencils along an axis of n nodes: centred (order+1 points) where they fit,
// otherwise the nearest one-sided window of order+deriv points.
std::vector<std::pair<int, std::vector<double>>> stencils(int n, int deriv, int order) {
    const int half = order / 2, width = order + deriv;
    std::vector<std::pair<int, std::vector<double>>> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int start = i - half, count = order + 1;
        if (start < 0 || i + half >= n) {
            count = width;
            start = std::clamp(i - half, 0, n - width);
        }
        std::vector<double> x(static_cast<std::size_t>(count));
        for (int k = 0; k < count; ++k) x[k] = start + k - i;
        out[i] = {start, fd_weights(x, deriv)};
    }
    return out;
}

}  // namespace

Mat diff_u(const Mat& values, double hu) {
    const int nu = static_cast<int>(values.rows());
    if (nu < 5) throw InsufficientStencil("diff_u needs at least five nodes");
    Mat out(values.rows(), values.cols());
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        auto f = [&](int i) { return values(i, j); };
        for (int i = 0; i < nu; ++i) out(i, j) = d4(f, i, nu, hu);
    }
    return out;
}

Mat diff_v(const Mat& values, double hv) {
    const int nv = static_cast<int>(values.cols());
    if (nv < 5) throw InsufficientStencil("diff_v needs at least five nodes");
    Mat out(values.rows(), values.cols());
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        auto f = [&](int j) { return values(i, j); };
        for (int j = 0; j < nv; ++j) out(i, j) = d4(f, j, nv, hv);
    }
    return out;
}

}  // namespace frontforge

namespace frontforge {

Mat differentiate(const Mat& values, int axis, double h, int deriv, int order) {
    if (axis != 0 && axis != 1) throw InputError("differentiate: axis must be 0 or 1");
    if (deriv < 1 || order < 2 || order % 2 != 0) throw InputError("differentiate: unsupported order");
    const int n = static_cast<int>(axis == 0 ? values.rows() : values.cols());
    if (n < order + deriv) throw InsufficientStencil("too few nodes for the requested stencil");
    const auto w = stencils(n, deriv, order);
    const double scale = std::pow(h, -deriv);
    Mat out = Mat::Zero(values.rows(), values.cols());
    const Eigen::Index other = axis == 0 ? values.cols() : values.rows();
    for (Eigen::Index o = 0; o < other; ++o)
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            const auto& [start, wt] = w[static_cast<std::size_t>(i)];
            for (std::size_t k = 0; k < wt.size(); ++k)
                s += wt[k] * (axis == 0 ? values(start + static_cast<int>(k), o) : values(o, start + static_cast<int>(k)));
            (axis == 0 ? out(i, o) : out(o, i)) = s * scale;
        }
    return out;
}

}  // namespace frontforge
