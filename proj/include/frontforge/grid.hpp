#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace frontforge {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Axis-aligned parameter box.
struct Box {
    Vec lo;
    Vec hi;

    int dim() const { return static_cast<int>(lo.size()); }
    Vec center() const { return 0.5 * (lo + hi); }
    double diameter() const { return (hi - lo).norm(); }
    /// Membership with a relative slack of `rel_slack * diameter` on every side.
    bool contains(const Vec& p, double rel_slack = 1e-9) const;
};

/// Rectangular node lattice over a 2- or 3-dimensional parameter box.
class DomainGrid {
public:
    DomainGrid() = default;

    static DomainGrid plane(double u_min, double u_max, int nu, double v_min, double v_max, int nv);
    static DomainGrid solid(double u_min, double u_max, int nu, double v_min, double v_max, int nv,
                            double w_min, double w_max, int nw);

    int dim() const { return dim_; }
    int count(int axis) const { return n_[axis]; }
    double lower(int axis) const { return lo_[axis]; }
    double upper(int axis) const { return hi_[axis]; }
    double step(int axis) const { return (hi_[axis] - lo_[axis]) / (n_[axis] - 1); }
    double coord(int axis, double index) const { return lo_[axis] + index * step(axis); }

    Vec node(int i, int j) const;
    Vec node(int i, int j, int k) const;

    std::size_t size() const;
    std::size_t linear(int i, int j) const { return static_cast<std::size_t>(j) * n_[0] + i; }
    std::size_t linear(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * n_[1] + j) * n_[0] + i;
    }

    Box box() const;

    /// Same bounds, node counts refined as n -> factor*(n-1)+1.
    DomainGrid refined(int factor) const;

private:
    int dim_ = 0;
    double lo_[3] = {0, 0, 0};
    double hi_[3] = {0, 0, 0};
    int n_[3] = {1, 1, 1};
};

/// Thread count used by parallel_for; 0 restores the default
/// (FRONTFORGE_THREADS, else hardware concurrency).
void set_thread_count(int n);
int thread_count();

/// Static-chunked parallel loop over [0, n). Iterations must write disjoint data.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Fourth-order first derivative of a nu×nv node table along u (rows) or v (columns),
/// one-sided five-point stencils at the edges. Needs at least five nodes on the axis.
Mat diff_u(const Mat& values, double hu);
Mat diff_v(const Mat& values, double hv);
/// Derivative of order `deriv` along `axis` (0 = u, 1 = v) with truncation order `order` (even),
/// centred where the stencil fits and one-sided with order+deriv points near the edges.
Mat differentiate(const Mat& values, int axis, double h, int deriv, int order);

}  // namespace frontforge
