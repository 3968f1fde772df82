#include "frontforge/errors.hpp"
#include "frontforge/grid.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>

using namespace frontforge;

namespace {

Mat tabulate(const DomainGrid& g, double (*f)(double, double)) {
    Mat t(g.count(0), g.count(1));
    for (int j = 0; j < g.count(1); ++j)
        for (int i = 0; i < g.count(0); ++i) t(i, j) = f(g.coord(0, i), g.coord(1, j));
    return t;
}

}  // namespace

TEST_CASE("difference stencils are exact on low-degree polynomials") {
    const DomainGrid g = DomainGrid::plane(-1, 2, 9, 0, 1, 7);
    const Mat q = tabulate(g, [](double u, double v) { return std::pow(u, 4) - 3 * u * v * v + std::pow(v, 4); });
    const Mat qu = diff_u(q, g.step(0)), qv = diff_v(q, g.step(1));
    const Mat p = tabulate(g, [](double u, double v) { return std::pow(u, 5) + 2 * u * u * std::pow(v, 5); });
    const Mat puu = differentiate(p, 0, g.step(0), 2, 4), pvv = differentiate(p, 1, g.step(1), 2, 4);
    for (int j = 0; j < 7; ++j)
        for (int i = 0; i < 9; ++i) {
            const double u = g.coord(0, i), v = g.coord(1, j);
            CHECK(qu(i, j) == doctest::Approx(4 * u * u * u - 3 * v * v).epsilon(1e-10));
            CHECK(qv(i, j) == doctest::Approx(-6 * u * v + 4 * v * v * v).epsilon(1e-10));
            CHECK(puu(i, j) == doctest::Approx(20 * u * u * u + 4 * std::pow(v, 5)).epsilon(1e-9));
            CHECK(pvv(i, j) == doctest::Approx(40 * u * u * v * v * v).epsilon(1e-9).scale(1.0));
        }
    CHECK_THROWS_AS(differentiate(Mat::Zero(5, 5), 0, 0.1, 2, 4), InsufficientStencil);
    CHECK_THROWS_AS(diff_u(Mat::Zero(4, 5), 0.1), InsufficientStencil);
}

TEST_CASE("second difference converges at fourth order up to the edge") {
    double prev = 0.0;
    for (int n : {21, 41, 81}) {
        const DomainGrid g = DomainGrid::plane(0, 1, n, 0, 1, 6);
        const Mat s = tabulate(g, [](double u, double) { return std::sin(3 * u); });
        const Mat d = differentiate(s, 0, g.step(0), 2, 4);
        double err = 0.0;
        for (int i = 0; i < n; ++i) err = std::max(err, std::abs(d(i, 0) + 9 * std::sin(3 * g.coord(0, i))));
        if (prev > 0.0) CHECK(prev / err > 14.0);
        prev = err;
    }
}

TEST_CASE("grid indexing and refinement") {
    const DomainGrid g = DomainGrid::plane(0, 1, 5, -1, 1, 3);
    CHECK(g.size() == 15);
    CHECK(g.linear(2, 1) == 7);
    CHECK(g.node(4, 2)(0) == 1.0);
    CHECK(g.node(4, 2)(1) == 1.0);
    const DomainGrid r = g.refined(2);
    CHECK(r.count(0) == 9);
    CHECK(r.count(1) == 5);
    CHECK(r.step(0) == doctest::Approx(g.step(0) / 2));
}

TEST_CASE("parallel loop visits every index once") {
    for (int threads : {1, 3, 8}) {
        set_thread_count(threads);
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
        for (const auto& h : hits) CHECK(h.load() == 1);
    }
    set_thread_count(0);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 7) throw InputError("x"); }), InputError);
}
