#include "frontforge/singular.hpp"

#include "frontforge/errors.hpp"
#include "frontforge/forms.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <unordered_map>

namespace frontforge {

std::string to_string(SingularClass c) {
    switch (c) {
        case SingularClass::degenerate: return "degenerate";
        case SingularClass::nondegenerate_non_A2: return "nondegenerate_non_A2";
        case SingularClass::A2: return "A2";
    }
    return "unknown";
}

std::string to_string(ItemStatus s) {
    switch (s) {
        case ItemStatus::passed: return "passed";
        case ItemStatus::failed: return "failed";
        case ItemStatus::not_applicable: return "not_applicable";
    }
    return "unknown";
}

namespace {

struct Local {
    Mat phi;
    double lambda = 0.0;
    Vec grad;
    BundleJet jet;
};

Local local_jet(const FrontBundleField& field, const Vec& p) {
    Local L;
    L.jet = field.jet(p);
    L.phi = L.jet.value.phi;
    L.lambda = L.phi.determinant();
    const int m = field.dim();
    L.grad.resize(m);
    for (int k = 0; k < m; ++k) L.grad(k) = jacobian_derivative(L.phi, L.jet.partial[k].phi);
    return L;
}

/// Unit right null vector of φ (smallest singular direction).
Vec null_direction(const Mat& phi) {
    Eigen::JacobiSVD<Mat> svd(phi, Eigen::ComputeFullV);
    return svd.matrixV().col(phi.cols() - 1);
}

double local_scale(const Mat& phi) { return std::max(std::pow(phi.norm(), phi.cols()), 1e-300); }

/// ds²_φ-orthonormal basis of ∇λ^⊥ with (e_1, …, e_{m−1}, η) positive.
Mat sigma_tangent(const Mat& phi, const Vec& grad, const Vec& eta) {
    const int m = static_cast<int>(grad.size());
    const Mat g = grad;
    Eigen::HouseholderQR<Mat> qr(g);
    const Mat q = qr.householderQ() * Mat::Identity(m, m);
    Mat e(m, m - 1);
    const double tiny = 1e-12 * std::max(phi.norm(), 1e-300);
    for (int j = 0; j < m - 1; ++j) {
        Vec w = q.col(j + 1);
        for (int i = 0; i < j; ++i) w -= (phi * w).dot(phi * e.col(i)) * e.col(i);
        const double len = (phi * w).norm();
        if (len <= tiny * w.norm()) throw RankError("φ degenerates on the tangent space of the singular set");
        e.col(j) = w / len;
    }
    Mat frame(m, m);
    frame << e, eta;
    if (frame.determinant() < 0) e.col(m - 2) *= -1.0;
    return e;
}

/// η with dλ(η) > 0 and the conormal of the resulting oriented tangent frame.
struct SigmaFrame {
    Vec eta;
    Mat tangent;
    Vec n;
};

SigmaFrame sigma_frame(const Mat& phi, const Vec& grad) {
    SigmaFrame F;
    F.eta = null_direction(phi);
    if (grad.dot(F.eta) < 0) F.eta = -F.eta;
    F.tangent = sigma_tangent(phi, grad, F.eta);
    F.n = conormal(phi, F.tangent);
    return F;
}

/// 2-D rotation by +90°.
Vec perp(const Vec& v) { return Vec{{-v(1), v(0)}}; }

double difference_step(const FrontBundleField& field, const Vec& p, const Vec& X, double rel) {
    const Box& box = field.domain();
    const double diam = box.diameter();
    double s = rel * diam / X.norm();
    const double floor = 1e-3 * s;
    while (s > floor) {
        if (box.contains(p + 1.5 * s * X, 0.0) && box.contains(p - 1.5 * s * X, 0.0)) return s;
        s *= 0.5;
    }
    throw DomainError("difference stencil along the singular set leaves the domain");
}

/// ∂_X of a function of the point of Σ: central differences between projections of p ± sX,
/// Richardson-extrapolated from s and s/2.
Vec derivative_along_sigma(const FrontBundleField& field, const Vec& p, const Vec& X, double s, double scale,
                           const std::function<Vec(const Vec&)>& fn) {
    auto at = [&](double t) {
        const auto q = project_to_singular_set(field, p + t * X, scale);
        if (!q) throw DomainError("projection onto the singular set failed");
        return fn(*q);
    };
    auto central = [&](double t) -> Vec { return (at(t) - at(-t)) / (2.0 * t); };
    return (4.0 * central(0.5 * s) - central(s)) / 3.0;
}

template <typename T>
void sort_unique(std::vector<T>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

/// Union of points closer than `tol`; returns representative ids in first-seen order.
std::vector<int> merge_close(const std::vector<std::optional<Vec>>& pts, double tol, int& unique_count) {
    const int n = static_cast<int>(pts.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
    std::vector<int> order;
    for (int i = 0; i < n; ++i)
        if (pts[i]) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return (*pts[a])(0) < (*pts[b])(0) || ((*pts[a])(0) == (*pts[b])(0) && a < b);
    });
    for (std::size_t a = 0; a < order.size(); ++a)
        for (std::size_t b = a + 1; b < order.size(); ++b) {
            const Vec& pa = *pts[order[a]];
            const Vec& pb = *pts[order[b]];
            if (pb(0) - pa(0) > tol) break;
            if ((pa - pb).norm() <= tol) {
                const int ra = find(order[a]), rb = find(order[b]);
                if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
            }
        }
    std::vector<int> id(n, -1);
    std::vector<int> root_id(n, -1);
    unique_count = 0;
    for (int i = 0; i < n; ++i) {
        if (!pts[i]) continue;
        const int r = find(i);
        if (root_id[r] < 0) root_id[r] = unique_count++;
        id[i] = root_id[r];
    }
    return id;
}

void chain_segments(SingularSet& set, const std::vector<std::pair<int, int>>& segments) {
    const int n = static_cast<int>(set.nodes.size());
    std::vector<std::vector<int>> adj(n);
    for (const auto& [a, b] : segments) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& a : adj) sort_unique(a);
    std::set<std::pair<int, int>> used;
    auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
    auto walk = [&](int start, int next) {
        std::vector<int> chain{start};
        int prev = start, cur = next;
        used.insert(key(prev, cur));
        bool closed = false;
        while (true) {
            if (cur == start) {
                closed = true;
                break;
            }
            chain.push_back(cur);
            if (adj[cur].size() != 2) break;
            const int nxt = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
            if (used.count(key(cur, nxt))) break;
            used.insert(key(cur, nxt));
            prev = cur;
            cur = nxt;
        }
        set.curves.push_back(std::move(chain));
        set.closed.push_back(closed);
    };
    for (int i = 0; i < n; ++i) {
        if (adj[i].size() == 2) continue;
        for (int j : adj[i])
            if (!used.count(key(i, j))) walk(i, j);
    }
    for (int i = 0; i < n; ++i)
        for (int j : adj[i])
            if (!used.count(key(i, j))) walk(i, j);
}

}  // namespace

Vec phi_jacobian_gradient(const FrontBundleField& field, const Vec& p) { return local_jet(field, p).grad; }

double phi_jacobian_gradient_norm(const FrontBundleField& field, const Vec& p) {
    return phi_jacobian_gradient(field, p).norm();
}

std::optional<Vec> project_to_singular_set(const FrontBundleField& field, const Vec& start, double lambda_scale) {
    const Box& box = field.domain();
    const double diam = box.diameter();
    Vec q = start;
    for (int it = 0; it < 50; ++it) {
        if (!box.contains(q)) return std::nullopt;
        const Local L = local_jet(field, q);
        const double g2 = L.grad.squaredNorm();
        if (L.lambda == 0.0) return q;
        if (g2 == 0.0) return std::nullopt;
        const Vec step = (L.lambda / g2) * L.grad;
        q -= step;
        if (step.norm() <= 1e-13 * diam) {
            if (!box.contains(q)) return std::nullopt;
            if (std::abs(phi_jacobian(field, q)) > 1e-8 * lambda_scale) return std::nullopt;
            return q;
        }
    }
    return std::nullopt;
}

SingularSet extract_singular_set(const FrontBundleField& field, const DomainGrid& grid, const SingularTolerances& tol) {
    const int m = grid.dim();
    if (m != field.dim()) throw DimensionError("grid and field dimensions differ");
    if (m != 2 && m != 3) throw DimensionError("singular sets are extracted for m = 2 and m = 3");
    SingularSet set;
    set.m = m;

    const std::size_t total = grid.size();
    const int nu = grid.count(0), nv = grid.count(1), nw = m == 3 ? grid.count(2) : 1;
    auto node_of = [&](std::size_t id) {
        const int i = static_cast<int>(id % nu);
        const int j = static_cast<int>((id / nu) % nv);
        const int k = static_cast<int>(id / (static_cast<std::size_t>(nu) * nv));
        return m == 2 ? grid.node(i, j) : grid.node(i, j, k);
    };
    std::vector<double> lambda(total);
    parallel_for(total, [&](std::size_t id) { lambda[id] = phi_jacobian(field, node_of(id)); });
    double scale = 0.0;
    for (double l : lambda) scale = std::max(scale, std::abs(l));
    set.lambda_scale = scale;
    const double zero = 1e-14 * scale;

    std::map<std::pair<std::size_t, std::size_t>, int> edge_id;
    std::vector<Vec> crossing;
    auto cross = [&](std::size_t a, std::size_t b) {
        if (a > b) std::swap(a, b);
        const auto it = edge_id.find({a, b});
        if (it != edge_id.end()) return it->second;
        const double la = lambda[a], lb = lambda[b];
        const double t = la == lb ? 0.5 : la / (la - lb);
        crossing.push_back((1.0 - t) * node_of(a) + t * node_of(b));
        const int id = static_cast<int>(crossing.size()) - 1;
        edge_id.emplace(std::make_pair(a, b), id);
        return id;
    };
    auto positive = [&](std::size_t id) { return lambda[id] >= 0.0; };
    auto flat = [&](std::initializer_list<std::size_t> ids) {
        for (std::size_t id : ids)
            if (std::abs(lambda[id]) > zero) return false;
        return true;
    };

    std::vector<std::pair<int, int>> segments;
    std::vector<std::array<int, 3>> triangles;
    if (m == 2) {
        for (int j = 0; j + 1 < nv; ++j)
            for (int i = 0; i + 1 < nu; ++i) {
                const std::size_t c[4] = {grid.linear(i, j), grid.linear(i + 1, j), grid.linear(i + 1, j + 1),
                                          grid.linear(i, j + 1)};
                if (flat({c[0], c[1], c[2], c[3]})) {
                    ++set.degenerate_cells;
                    continue;
                }
                std::vector<int> edges;
                for (int e = 0; e < 4; ++e)
                    if (positive(c[e]) != positive(c[(e + 1) % 4])) edges.push_back(e);
                auto pt = [&](int e) { return cross(c[e], c[(e + 1) % 4]); };
                if (edges.size() == 2) {
                    segments.emplace_back(pt(edges[0]), pt(edges[1]));
                } else if (edges.size() == 4) {
                    const double centre = 0.25 * (lambda[c[0]] + lambda[c[1]] + lambda[c[2]] + lambda[c[3]]);
                    if ((centre >= 0.0) == positive(c[0])) {
                        segments.emplace_back(pt(0), pt(1));
                        segments.emplace_back(pt(2), pt(3));
                    } else {
                        segments.emplace_back(pt(3), pt(0));
                        segments.emplace_back(pt(1), pt(2));
                    }
                }
            }
    } else {
        static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        for (int k = 0; k + 1 < nw; ++k)
            for (int j = 0; j + 1 < nv; ++j)
                for (int i = 0; i + 1 < nu; ++i) {
                    auto corner = [&](int bits) {
                        return grid.linear(i + (bits & 1), j + ((bits >> 1) & 1), k + ((bits >> 2) & 1));
                    };
                    bool all_flat = true;
                    for (int b = 0; b < 8 && all_flat; ++b) all_flat = flat({corner(b)});
                    if (all_flat) {
                        ++set.degenerate_cells;
                        continue;
                    }
                    for (const auto& perm : perms) {
                        const int b1 = 1 << perm[0], b2 = b1 | (1 << perm[1]);
                        const std::size_t v[4] = {corner(0), corner(b1), corner(b2), corner(7)};
                        std::vector<int> pos, neg;
                        for (int a = 0; a < 4; ++a) (positive(v[a]) ? pos : neg).push_back(a);
                        if (pos.empty() || neg.empty()) continue;
                        if (pos.size() == 1 || neg.size() == 1) {
                            const auto& lone = pos.size() == 1 ? pos : neg;
                            const auto& rest = pos.size() == 1 ? neg : pos;
                            triangles.push_back({cross(v[lone[0]], v[rest[0]]), cross(v[lone[0]], v[rest[1]]),
                                                 cross(v[lone[0]], v[rest[2]])});
                        } else {
                            const int ac = cross(v[pos[0]], v[neg[0]]), ad = cross(v[pos[0]], v[neg[1]]);
                            const int bd = cross(v[pos[1]], v[neg[1]]), bc = cross(v[pos[1]], v[neg[0]]);
                            triangles.push_back({ac, ad, bd});
                            triangles.push_back({ac, bd, bc});
                        }
                    }
                }
    }

    std::vector<std::optional<Vec>> projected(crossing.size());
    parallel_for(crossing.size(), [&](std::size_t c) {
        auto q = project_to_singular_set(field, crossing[c], scale);
        if (q && std::abs(phi_jacobian(field, *q)) >= tol.node * scale) q.reset();
        projected[c] = std::move(q);
    });
    for (const auto& q : projected)
        if (!q) ++set.dropped;

    int unique_count = 0;
    const std::vector<int> id = merge_close(projected, 1e-9 * field.domain().diameter(), unique_count);
    set.nodes.resize(unique_count);
    for (std::size_t c = 0; c < projected.size(); ++c)
        if (id[c] >= 0) set.nodes[id[c]] = *projected[c];

    if (m == 2) {
        std::vector<std::pair<int, int>> kept;
        for (const auto& [a, b] : segments) {
            const int ia = id[a], ib = id[b];
            if (ia < 0 || ib < 0 || ia == ib) continue;
            kept.emplace_back(std::min(ia, ib), std::max(ia, ib));
        }
        sort_unique(kept);
        chain_segments(set, kept);
    } else {
        for (const auto& t : triangles) {
            const std::array<int, 3> r{id[t[0]], id[t[1]], id[t[2]]};
            if (r[0] < 0 || r[1] < 0 || r[2] < 0) continue;
            if (r[0] == r[1] || r[1] == r[2] || r[0] == r[2]) continue;
            set.triangles.push_back(r);
        }
    }
    return set;
}

Vec conormal(const Mat& phi, const Mat& basis) {
    const int m = static_cast<int>(phi.cols());
    if (basis.rows() != m || basis.cols() != m - 1) throw DimensionError("conormal needs m − 1 tangent vectors");
    const Mat images = phi * basis;
    const double tiny = 1e-12 * std::max(phi.norm() * basis.norm(), 1e-300);
    if (m == 2) {
        const double len = images.col(0).norm();
        if (len <= tiny) throw RankError("φ(e_1) vanishes");
        return perp(images.col(0) / len);
    }
    if (m == 3) {
        const Eigen::Vector3d a = images.col(0), b = images.col(1);
        if (a.norm() <= tiny) throw RankError("φ(e_1) vanishes");
        const Eigen::Vector3d w1 = a.normalized();
        const Eigen::Vector3d r = b - b.dot(w1) * w1;
        if (r.norm() <= tiny) throw RankError("φ(e_1), φ(e_2) are dependent");
        const Eigen::Vector3d n = w1.cross(r.normalized());
        return Vec(n);
    }
    throw DimensionError("conormal is implemented for m = 2 and m = 3");
}

Vec conormal(const FrontBundleField& field, const Vec& p, const Mat& basis) {
    return conormal(eval_phi(field, p), basis);
}

SingularPointRecord classify_singular_point(const FrontBundleField& field, const Vec& p, const SingularTolerances& tol,
                                            double gradient_scale) {
    const int m = field.dim();
    const Local L = local_jet(field, p);
    SingularPointRecord r;
    r.location = p;
    r.lambda = L.lambda;
    r.dlambda = L.grad;

    Eigen::JacobiSVD<Mat> svd(L.phi, Eigen::ComputeFullV);
    const Vec sv = svd.singularValues();
    if (m >= 2 && sv(m - 2) <= 1e-10 * std::max(sv(0), 1e-300)) throw RankError("rank φ < m − 1 at a singular point");
    r.eta = svd.matrixV().col(m - 1);

    double bound = 0.0;
    const Mat adj = adjugate(L.phi);
    for (int k = 0; k < m; ++k) bound += std::pow(adj.norm() * L.jet.partial[k].phi.norm(), 2);
    bound = std::sqrt(bound);
    const double gnorm = L.grad.norm();
    if (gnorm <= tol.nondegenerate * bound) {
        r.classification = SingularClass::degenerate;
        r.lambda_prime = L.grad.dot(r.eta);
        return r;
    }
    if (L.grad.dot(r.eta) < 0) r.eta = -r.eta;
    r.lambda_prime = L.grad.dot(r.eta);
    const double gs = gradient_scale > 0.0 ? gradient_scale : gnorm;
    if (std::abs(r.lambda_prime) <= tol.a2 * gs) {
        r.classification = SingularClass::nondegenerate_non_A2;
        return r;
    }
    r.classification = SingularClass::A2;
    r.tangent = sigma_tangent(L.phi, L.grad, r.eta);
    r.conormal = conormal(L.phi, r.tangent);
    return r;
}

void singular_shape_operator(const FrontBundleField& field, SingularPointRecord& r, const SingularTolerances& tol) {
    if (r.classification != SingularClass::A2) throw ClassificationError("singular shape operator needs an A2 point");
    const int m = field.dim();
    const Vec& p = r.location;
    const BundleSample s = field.sample(p);
    const double scale = local_scale(s.phi);
    const double sgn = r.lambda_prime > 0 ? 1.0 : -1.0;
    const double diam = field.domain().diameter();

    auto n_at = [&](const Vec& q) {
        const Local L = local_jet(field, q);
        return sigma_frame(L.phi, L.grad).n;
    };
    Mat S(m - 1, m - 1);
    for (int b = 0; b < m - 1; ++b) {
        const Vec X = r.tangent.col(b);
        const double h = difference_step(field, p, X, tol.step);
        const Vec dn = derivative_along_sigma(field, p, X, h, scale, n_at) + s.conn_along(X) * r.conormal;
        const double leak = std::abs(dn.dot(r.conormal));
        if (leak > tol.conormal_leak * std::max(dn.norm(), 1.0 / diam))
            throw ConsistencyError("D_X n has a component along the conormal");
        for (int a = 0; a < m - 1; ++a) S(a, b) = -sgn * (s.phi * r.tangent.col(a)).dot(dn);
    }
    r.shape_operator = S;
    r.symmetry_residual = (S - S.transpose()).cwiseAbs().maxCoeff();

    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (S + S.transpose()));
    const Vec vals = eig.eigenvalues();
    r.kappas.assign(vals.data(), vals.data() + vals.size());
    r.kappa_directions.clear();
    auto canonical = [](Vec v) {
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (std::abs(v(i)) > 1e-12) {
                if (v(i) < 0) v = -v;
                break;
            }
        return v;
    };
    bool tie = false;
    for (int a = 0; a + 1 < m - 1; ++a)
        tie = tie || std::abs(vals(a + 1) - vals(a)) <= 1e-10 * (1.0 + std::abs(vals(a)));
    if (tie) {
        std::vector<Vec> dirs;
        for (int a = 0; a < m - 1; ++a) dirs.push_back(canonical(r.tangent.col(a)));
        std::sort(dirs.begin(), dirs.end(), [](const Vec& x, const Vec& y) {
            return std::lexicographical_compare(x.data(), x.data() + x.size(), y.data(), y.data() + y.size());
        });
        r.kappa_directions = dirs;
    } else {
        for (int a = 0; a < m - 1; ++a) r.kappa_directions.push_back(canonical(r.tangent * eig.eigenvectors().col(a)));
    }
}

SingularPointRecord singular_principal_curvatures(const FrontBundleField& field, const Vec& p,
                                                  const SingularTolerances& tol) {
    SingularPointRecord r = classify_singular_point(field, p, tol);
    singular_shape_operator(field, r, tol);
    return r;
}

double singular_curvature_2d(const FrontBundleField& field, const SingularSet& set, int curve, int index, bool reversed,
                             const SingularTolerances& tol) {
    if (set.m != 2 || field.dim() != 2) throw DimensionError("singular curvature of a curve needs m = 2");
    const std::vector<int>& nodes = set.curves.at(curve);
    if (nodes.size() < 2) throw InputError("curve has fewer than two nodes");
    const int last = static_cast<int>(nodes.size()) - 1;
    const Vec& p = set.nodes.at(nodes.at(index));
    Vec direction = set.nodes[nodes[std::min(index + 1, last)]] - set.nodes[nodes[std::max(index - 1, 0)]];
    if (reversed) direction = -direction;

    const SingularPointRecord r = classify_singular_point(field, p, tol);
    if (r.classification != SingularClass::A2) throw ClassificationError("singular curvature needs an A2 point");
    const Local L = local_jet(field, p);
    auto tangent_at = [&](const Vec& grad) {
        Vec t = perp(grad);
        return t.dot(direction) < 0 ? Vec(-t) : t;
    };
    const Vec gamma = tangent_at(L.grad);
    Vec eta = null_direction(L.phi);
    if (gamma(0) * eta(1) - gamma(1) * eta(0) < 0) eta = -eta;
    const double sgn = L.grad.dot(eta) > 0 ? 1.0 : -1.0;
    // n as the left null vector of φ: independent of the tangent-frame route above.
    auto n_at = [&](const Vec& q) {
        const Local Q = local_jet(field, q);
        Eigen::JacobiSVD<Mat> svd(Q.phi, Eigen::ComputeFullU);
        Vec n = svd.matrixU().col(1);
        const Vec image = Q.phi * tangent_at(Q.grad);
        if (image(0) * n(1) - image(1) * n(0) < 0) n = -n;
        return n;
    };
    const Vec n = n_at(p);
    const double h = difference_step(field, p, gamma, tol.step);
    const Vec dn = derivative_along_sigma(field, p, gamma, h, local_scale(L.phi), n_at) +
                   L.jet.value.conn_along(gamma) * n;
    const Vec image = L.phi * gamma;
    return -sgn * dn.dot(image) / image.squaredNorm();
}

double extrinsic_curvature(const FrontBundleField& field, const Vec& p, const Vec& X, const Vec& Y) {
    const BundleSample s = field.sample(p);
    const double lambda = s.phi.determinant();
    if (std::abs(lambda) <= 1e-12 * local_scale(s.phi)) throw RegularityError("extrinsic curvature at a singular point");
    const double xy = X.dot(Y);
    if (X.squaredNorm() * Y.squaredNorm() - xy * xy <= 1e-24 * X.squaredNorm() * Y.squaredNorm())
        throw DegeneratePlaneError("X and Y do not span a plane");
    const FundamentalForms f = fundamental_forms(s);
    return plane_curvature(f.I, f.II, X, Y);
}

std::optional<Vec> AdaptedChart::point(const FrontBundleField& field, const Vec& u) const {
    const int m = static_cast<int>(u.size());
    const double um = u(m - 1);
    const Vec shifted = u.head(m - 1) - um * um * shift;
    const auto sigma = project_to_singular_set(field, p + tangents * shifted, lambda_scale);
    if (!sigma) return std::nullopt;
    Vec e = null_direction(field.sample(*sigma).phi);
    if (e.dot(eta) < 0) e = -e;
    return Vec(*sigma + um * e);
}

Mat AdaptedChart::jacobian(const FrontBundleField& field, const Vec& u, double h) const {
    const int m = static_cast<int>(u.size());
    Mat J(m, m);
    auto at = [&](const Vec& v) {
        const auto x = point(field, v);
        if (!x) throw DomainError("adapted chart leaves the domain");
        return *x;
    };
    for (int j = 0; j < m; ++j) {
        const Vec e = Vec::Unit(m, j) * h;
        J.col(j) = (-at(u + 2 * e) + 8 * at(u + e) - 8 * at(u - e) + at(u - 2 * e)) / (12 * h);
    }
    return J;
}

AdaptedChart adapted_coordinates(const FrontBundleField& field, const Vec& p, const Vec& X,
                                 const SingularTolerances& tol) {
    const int m = field.dim();
    const SingularPointRecord r = classify_singular_point(field, p, tol);
    if (r.classification != SingularClass::A2) throw ClassificationError("adapted coordinates need an A2 point");
    if (std::abs(r.dlambda.dot(X)) > 1e-6 * r.dlambda.norm() * X.norm())
        throw PreconditionError("X is not tangent to the singular set");
    const Local L = local_jet(field, p);

    AdaptedChart c;
    c.p = p;
    c.eta = r.eta;
    c.lambda_scale = local_scale(L.phi);
    c.tangents.resize(m, m - 1);
    c.tangents.col(0) = X.normalized();
    if (m == 3) {
        Vec t = r.tangent.col(0);
        if (std::abs((L.phi * t).dot(L.phi * c.tangents.col(0))) > std::abs((L.phi * r.tangent.col(1)).dot(L.phi * c.tangents.col(0))))
            t = r.tangent.col(1);
        const Vec a = L.phi * c.tangents.col(0);
        t -= (L.phi * t).dot(a) / a.squaredNorm() * c.tangents.col(0);
        t.normalize();
        Mat frame(3, 3);
        frame << c.tangents.col(0), t, c.eta;
        c.tangents.col(1) = frame.determinant() < 0 ? Vec(-t) : t;
    }
    c.phi_tangent = L.phi * c.tangents;
    const Vec dphi_mm = L.jet.covariant_phi(c.eta) * c.eta;
    const Mat h = c.phi_tangent.transpose() * c.phi_tangent;
    Eigen::JacobiSVD<Mat> hsvd(h);
    if (hsvd.singularValues()(m - 2) <= 1e-12 * hsvd.singularValues()(0))
        throw RankError("singular tangent metric in the adapted chart");
    c.shift = (2.0 * h).ldlt().solve(c.phi_tangent.transpose() * dphi_mm);
    c.covariant_phi_mm = dphi_mm - 2.0 * c.phi_tangent * c.shift;
    c.psi_m = L.jet.value.psi * c.eta;
    c.property4_residual = (c.phi_tangent.transpose() * c.covariant_phi_mm).cwiseAbs().maxCoeff();
    return c;
}

double limit_extrinsic_curvature_at_A2(const FrontBundleField& field, const Vec& p, const Vec& X,
                                       const SingularTolerances& tol) {
    const int m = field.dim();
    const AdaptedChart chart = adapted_coordinates(field, p, X, tol);
    const double diam = field.domain().diameter();
    const double h = 2e-4 * diam, s0 = 4e-3 * diam;

    struct Triple {
        double A, B, C;
    };
    auto forms_at = [&](double s) {
        Vec u = Vec::Zero(m);
        u(m - 1) = s;
        const auto x = chart.point(field, u);
        if (!x) throw DomainError("adapted chart leaves the domain");
        const Mat J = chart.jacobian(field, u, h);
        const BundleSample b = field.sample(*x);
        const Vec phi1 = b.phi * J.col(0), phim = b.phi * J.col(m - 1);
        const Vec psi1 = b.psi * J.col(0), psim = b.psi * J.col(m - 1);
        return Triple{phi1.dot(psi1), phim.dot(psim), phim.dot(psi1)};
    };
    auto central = [&](double s) {
        const Triple a = forms_at(s), b = forms_at(-s);
        return Triple{(a.A - b.A) / (2 * s), (a.B - b.B) / (2 * s), (a.C - b.C) / (2 * s)};
    };
    const Triple c1 = central(s0), c2 = central(0.5 * s0);
    const double dA = (4 * c2.A - c1.A) / 3, dB = (4 * c2.B - c1.B) / 3, dC = (4 * c2.C - c1.C) / 3;

    const Vec phi1 = chart.phi_tangent.col(0);
    const Vec& d = chart.covariant_phi_mm;
    const double wedge = phi1.squaredNorm() * d.squaredNorm() - std::pow(phi1.dot(d), 2);
    return (dA * dB - dC * dC) / wedge;
}

BddReport theorem_bdd_report(const FrontBundleField& field, const std::vector<SingularPointRecord>& records,
                             const BddOptions& options) {
    const int m = field.dim();
    const Box& box = field.domain();
    const double diam = box.diameter();
    BddReport rep;
    std::vector<std::optional<BddNode>> rows(records.size());
    parallel_for(records.size(), [&](std::size_t i) {
        const SingularPointRecord& r = records[i];
        if (r.classification != SingularClass::A2 || r.kappas.empty()) return;
        std::vector<Vec> fan;
        if (m == 2) {
            fan.push_back(r.tangent.col(0));
        } else {
            for (int a = 0; a < options.fan; ++a) {
                const double alpha = std::numbers::pi * a / options.fan;
                fan.push_back(std::cos(alpha) * r.tangent.col(0) + std::sin(alpha) * r.tangent.col(1));
            }
        }
        BddNode row;
        row.node = static_cast<int>(i);
        row.min_kext = std::numeric_limits<double>::infinity();
        double logs[3], maxes[3];
        try {
            for (int k = 0; k < 3; ++k) {
                const double eps = options.offset * diam / std::pow(2.0, k);
                double mx = 0.0;
                for (const Vec& X : fan) {
                    double side[2];
                    for (int sgn = 0; sgn < 2; ++sgn) {
                        const Vec q = r.location + (sgn == 0 ? eps : -eps) * r.eta;
                        if (!box.contains(q, 0.0)) throw DomainError("fan leaves the domain");
                        side[sgn] = extrinsic_curvature(field, q, X, r.eta);
                        mx = std::max(mx, std::abs(side[sgn]));
                        row.min_kext = std::min(row.min_kext, side[sgn]);
                    }
                    if (k == 2 && side[0] * side[1] < 0) row.sign_change = true;
                }
                logs[k] = std::log(eps);
                maxes[k] = mx;
            }
        } catch (const Error&) {
            return;
        }
        row.max_abs_kext = maxes[2];
        if (maxes[0] > 0 && maxes[1] > 0 && maxes[2] > 0) {
            double mx = 0, my = 0;
            for (int k = 0; k < 3; ++k) mx += logs[k] / 3, my += std::log(maxes[k]) / 3;
            double sxy = 0, sxx = 0;
            for (int k = 0; k < 3; ++k) {
                sxy += (logs[k] - mx) * (std::log(maxes[k]) - my);
                sxx += (logs[k] - mx) * (logs[k] - mx);
            }
            row.growth_exponent = sxy / sxx;
        }
        const BundleSample s = field.sample(r.location);
        row.second_form_norm = fundamental_forms(s).II.norm();
        rows[i] = row;
    });

    double ii_scale = 1.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!rows[i]) {
            rep.excluded.push_back(static_cast<int>(i));
            continue;
        }
        const BddNode& row = *rows[i];
        rep.nodes.push_back(row);
        const BundleSample s = field.sample(records[i].location);
        ii_scale = std::max(ii_scale, s.phi.norm() * s.psi.norm());
        for (double k : records[i].kappas) {
            if (k < -options.kappa_zero) ++rep.kappa_negative;
            else if (k > options.kappa_zero) ++rep.kappa_positive;
            else ++rep.kappa_zero;
        }
    }
    if (rep.nodes.empty()) return rep;

    rep.min_growth_exponent = std::numeric_limits<double>::infinity();
    rep.max_growth_exponent = -std::numeric_limits<double>::infinity();
    rep.min_kext = std::numeric_limits<double>::infinity();
    bool unbounded_all_change = true;
    for (const BddNode& row : rep.nodes) {
        rep.max_second_form_on_sigma = std::max(rep.max_second_form_on_sigma, row.second_form_norm);
        rep.min_growth_exponent = std::min(rep.min_growth_exponent, row.growth_exponent);
        rep.max_growth_exponent = std::max(rep.max_growth_exponent, row.growth_exponent);
        rep.min_kext = std::min(rep.min_kext, row.min_kext);
        rep.sign_change = rep.sign_change || row.sign_change;
        if (row.growth_exponent < options.unbounded_exponent) {
            rep.bounded = false;
            unbounded_all_change = unbounded_all_change && row.sign_change;
        }
    }
    if (rep.bounded)
        rep.item1 = rep.max_second_form_on_sigma <= options.second_form_zero * ii_scale ? ItemStatus::passed
                                                                                        : ItemStatus::failed;
    else
        rep.item2 = unbounded_all_change ? ItemStatus::passed : ItemStatus::failed;
    if (rep.min_kext >= -options.kext_zero)
        rep.item3 = rep.kappa_positive == 0 ? ItemStatus::passed : ItemStatus::failed;
    if (rep.bounded && rep.min_kext > options.kext_zero)
        rep.item3_strict = rep.kappa_positive == 0 && rep.kappa_zero == 0 ? ItemStatus::passed : ItemStatus::failed;
    return rep;
}

AnalysisReport analyze(const FrontBundleField& field, const DomainGrid& grid, const SingularTolerances& tol,
                       const BddOptions& options) {
    AnalysisReport out;
    out.set = extract_singular_set(field, grid, tol);
    const auto& nodes = out.set.nodes;
    std::vector<double> gnorm(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) { gnorm[i] = phi_jacobian_gradient_norm(field, nodes[i]); });
    double gscale = 0.0;
    for (double g : gnorm) gscale = std::max(gscale, g);

    out.records.resize(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) {
        SingularPointRecord& r = out.records[i];
        try {
            r = classify_singular_point(field, nodes[i], tol, gscale);
        } catch (const RankError& e) {
            r.location = nodes[i];
            r.lambda = phi_jacobian(field, nodes[i]);
            r.note = e.what();
            return;
        }
        if (r.classification != SingularClass::A2) return;
        try {
            singular_shape_operator(field, r, tol);
        } catch (const Error& e) {
            r.note = e.what();
        }
    });
    out.bdd = theorem_bdd_report(field, out.records, options);
    return out;
}

void write_analysis_csv(const std::string& path, const AnalysisReport& report) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot write " + path);
    const int m = report.set.m;
    static const char* axes[3] = {"u", "v", "w"};
    for (int a = 0; a < m; ++a) os << axes[a] << ',';
    os << "lambda,lambda_prime,class";
    for (int a = 0; a < m; ++a) os << ",eta_" << axes[a];
    for (int a = 0; a < m - 1; ++a) os << ",kappa_" << a + 1;
    os << ",growth_exponent\r\n";
    std::unordered_map<int, double> growth;
    for (const BddNode& row : report.bdd.nodes) growth[row.node] = row.growth_exponent;
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (std::size_t i = 0; i < report.records.size(); ++i) {
        const SingularPointRecord& r = report.records[i];
        for (int a = 0; a < m; ++a) os << num(r.location(a)) << ',';
        os << num(r.lambda) << ',' << num(r.lambda_prime) << ',' << to_string(r.classification);
        for (int a = 0; a < m; ++a) os << ',' << (r.eta.size() == m ? num(r.eta(a)) : "");
        for (int a = 0; a < m - 1; ++a)
            os << ',' << (static_cast<int>(r.kappas.size()) == m - 1 ? num(r.kappas[a]) : "");
        const auto g = growth.find(static_cast<int>(i));
        os << ',' << (g != growth.end() ? num(g->second) : "") << "\r\n";
    }
}

}  // namespace frontforge
