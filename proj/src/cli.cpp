#include "frontforge/cli.hpp"

#include "frontforge/acceptance.hpp"
#include "frontforge/errors.hpp"
#include "frontforge/fixtures.hpp"
#include "frontforge/integrability.hpp"
#include "frontforge/realizer.hpp"
#include "frontforge/singular.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

namespace frontforge::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kSceneKeys{"field", "c", "grid", "outputs", "tolerances", "seed"};
const std::set<std::string> kToleranceKeys{"residual",   "integrability", "newton", "newton_iterations", "node",
                                           "nondegenerate", "a2",       "step",   "conormal_leak"};
const std::set<std::string> kFormats{"obj", "csv", "json"};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// JSON has no NaN or infinity; those become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void ensure_parent(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::ofstream open_output(const std::string& path) {
    ensure_parent(path);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot write " + path);
    return os;
}

void write_json(const std::string& path, const json& doc) {
    std::ofstream os = open_output(path);
    os << doc.dump(2) << '\n';
}

/// RFC 4180 rows: CRLF terminated, fields quoted only when they need it.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : os_(open_output(path)) {}

    void row(const std::vector<std::string>& fields) {
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (k) os_ << ',';
            os_ << quote(fields[k]);
        }
        os_ << "\r\n";
    }

private:
    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"') q += '"';
            q += ch;
        }
        return q + '"';
    }

    std::ofstream os_;
};

double require_number(const json& j, const std::string& what) {
    if (!j.is_number()) throw ConfigError(what + " must be a number");
    return j.get<double>();
}

/// "name:key=value,key=value" → (name, parameters).
std::pair<std::string, std::map<std::string, double>> split_name(const std::string& spec) {
    const auto colon = spec.find(':');
    std::map<std::string, double> params;
    if (colon != std::string::npos) {
        std::stringstream rest(spec.substr(colon + 1));
        std::string item;
        while (std::getline(rest, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError("field parameter '" + item + "' is not key=value");
            const std::string value = item.substr(eq + 1);
            try {
                std::size_t used = 0;
                params[item.substr(0, eq)] = std::stod(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
            } catch (const std::exception&) {
                throw ConfigError("field parameter '" + item + "' has a non-numeric value");
            }
        }
    }
    return {spec.substr(0, colon), params};
}

bool is_frontal_fixture(const std::string& base) {
    for (const std::string& n : frontal_fixture_names())
        if (n == base) return true;
    return false;
}

double take(std::map<std::string, double>& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    if (it == params.end()) return fallback;
    const double v = it->second;
    params.erase(it);
    return v;
}

void reject_leftovers(const std::map<std::string, double>& params, const std::string& field) {
    if (!params.empty()) throw ConfigError("unknown parameter '" + params.begin()->first + "' for field " + field);
}

Box box2(double lo, double hi) {
    Vec a(2), b(2);
    a << lo, lo;
    b << hi, hi;
    return {a, b};
}

Box box_of(const DomainGrid& g) { return g.box(); }

/// Grid from the scene's `grid` key, or over `fallback` with `default_n` nodes per axis.
DomainGrid scene_grid(const json& spec, const Box& fallback, const std::vector<int>& default_n) {
    const int m = fallback.dim();
    Vec lo = fallback.lo, hi = fallback.hi;
    std::vector<int> n = default_n;
    if (!spec.is_null()) {
        if (spec.contains("bounds")) {
            const json& b = spec["bounds"];
            if (!b.is_array() || static_cast<int>(b.size()) != m)
                throw ConfigError("grid.bounds needs " + std::to_string(m) + " [lo, hi] pairs");
            for (int a = 0; a < m; ++a) {
                if (!b[a].is_array() || b[a].size() != 2) throw ConfigError("grid.bounds entries are [lo, hi]");
                lo(a) = require_number(b[a][0], "grid bound");
                hi(a) = require_number(b[a][1], "grid bound");
                if (!(lo(a) < hi(a))) throw ConfigError("grid.bounds need lo < hi");
            }
        }
        if (spec.contains("resolution")) {
            const json& r = spec["resolution"];
            if (r.is_number_integer()) {
                n.assign(m, r.get<int>());
            } else if (r.is_array() && static_cast<int>(r.size()) == m) {
                for (int a = 0; a < m; ++a) {
                    if (!r[a].is_number_integer()) throw ConfigError("grid.resolution entries are integers");
                    n[a] = r[a].get<int>();
                }
            } else {
                throw ConfigError("grid.resolution needs " + std::to_string(m) + " integers");
            }
            for (int k : n)
                if (k < 2) throw ConfigError("grid.resolution needs at least 2 nodes per axis");
        }
    }
    return m == 2 ? DomainGrid::plane(lo(0), hi(0), n[0], lo(1), hi(1), n[1])
                  : DomainGrid::solid(lo(0), hi(0), n[0], lo(1), hi(1), n[1], lo(2), hi(2), n[2]);
}

void require_inside(const DomainGrid& grid, const Box& domain) {
    const Box g = grid.box();
    if (!domain.contains(g.lo) || !domain.contains(g.hi)) throw ConfigError("grid bounds leave the field's domain");
}

SingularTolerances singular_tolerances(const SceneConfig& scene) {
    SingularTolerances t;
    t.node = scene.tolerance("node", t.node);
    t.nondegenerate = scene.tolerance("nondegenerate", t.nondegenerate);
    t.a2 = scene.tolerance("a2", t.a2);
    t.step = scene.tolerance("step", t.step);
    t.conormal_leak = scene.tolerance("conormal_leak", t.conormal_leak);
    return t;
}

json grid_json(const DomainGrid& g) {
    json bounds = json::array(), res = json::array();
    for (int a = 0; a < g.dim(); ++a) {
        bounds.push_back({g.lower(a), g.upper(a)});
        res.push_back(g.count(a));
    }
    return {{"bounds", bounds}, {"resolution", res}};
}

/// Grid-node curvature c of the resolved scene: explicit, else the field's natural value.
double scene_c(const SceneConfig& scene, double natural) { return scene.has_c ? scene.c : natural; }

struct Resolved {
    ResolvedField rf;
    double natural_c = 0.0;
};

Resolved resolve(const SceneConfig& scene) {
    const json& f = scene.field;
    std::string name;
    std::optional<FrontBundleField> field;
    DomainGrid grid;
    std::optional<ThetaField::ExactFn> theta;
    double natural_c = 0.0;
    auto finish = [&] { return Resolved{ResolvedField{name, *field, grid, theta}, natural_c}; };

    if (f.is_object() && f.contains("theta_csv")) {
        for (const auto& [k, v] : f.items())
            if (k != "theta_csv" && k != "bundle") throw ConfigError("unknown key '" + k + "' in field");
        if (!f["theta_csv"].is_string()) throw ConfigError("field.theta_csv must be a path");
        const std::string bundle = f.value("bundle", std::string("chebyshev"));
        const ThetaField table = [&] {
            try {
                return read_theta_csv(f["theta_csv"].get<std::string>());
            } catch (const InputError& e) {
                throw ConfigError(e.what());
            }
        }();
        if (bundle == "chebyshev") {
            field.emplace(chebyshev_bundle(table));
        } else if (bundle == "curvature-line") {
            field.emplace(curvatureline_bundle(table));
        } else {
            throw ConfigError("field.bundle must be chebyshev or curvature-line");
        }
        name = bundle + ":" + f["theta_csv"].get<std::string>();
        grid = scene.grid.is_null() ? table.grid() : scene_grid(scene.grid, box_of(table.grid()), {table.grid().count(0), table.grid().count(1)});
        require_inside(grid, field->domain());
        return finish();
    }

    std::string base;
    std::map<std::string, double> params;
    if (f.is_string()) {
        std::tie(base, params) = split_name(f.get<std::string>());
    } else if (f.is_object() && f.contains("name") && f["name"].is_string()) {
        base = f["name"].get<std::string>();
        for (const auto& [k, v] : f.items())
            if (k != "name") params[k] = require_number(v, "field." + k);
    } else {
        throw ConfigError("field must be a name, {\"name\": …} or {\"theta_csv\": …}");
    }
    name = base;
    for (const auto& [k, v] : params) name += (k == params.begin()->first ? ":" : ",") + k + "=" + fmt(v);

    if (is_frontal_fixture(base)) {
        ParametrizedFrontal F;
        try {
            F = frontal_fixture_by_name(name);
        } catch (const InputError& e) {
            throw ConfigError(e.what());
        }
        field.emplace(induce_bundle(F));
        natural_c = F.model.curvature();
        const std::vector<int> n = F.m == 2 ? std::vector<int>{101, 101} : std::vector<int>{9, 9, 4};
        grid = scene_grid(scene.grid, F.domain, n);
        require_inside(grid, F.domain);
        return finish();
    }

    const Box fallback = base == "chebyshev-soliton" || base == "sinh-wave" ? box2(-2, 2) : box2(-1, 1);
    grid = scene_grid(scene.grid, fallback, {101, 101});
    const Box box = grid.box();
    if (base == "flat") {
        field.emplace(flat_field(box));
    } else if (base == "polar") {
        field.emplace(polar_map_field(box));
    } else if (base == "cubic") {
        field.emplace(cubic_map_field(box));
    } else if (base == "fold") {
        field.emplace(fold_field(box));
    } else if (base == "chebyshev-soliton") {
        const double a = take(params, "a", 1.0), b = take(params, "b", 1.0);
        field.emplace(soliton_chebyshev_field(box, a, b));
        theta = soliton_jet(a, b);
        natural_c = 1.0 - a * b;
    } else if (base == "sinh-wave") {
        const double slope = take(params, "slope", 1.0), angle = take(params, "angle", 0.3);
        field.emplace(sinh_wave_field(box, slope, angle));
        theta = sinh_gordon_wave(slope, angle, box);
    } else {
        throw ConfigError("unknown field '" + base + "'");
    }
    reject_leftovers(params, base);
    return finish();
}

std::string class_name(SingularClass c) { return to_string(c); }

/// Bilinear interpolation of the realized positions at a domain point.
Vec interpolate_position(const RealizedFront& R, const Vec& p) {
    const DomainGrid& g = R.grid;
    auto cell = [&](int axis, double x, double& t) {
        const double s = (x - g.lower(axis)) / g.step(axis);
        const int i = std::clamp(static_cast<int>(std::floor(s)), 0, g.count(axis) - 2);
        t = s - i;
        return i;
    };
    double tu = 0, tv = 0;
    const int i = cell(0, p(0), tu), j = cell(1, p(1), tv);
    return (1 - tu) * (1 - tv) * R.position(i, j) + tu * (1 - tv) * R.position(i + 1, j) +
           (1 - tu) * tv * R.position(i, j + 1) + tu * tv * R.position(i + 1, j + 1);
}

/// Stereographic projection from −e_0 (sphere) or the Poincaré ball (hyperboloid): x[1:]/(1 + x_0).
Vec project_model(const Vec& x) { return x.tail(x.size() - 1) / (1.0 + x(0)); }

void write_vertex(std::ostream& os, const Vec& x) {
    os << 'v';
    for (Eigen::Index a = 0; a < x.size(); ++a) os << ' ' << fmt(x(a));
    os << '\n';
}

void write_faces(std::ostream& os, const DomainGrid& g, bool normals) {
    auto id = [&](int i, int j) { return g.linear(i, j) + 1; };
    auto corner = [&](std::size_t k) { return normals ? std::to_string(k) + "//" + std::to_string(k) : std::to_string(k); };
    for (int j = 0; j + 1 < g.count(1); ++j)
        for (int i = 0; i + 1 < g.count(0); ++i) {
            const std::size_t a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            os << "f " << corner(a) << ' ' << corner(b) << ' ' << corner(c) << '\n';
            os << "f " << corner(a) << ' ' << corner(c) << ' ' << corner(d) << '\n';
        }
}

void write_polylines(std::ostream& os, const SingularSet& set, const std::vector<Vec>& points) {
    for (const Vec& x : points) write_vertex(os, x);
    for (std::size_t c = 0; c < set.curves.size(); ++c) {
        const auto& curve = set.curves[c];
        if (curve.size() < 2) continue;
        os << 'l';
        for (int k : curve) os << ' ' << k + 1;
        if (set.closed[c]) os << ' ' << curve.front() + 1;
        os << '\n';
    }
    for (const auto& t : set.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

std::vector<std::string> split_commas(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const std::string& s : items) {
        std::stringstream ss(s);
        std::string part;
        while (std::getline(ss, part, ','))
            if (!part.empty()) out.push_back(part);
    }
    return out;
}

}  // namespace

bool OutputSpec::wants(const std::string& format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

std::string OutputSpec::path(const std::string& suffix) const {
    const std::string name = prefix.empty() ? suffix : prefix + "_" + suffix;
    return (std::filesystem::path(directory) / name).string();
}

double SceneConfig::tolerance(const std::string& key, double fallback) const {
    const auto it = tolerances.find(key);
    return it == tolerances.end() ? fallback : it->second;
}

SceneConfig parse_scene(const json& doc) {
    if (!doc.is_object()) throw ConfigError("scene must be a JSON object");
    for (const auto& [k, v] : doc.items())
        if (!kSceneKeys.count(k)) throw ConfigError("unknown key '" + k + "'");
    SceneConfig s;
    if (doc.contains("field")) s.field = doc["field"];
    if (doc.contains("c")) {
        s.c = require_number(doc["c"], "c");
        s.has_c = true;
    }
    if (doc.contains("grid")) {
        s.grid = doc["grid"];
        if (!s.grid.is_object()) throw ConfigError("grid must be an object");
        for (const auto& [k, v] : s.grid.items())
            if (k != "bounds" && k != "resolution") throw ConfigError("unknown key 'grid." + k + "'");
    }
    if (doc.contains("outputs")) {
        const json& o = doc["outputs"];
        if (!o.is_object()) throw ConfigError("outputs must be an object");
        for (const auto& [k, v] : o.items()) {
            if (k == "directory" || k == "prefix") {
                if (!v.is_string()) throw ConfigError("outputs." + k + " must be a string");
                (k == "directory" ? s.outputs.directory : s.outputs.prefix) = v.get<std::string>();
            } else if (k == "formats") {
                if (!v.is_array()) throw ConfigError("outputs.formats must be an array");
                s.outputs.formats.clear();
                for (const json& x : v) {
                    if (!x.is_string() || !kFormats.count(x.get<std::string>()))
                        throw ConfigError("outputs.formats entries are obj, csv or json");
                    s.outputs.formats.push_back(x.get<std::string>());
                }
            } else {
                throw ConfigError("unknown key 'outputs." + k + "'");
            }
        }
    }
    if (doc.contains("tolerances")) {
        const json& t = doc["tolerances"];
        if (!t.is_object()) throw ConfigError("tolerances must be an object");
        for (const auto& [k, v] : t.items()) {
            if (!kToleranceKeys.count(k)) throw ConfigError("unknown tolerance '" + k + "'");
            s.tolerances[k] = require_number(v, "tolerances." + k);
        }
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
        s.seed = doc["seed"].get<unsigned>();
    }
    return s;
}

SceneConfig load_scene(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read " + path);
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_scene(doc);
}

std::vector<std::string> field_names() {
    std::vector<std::string> names{"flat", "polar", "cubic", "fold", "chebyshev-soliton", "sinh-wave"};
    for (const std::string& n : frontal_fixture_names()) names.push_back(n);
    return names;
}

ResolvedField resolve_field(const SceneConfig& scene) { return resolve(scene).rf; }

int cmd_check(const SceneConfig& scene, std::ostream& out) {
    const Resolved res = resolve(scene);
    const ResolvedField& r = res.rf;
    const double c = scene_c(scene, res.natural_c);
    const double tol = scene.tolerance("residual", 1e-8);
    const DomainGrid& g = r.grid;

    double max_phi = 0, max_psi = 0, max_gauss = 0, max_two_d = 0;
    if (g.dim() == 2) {
        const ResidualReport rep = integrability_report(r.field, c, g);
        max_phi = rep.max_codazzi_phi, max_psi = rep.max_codazzi_psi;
        max_gauss = rep.max_gauss, max_two_d = rep.max_two_d;
        if (scene.outputs.wants("csv")) {
            CsvWriter csv(scene.outputs.path("residuals.csv"));
            csv.row({"i", "j", "u", "v", "codazzi_phi", "codazzi_psi", "gauss", "two_d"});
            for (int j = 0; j < g.count(1); ++j)
                for (int i = 0; i < g.count(0); ++i) {
                    const Vec p = g.node(i, j);
                    csv.row({std::to_string(i), std::to_string(j), fmt(p(0)), fmt(p(1)), fmt(rep.codazzi_phi(i, j)),
                             fmt(rep.codazzi_psi(i, j)), fmt(rep.gauss(i, j)), fmt(rep.two_d(i, j))});
                }
        }
    } else {
        const std::size_t n = g.size();
        std::vector<double> cphi(n), cpsi(n), gauss(n);
        parallel_for(n, [&](std::size_t idx) {
            const int nu = g.count(0), nv = g.count(1);
            const int i = static_cast<int>(idx % nu), j = static_cast<int>((idx / nu) % nv);
            const int k = static_cast<int>(idx / (static_cast<std::size_t>(nu) * nv));
            const BundleJet jet = r.field.jet(g.node(i, j, k));
            cphi[idx] = codazzi_residual(jet, Homomorphism::phi);
            cpsi[idx] = codazzi_residual(jet, Homomorphism::psi);
            gauss[idx] = gauss_residual(jet, c);
        });
        for (std::size_t idx = 0; idx < n; ++idx) {
            max_phi = std::max(max_phi, cphi[idx]);
            max_psi = std::max(max_psi, cpsi[idx]);
            max_gauss = std::max(max_gauss, gauss[idx]);
        }
        if (scene.outputs.wants("csv")) {
            CsvWriter csv(scene.outputs.path("residuals.csv"));
            csv.row({"i", "j", "k", "u", "v", "w", "codazzi_phi", "codazzi_psi", "gauss"});
            for (int k = 0; k < g.count(2); ++k)
                for (int j = 0; j < g.count(1); ++j)
                    for (int i = 0; i < g.count(0); ++i) {
                        const std::size_t idx = g.linear(i, j, k);
                        const Vec p = g.node(i, j, k);
                        csv.row({std::to_string(i), std::to_string(j), std::to_string(k), fmt(p(0)), fmt(p(1)),
                                 fmt(p(2)), fmt(cphi[idx]), fmt(cpsi[idx]), fmt(gauss[idx])});
                    }
        }
    }
    const double worst = std::max({max_phi, max_psi, max_gauss, max_two_d});
    const bool passed = worst < tol;
    if (scene.outputs.wants("json")) {
        json doc{{"command", "check"},
                 {"field", r.name},
                 {"m", g.dim()},
                 {"c", c},
                 {"grid", grid_json(g)},
                 {"analytic", r.field.has_analytic_jet()},
                 {"max_codazzi_phi", number(max_phi)},
                 {"max_codazzi_psi", number(max_psi)},
                 {"max_gauss", number(max_gauss)},
                 {"max_residual", number(worst)},
                 {"tolerance", tol},
                 {"passed", passed}};
        if (g.dim() == 2) doc["max_two_d"] = number(max_two_d);
        write_json(scene.outputs.path("check.json"), doc);
    }
    out << (passed ? "PASS" : "FAIL") << "  " << r.name << "  c = " << fmt(c) << "  max residual " << fmt(worst)
        << (passed ? " < " : " >= ") << fmt(tol) << '\n';
    return passed ? ok : check_failed;
}

int cmd_realize(const SceneConfig& scene, std::ostream& out) {
    const Resolved res = resolve(scene);
    const ResolvedField& r = res.rf;
    if (r.field.dim() != 2) throw ConfigError("realize handles m = 2 fields only");
    const double c = scene_c(scene, res.natural_c);
    const int sign = c > 0 ? 1 : (c < 0 ? -1 : 0);
    const bool unit = c == 0.0 || std::abs(c) == 1.0;
    const FrontBundleField field = unit ? r.field : scale_for_curvature(r.field, c);
    const AmbientModel model = AmbientModel::for_curvature(sign, 2);

    RealizeOptions options;
    options.integrability_threshold = scene.tolerance("integrability", options.integrability_threshold);
    const Mat F0 = Mat::Identity(model.frame_size(), model.frame_size());

    double psi_max = 0.0;
    for (int j = 0; j < r.grid.count(1); ++j)
        for (int i = 0; i < r.grid.count(0); ++i)
            psi_max = std::max(psi_max, field.sample(r.grid.node(i, j)).psi.cwiseAbs().maxCoeff());
    const bool as_map = psi_max == 0.0;
    RealizedFront R = as_map ? realize_map(field, sign, r.grid, F0, options)
                             : integrate_frame(field, sign, r.grid, F0, options);
    if (!unit) R.positions /= std::sqrt(std::abs(c));

    const SingularSet sing = extract_singular_set(r.field, r.grid, singular_tolerances(scene));
    const bool euclidean = model.tag == AmbientTag::euclidean;
    const std::string projection = model.tag == AmbientTag::sphere ? "stereographic" : "poincare";
    json files = json::array();

    if (scene.outputs.wants("obj")) {
        const std::string mesh = scene.outputs.path("front.obj");
        std::ofstream os = open_output(mesh);
        os << "# " << r.name << " realized in the " << to_string(model.tag) << " model\n";
        for (Eigen::Index n = 0; n < R.positions.cols(); ++n) write_vertex(os, R.positions.col(n));
        if (euclidean)
            for (Eigen::Index n = 0; n < R.normals.cols(); ++n) {
                os << "vn";
                for (Eigen::Index a = 0; a < R.normals.rows(); ++a) os << ' ' << fmt(R.normals(a, n));
                os << '\n';
            }
        write_faces(os, r.grid, euclidean);
        files.push_back(mesh);

        if (!euclidean) {
            const double radius = unit ? 1.0 : 1.0 / std::sqrt(std::abs(c));
            const std::string proj = scene.outputs.path("front_" + projection + ".obj");
            std::ofstream ps = open_output(proj);
            for (Eigen::Index n = 0; n < R.positions.cols(); ++n)
                write_vertex(ps, project_model(R.positions.col(n) / radius));
            write_faces(ps, r.grid, false);
            files.push_back(proj);
        }

        std::vector<Vec> points;
        for (const Vec& p : sing.nodes) points.push_back(interpolate_position(R, p));
        const std::string lines = scene.outputs.path("singular_curves.obj");
        std::ofstream ls = open_output(lines);
        write_polylines(ls, sing, points);
        files.push_back(lines);
    }

    if (scene.outputs.wants("json")) {
        json doc{{"command", "realize"},
                 {"field", r.name},
                 {"c", c},
                 {"model", to_string(model.tag)},
                 {"grid", grid_json(r.grid)},
                 {"mode", as_map ? "map" : "front"},
                 {"normalization", "base frame = identity at the grid centre"},
                 {"base_node", {R.base_i, R.base_j}},
                 {"holonomy_residual_max", number(R.holonomy_residual_max)},
                 {"max_group_violation", number(R.max_group_violation)},
                 {"integrability_residual", number(R.integrability_residual)},
                 {"integrability_warning", R.integrability_warning},
                 {"initial_frame_projected", R.initial_frame_projected},
                 {"singular_nodes", sing.nodes.size()},
                 {"singular_curves", sing.curves.size()},
                 {"files", files}};
        if (as_map) doc["transverse_deviation"] = number(R.transverse_deviation);
        if (!euclidean) doc["projection"] = projection;
        write_json(scene.outputs.path("realize.json"), doc);
    }
    out << "realized " << r.name << " in the " << to_string(model.tag) << " model  holonomy "
        << fmt(R.holonomy_residual_max) << "  group " << fmt(R.max_group_violation)
        << (R.integrability_warning ? "  (integrability warning)" : "") << '\n';
    return ok;
}

int cmd_generate(const SceneConfig& scene, std::ostream& out) {
    const json& f = scene.field;
    if (!f.is_object() || !f.contains("pde")) throw ConfigError("generate needs field.pde");
    for (const auto& [k, v] : f.items())
        if (k != "pde" && k != "edges" && k != "boundary" && k != "slope" && k != "angle")
            throw ConfigError("unknown key '" + k + "' in field");
    const std::string pde = f["pde"].is_string() ? f["pde"].get<std::string>() : "";
    const DomainGrid grid = scene_grid(scene.grid, box2(-2, 2), {201, 201});
    const Box box = grid.box();

    json doc{{"command", "generate"}, {"pde", pde}, {"grid", grid_json(grid)}};
    std::optional<ThetaField> theta;
    std::function<double(double, double)> exact;
    std::string bundle;
    double bundle_c = 0.0;

    if (pde == "sine-gordon") {
        if (f.contains("boundary") || f.contains("slope") || f.contains("angle"))
            throw ConfigError("sine-gordon scenes take field.edges only");
        const std::string edges = f.value("edges", std::string("soliton"));
        const double c = scene.has_c ? scene.c : 2.0;
        const double u0 = grid.lower(0), v0 = grid.lower(1);
        std::function<double(double)> f0, g0;
        if (edges == "soliton") {
            f0 = [v0](double u) { return exact_soliton(u, v0); };
            g0 = [u0](double v) { return exact_soliton(u0, v); };
            if (c == 2.0) exact = exact_soliton;
        } else if (edges == "linear") {
            f0 = [v0](double u) { return u + v0; };
            g0 = [u0](double v) { return u0 + v; };
            if (c == 1.0) exact = [](double u, double v) { return u + v; };
        } else {
            throw ConfigError("field.edges must be soliton or linear");
        }
        theta = solve_sine_gordon_goursat(c, f0, g0, grid);
        // θ_uv = (c−1) sinθ = (1−c') sinθ makes the Chebyshev bundle c'-integrable with c' = 2 − c.
        bundle = "chebyshev";
        bundle_c = 2.0 - c;
        doc["c"] = c;
        doc["edges"] = edges;
    } else if (pde == "sinh-gordon") {
        if (f.contains("edges")) throw ConfigError("sinh-gordon scenes take field.boundary");
        if (scene.has_c && scene.c != 0.0) throw ConfigError("sinh-gordon scenes are c = 0");
        const std::string boundary = f.value("boundary", std::string("zero"));
        NewtonOptions newton;
        newton.tolerance = scene.tolerance("newton", newton.tolerance);
        newton.max_iterations = static_cast<int>(scene.tolerance("newton_iterations", newton.max_iterations));
        std::function<double(double, double)> bc;
        if (boundary == "zero") {
            if (f.contains("slope") || f.contains("angle")) throw ConfigError("zero boundary takes no wave parameters");
            bc = [](double, double) { return 0.0; };
            exact = bc;
        } else if (boundary == "wave") {
            const double slope = f.contains("slope") ? require_number(f["slope"], "field.slope") : 1.0;
            const double angle = f.contains("angle") ? require_number(f["angle"], "field.angle") : 0.3;
            const ThetaField::ExactFn wave = sinh_gordon_wave(slope, angle, box);
            bc = [wave](double u, double v) { return wave(u, v).t; };
            exact = bc;
            doc["slope"] = slope;
            doc["angle"] = angle;
        } else {
            throw ConfigError("field.boundary must be zero or wave");
        }
        theta = solve_sinh_gordon_dirichlet(grid, bc, {}, newton);
        bundle = "curvature-line";
        bundle_c = 0.0;
        doc["c"] = 0.0;
        doc["boundary"] = boundary;
    } else {
        throw ConfigError("field.pde must be sine-gordon or sinh-gordon");
    }

    doc["source"] = to_string(theta->source());
    doc["pde_residual"] = number(theta->pde_residual());
    if (exact) {
        double err = 0.0;
        for (int j = 0; j < grid.count(1); ++j)
            for (int i = 0; i < grid.count(0); ++i) {
                const Vec p = grid.node(i, j);
                err = std::max(err, std::abs(theta->values()(i, j) - exact(p(0), p(1))));
            }
        doc["max_error_vs_exact"] = number(err);
    }
    const std::string table = scene.outputs.path("theta.csv");
    if (scene.outputs.wants("csv")) {
        ensure_parent(table);
        write_theta_csv(table, *theta);
        doc["theta_csv"] = table;
        doc["scene"] = {{"field", {{"theta_csv", table}, {"bundle", bundle}}}, {"c", bundle_c}};
    }
    doc["bundle"] = bundle;
    doc["bundle_c"] = bundle_c;
    if (scene.outputs.wants("json")) write_json(scene.outputs.path("generate.json"), doc);
    out << "generated " << pde << " on " << grid.count(0) << "x" << grid.count(1) << "  residual "
        << fmt(theta->pde_residual());
    if (doc.contains("max_error_vs_exact")) out << "  error vs exact " << fmt(doc["max_error_vs_exact"].get<double>());
    out << '\n';
    return ok;
}

int cmd_analyze(const SceneConfig& scene, std::ostream& out) {
    const Resolved res = resolve(scene);
    const ResolvedField& r = res.rf;
    const AnalysisReport rep = analyze(r.field, r.grid, singular_tolerances(scene));

    if (scene.outputs.wants("csv")) {
        const std::string path = scene.outputs.path("singular.csv");
        ensure_parent(path);
        write_analysis_csv(path, rep);
    }
    if (scene.outputs.wants("obj")) {
        std::ofstream os = open_output(scene.outputs.path("singular_set.obj"));
        std::vector<Vec> points;
        for (const Vec& p : rep.set.nodes) {
            Vec x = Vec::Zero(3);
            x.head(p.size()) = p;
            points.push_back(x);
        }
        write_polylines(os, rep.set, points);
    }

    std::map<std::string, int> census;
    double kmin = INFINITY, kmax = -INFINITY;
    int with_kappas = 0;
    for (const SingularPointRecord& rec : rep.records) {
        ++census[class_name(rec.classification)];
        if (!rec.kappas.empty()) ++with_kappas;
        for (double k : rec.kappas) kmin = std::min(kmin, k), kmax = std::max(kmax, k);
    }
    const BddReport& b = rep.bdd;
    if (scene.outputs.wants("json")) {
        json doc{{"command", "analyze"},
                 {"field", r.name},
                 {"m", r.field.dim()},
                 {"grid", grid_json(r.grid)},
                 {"singular_nodes", rep.set.nodes.size()},
                 {"curves", rep.set.curves.size()},
                 {"triangles", rep.set.triangles.size()},
                 {"degenerate_cells", rep.set.degenerate_cells},
                 {"dropped", rep.set.dropped},
                 {"classes", census},
                 {"nodes_with_kappas", with_kappas}};
        if (rep.records.empty()) doc["note"] = "no singular points";
        if (with_kappas) doc["kappa_range"] = {kmin, kmax};
        doc["theorem"] = {{"evaluated_nodes", b.nodes.size()},
                          {"excluded_nodes", b.excluded.size()},
                          {"max_second_form_on_sigma", number(b.max_second_form_on_sigma)},
                          {"growth_exponent_range", {number(b.min_growth_exponent), number(b.max_growth_exponent)}},
                          {"min_kext", number(b.min_kext)},
                          {"bounded", b.bounded},
                          {"sign_change", b.sign_change},
                          {"kappa_negative", b.kappa_negative},
                          {"kappa_zero", b.kappa_zero},
                          {"kappa_positive", b.kappa_positive},
                          {"item1", to_string(b.item1)},
                          {"item2", to_string(b.item2)},
                          {"item3", to_string(b.item3)},
                          {"item3_strict", to_string(b.item3_strict)}};
        write_json(scene.outputs.path("analysis.json"), doc);
    }
    out << "analyzed " << r.name << "  " << rep.records.size() << " singular nodes";
    if (rep.records.empty()) out << " (no singular points)";
    if (with_kappas) out << "  kappas in [" << fmt(kmin) << ", " << fmt(kmax) << "]";
    out << "  items " << to_string(b.item1) << "/" << to_string(b.item2) << "/" << to_string(b.item3) << '\n';
    return ok;
}

int cmd_verify(double tolerance_scale, const std::vector<std::string>& only, unsigned seed, std::ostream& out) {
    AcceptanceOptions options;
    options.tolerance_scale = tolerance_scale;
    options.only = only;
    options.seed = seed;
    const std::vector<CriterionResult> results = run_acceptance(options);
    int failed = 0;
    for (const CriterionResult& r : results) {
        out << format_result(r) << '\n';
        if (!r.passed) ++failed;
    }
    out << results.size() << " criteria, " << failed << " failed\n";
    return failed == 0 ? ok : check_failed;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Front bundles: integrability, realization, generation and singular analysis"};
    app.require_subcommand(1);
    int threads = -1;
    app.add_option("--threads", threads, "Worker threads (default: FRONTFORGE_THREADS, else hardware count)")
        ->check(CLI::NonNegativeNumber);

    struct SceneFlags {
        std::string config, fixture, out, prefix;
        std::optional<double> c;
    };
    auto scene_flags = [](CLI::App* sub, SceneFlags& f, bool with_fixture) {
        sub->add_option("--config", f.config, "Scene JSON");
        if (with_fixture) sub->add_option("--fixture", f.fixture, "Field name, e.g. s2xr:a=1 (overrides field)");
        sub->add_option("--c", f.c, "Ambient curvature (overrides c)");
        sub->add_option("--out", f.out, "Output directory (overrides outputs.directory)");
        sub->add_option("--prefix", f.prefix, "Output file prefix");
    };

    SceneFlags check_f, realize_f, analyze_f, generate_f;
    CLI::App* check = app.add_subcommand("check", "Integrability residuals of a field");
    scene_flags(check, check_f, true);
    CLI::App* realize = app.add_subcommand("realize", "Integrate the frame equation and export meshes");
    scene_flags(realize, realize_f, true);
    CLI::App* analyze_cmd = app.add_subcommand("analyze", "Singular set, curvatures and boundedness report");
    scene_flags(analyze_cmd, analyze_f, true);

    CLI::App* generate = app.add_subcommand("generate", "Solve sine-Gordon or sinh-Gordon for θ");
    scene_flags(generate, generate_f, false);
    std::string pde, edges, boundary;
    std::optional<int> resolution;
    generate->add_option("--pde", pde, "sine-gordon or sinh-gordon");
    generate->add_option("--edges", edges, "Goursat edge data: soliton or linear");
    generate->add_option("--boundary", boundary, "Dirichlet data: zero or wave");
    generate->add_option("--resolution", resolution, "Nodes per axis")->check(CLI::Range(2, 100000));

    CLI::App* verify = app.add_subcommand("verify", "Run the acceptance criteria");
    std::vector<std::string> only;
    double tolerance_scale = 1.0;
    unsigned seed = 42;
    verify->add_option("--only", only, "Criterion ids or groups (comma separated)");
    verify->add_option("--tolerance-scale", tolerance_scale, "Multiplier on every tolerance")
        ->check(CLI::NonNegativeNumber);
    verify->add_option("--seed", seed, "Sampling seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : config_error;
    }

    auto build = [&](const SceneFlags& f) {
        SceneConfig s = f.config.empty() ? SceneConfig{} : load_scene(f.config);
        if (!f.fixture.empty()) s.field = f.fixture;
        if (f.c) {
            s.c = *f.c;
            s.has_c = true;
        }
        if (!f.out.empty()) s.outputs.directory = f.out;
        if (!f.prefix.empty()) s.outputs.prefix = f.prefix;
        return s;
    };

    try {
        if (threads >= 0) set_thread_count(threads);
        if (*check) {
            const SceneConfig s = build(check_f);
            if (s.field.is_null()) throw ConfigError("check needs a field (--config or --fixture)");
            return cmd_check(s, out);
        }
        if (*realize) {
            const SceneConfig s = build(realize_f);
            if (s.field.is_null()) throw ConfigError("realize needs a field (--config or --fixture)");
            return cmd_realize(s, out);
        }
        if (*analyze_cmd) {
            const SceneConfig s = build(analyze_f);
            if (s.field.is_null()) throw ConfigError("analyze needs a field (--config or --fixture)");
            return cmd_analyze(s, out);
        }
        if (*generate) {
            SceneConfig s = build(generate_f);
            if (s.field.is_null()) s.field = json::object();
            if (!s.field.is_object()) throw ConfigError("generate needs field to be a PDE object");
            if (!pde.empty()) s.field["pde"] = pde;
            if (!edges.empty()) s.field["edges"] = edges;
            if (!boundary.empty()) s.field["boundary"] = boundary;
            if (resolution) s.grid["resolution"] = *resolution;
            return cmd_generate(s, out);
        }
        return cmd_verify(tolerance_scale, split_commas(only), seed, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << '\n';
        return config_error;
    } catch (const ParameterError& e) {
        err << "parameter error: " << e.what() << '\n';
        return config_error;
    } catch (const NonConvergence& e) {
        err << "solver did not converge: " << e.what() << '\n';
        return nonconvergence;
    } catch (const Error& e) {
        err << "computational error: " << e.what() << '\n';
        return computational_error;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "input error: " << e.what() << '\n';
        return config_error;
    }
}

}  // namespace frontforge::cli
