#include "frontforge/cli.hpp"
#include "frontforge/generators.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using frontforge::cli::run;
using nlohmann::json;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
    args.insert(args.begin(), "frontforge");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "frontforge_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string write_file(const fs::path& path, const std::string& text) {
    std::ofstream(path) << text;
    return path.string();
}

std::string slurp(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

json read_json(const fs::path& path) { return json::parse(slurp(path)); }

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) cells.push_back(cell);
    if (!line.empty() && line.back() == sep) cells.emplace_back();
    return cells;
}

/// Rows of a CSV file with the CR of every CRLF stripped; row 0 is the header.
std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::ifstream is(path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        rows.push_back(split(line, ','));
    }
    return rows;
}

std::vector<std::vector<double>> obj_records(const fs::path& path, const std::string& tag) {
    std::ifstream is(path);
    std::vector<std::vector<double>> out;
    std::string line;
    while (std::getline(is, line)) {
        std::stringstream ss(line);
        std::string head;
        ss >> head;
        if (head != tag) continue;
        std::vector<double> values;
        double x;
        while (ss >> x) values.push_back(x);
        out.push_back(values);
    }
    return out;
}

int column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return static_cast<int>(k);
    return -1;
}

}  // namespace

TEST_CASE("check passes the Chebyshev soliton scene and writes its tables") {
    const fs::path dir = scratch("check_pass");
    const std::string cfg = write_file(dir / "scene.json", R"({"field": "chebyshev-soliton", "c": 0})");
    const Outcome r = cli({"check", "--config", cfg, "--out", dir.string()});
    CHECK(r.code == 0);
    const json summary = read_json(dir / "check.json");
    CHECK(summary["passed"].get<bool>());
    CHECK(summary["max_residual"].get<double>() < 1e-8);
    CHECK(summary["analytic"].get<bool>());
    const auto rows = read_csv(dir / "residuals.csv");
    REQUIRE(rows.size() == 101 * 101 + 1);
    CHECK(rows[0] == std::vector<std::string>{"i", "j", "u", "v", "codazzi_phi", "codazzi_psi", "gauss", "two_d"});
}

TEST_CASE("check fails when c is off by one half") {
    const fs::path dir = scratch("check_fail");
    const std::string cfg = write_file(dir / "scene.json", R"({"field": "chebyshev-soliton", "c": 0.5})");
    const Outcome r = cli({"check", "--config", cfg, "--out", dir.string()});
    CHECK(r.code == 1);
    // The Gauss defect is linear in c: off by 0.5 on a field with |λ| ≤ 1.
    const double worst = read_json(dir / "check.json")["max_residual"].get<double>();
    CHECK(worst > 0.4);
    CHECK(worst < 0.5 + 1e-12);
}

TEST_CASE("check covers a three-dimensional fixture") {
    const fs::path dir = scratch("check_m3");
    const Outcome r = cli({"check", "--fixture", "s2xr:a=1", "--out", dir.string()});
    CHECK(r.code == 0);
    const auto rows = read_csv(dir / "residuals.csv");
    CHECK(rows.size() == 9 * 9 * 4 + 1);
    CHECK(column(rows[0], "w") == 5);
}

TEST_CASE("configuration errors exit with code 2") {
    const fs::path dir = scratch("config_errors");
    auto check_config = [&](const std::string& text) {
        const std::string cfg = write_file(dir / "scene.json", text);
        const Outcome r = cli({"check", "--config", cfg, "--out", dir.string()});
        CHECK_MESSAGE(r.code == 2, text);
        CHECK(!r.err.empty());
    };
    check_config(R"({"field": )");
    check_config(R"({"field": "flat", "colour": "red"})");
    check_config(R"({"field": "flat", "tolerances": {"residuals": 1e-8}})");
    check_config(R"({"field": "flat", "outputs": {"formats": ["png"]}})");
    check_config(R"({"field": "flat", "grid": {"resolution": 1}})");
    check_config(R"({"field": "flat", "grid": {"spacing": 0.1}})");
    check_config(R"({"field": "no-such-field"})");
    check_config(R"({"field": "chebyshev-soliton:a=1,q=2"})");
    check_config(R"({"field": {"name": "s2xr", "a": "one"}})");
    check_config(R"({"field": "s2xr:a=1", "grid": {"bounds": [[0, 3], [-1, 1], [-0.5, 0.5]]}})");
    check_config(R"({"c": 0})");
    check_config(R"([1, 2, 3])");
    CHECK(cli({"check", "--config", (dir / "missing.json").string()}).code == 2);
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("analyze reproduces the singular principal curvatures -1/a") {
    for (double a : {1.0, 2.0}) {
        const fs::path dir = scratch("analyze_s2xr_" + std::to_string(static_cast<int>(a)));
        const std::string fixture = a == 1.0 ? "s2xr:a=1" : "s2xr:a=2";
        const Outcome r = cli({"analyze", "--fixture", fixture, "--out", dir.string()});
        REQUIRE(r.code == 0);
        const auto rows = read_csv(dir / "singular.csv");
        REQUIRE(rows.size() > 100);
        const int k1 = column(rows[0], "kappa_1"), k2 = column(rows[0], "kappa_2");
        REQUIRE(k1 >= 0);
        REQUIRE(k2 >= 0);
        int filled = 0;
        for (std::size_t n = 1; n < rows.size(); ++n)
            for (int k : {k1, k2}) {
                if (rows[n][k].empty()) continue;
                ++filled;
                CHECK(std::abs(std::stod(rows[n][k]) + 1.0 / a) < 1e-5);
            }
        CHECK(filled > 200);
        const json report = read_json(dir / "analysis.json");
        CHECK(report["theorem"]["item1"] == "passed");
        CHECK(report["theorem"]["item3"] == "passed");
        CHECK(fs::exists(dir / "singular_set.obj"));
    }
}

TEST_CASE("analyze of a regular scene reports no singular points") {
    const fs::path dir = scratch("analyze_regular");
    const Outcome r = cli({"analyze", "--fixture", "flat", "--out", dir.string()});
    CHECK(r.code == 0);
    const auto rows = read_csv(dir / "singular.csv");
    CHECK(rows.size() == 1);
    CHECK(read_json(dir / "analysis.json")["note"] == "no singular points");
}

TEST_CASE("realize of the flat scene is a planar mesh with trivial holonomy") {
    const fs::path dir = scratch("realize_flat");
    const Outcome r = cli({"realize", "--fixture", "flat", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const json side = read_json(dir / "realize.json");
    CHECK(side["holonomy_residual_max"].get<double>() < 1e-14);
    CHECK(side["model"] == "euclidean");
    const auto v = obj_records(dir / "front.obj", "v");
    const auto vn = obj_records(dir / "front.obj", "vn");
    const auto f = obj_records(dir / "front.obj", "f");
    REQUIRE(v.size() == 101 * 101);
    CHECK(vn.size() == v.size());
    CHECK(f.size() == 2 * 100 * 100);
    for (const auto& x : v) CHECK(std::abs(x[2]) < 1e-14);
}

TEST_CASE("realize in the sphere model keeps vertices on the unit sphere") {
    const fs::path dir = scratch("realize_sphere");
    // θ = 4 atan(e^u) solves θ_uv = 0, so its Chebyshev bundle is 1-integrable.
    const Outcome r = cli({"realize", "--fixture", "chebyshev-soliton:a=1,b=0", "--out", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(read_json(dir / "realize.json")["model"] == "sphere");
    const auto v = obj_records(dir / "front.obj", "v");
    const auto s = obj_records(dir / "front_stereographic.obj", "v");
    REQUIRE(v.size() == 101 * 101);
    REQUIRE(s.size() == v.size());
    CHECK(obj_records(dir / "front.obj", "vn").empty());
    for (std::size_t n = 0; n < v.size(); ++n) {
        REQUIRE(v[n].size() == 4);
        CHECK(std::abs(v[n][0] * v[n][0] + v[n][1] * v[n][1] + v[n][2] * v[n][2] + v[n][3] * v[n][3] - 1) < 1e-10);
        for (int a = 0; a < 3; ++a) CHECK(s[n][a] == doctest::Approx(v[n][a + 1] / (1 + v[n][0])).epsilon(1e-12));
    }
}

TEST_CASE("realize in the hyperbolic model keeps vertices on the hyperboloid") {
    const fs::path dir = scratch("realize_hyperbolic");
    const Outcome r = cli({"realize", "--fixture", "chebyshev-soliton:a=1,b=2", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto v = obj_records(dir / "front.obj", "v");
    const auto p = obj_records(dir / "front_poincare.obj", "v");
    REQUIRE(p.size() == v.size());
    for (std::size_t n = 0; n < v.size(); ++n) {
        CHECK(std::abs(-v[n][0] * v[n][0] + v[n][1] * v[n][1] + v[n][2] * v[n][2] + v[n][3] * v[n][3] + 1) <
              1e-9 * v[n][0] * v[n][0]);
        CHECK(p[n][0] * p[n][0] + p[n][1] * p[n][1] + p[n][2] * p[n][2] < 1.0);
    }
}

TEST_CASE("realize rescales non-unit curvature") {
    const fs::path dir = scratch("realize_scaled");
    // a·b = 1/2 gives a (1/2)-integrable bundle: the front lies on the sphere of radius √2.
    const Outcome r = cli({"realize", "--fixture", "chebyshev-soliton:a=1,b=0.5", "--out", dir.string()});
    REQUIRE(r.code == 0);
    for (const auto& x : obj_records(dir / "front.obj", "v"))
        CHECK(std::abs(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3] - 2.0) < 1e-9);
}

TEST_CASE("realize exports the cuspidal edge as a polyline") {
    const fs::path dir = scratch("realize_soliton");
    const Outcome r = cli({"realize", "--fixture", "chebyshev-soliton", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto lines = obj_records(dir / "singular_curves.obj", "l");
    const auto points = obj_records(dir / "singular_curves.obj", "v");
    REQUIRE(lines.size() == 1);
    CHECK(lines[0].size() == points.size());
    CHECK(read_json(dir / "realize.json")["singular_curves"] == 1);
}

TEST_CASE("generate solves the Goursat problem exactly for additive data") {
    const fs::path dir = scratch("generate_linear");
    const Outcome r = cli({"generate", "--pde", "sine-gordon", "--c", "1", "--edges", "linear", "--out", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(read_json(dir / "generate.json")["max_error_vs_exact"].get<double>() < 1e-12);
    const frontforge::ThetaField theta = frontforge::read_theta_csv((dir / "theta.csv").string());
    CHECK(theta.values()(0, 0) == doctest::Approx(-4.0));
}

TEST_CASE("generate converges to the soliton from its edge data") {
    const fs::path dir = scratch("generate_soliton");
    const std::string cfg = write_file(dir / "scene.json", R"({
        "field": {"pde": "sine-gordon", "edges": "soliton"},
        "grid": {"bounds": [[-1, 1], [-1, 1]], "resolution": 801},
        "outputs": {"formats": ["json"]}})");
    const Outcome r = cli({"generate", "--config", cfg, "--c", "2", "--out", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(read_json(dir / "generate.json")["max_error_vs_exact"].get<double>() < 1e-5);
    CHECK(!fs::exists(dir / "theta.csv"));
}

TEST_CASE("generate hands its table to check") {
    const fs::path dir = scratch("generate_handoff");
    REQUIRE(cli({"generate", "--pde", "sine-gordon", "--c", "2", "--out", dir.string()}).code == 0);
    json scene = read_json(dir / "generate.json")["scene"];
    CHECK(scene["c"].get<double>() == 0.0);
    scene["tolerances"] = {{"residual", 1e-3}};
    scene["outputs"] = {{"directory", (dir / "check").string()}};
    const std::string cfg = write_file(dir / "handoff.json", scene.dump());
    CHECK(cli({"check", "--config", cfg}).code == 0);
}

TEST_CASE("generate with zero Dirichlet data gives theta = 0") {
    const fs::path dir = scratch("generate_sinh_zero");
    REQUIRE(cli({"generate", "--pde", "sinh-gordon", "--boundary", "zero", "--out", dir.string()}).code == 0);
    const frontforge::ThetaField theta = frontforge::read_theta_csv((dir / "theta.csv").string());
    CHECK(theta.values().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("generate maps solver nonconvergence to code 4") {
    const fs::path dir = scratch("generate_nonconvergence");
    const std::string cfg = write_file(dir / "scene.json", R"({
        "field": {"pde": "sinh-gordon", "boundary": "wave"},
        "tolerances": {"newton": 1e-30, "newton_iterations": 2}})");
    const Outcome r = cli({"generate", "--config", cfg, "--out", dir.string()});
    CHECK(r.code == 4);
    CHECK(cli({"generate", "--pde", "heat", "--out", dir.string()}).code == 2);
}

TEST_CASE("outputs are bit-identical across runs and thread counts") {
    const fs::path a = scratch("determinism_a"), b = scratch("determinism_b");
    REQUIRE(cli({"--threads", "1", "analyze", "--fixture", "cuspidal:beta=0.5", "--out", a.string()}).code == 0);
    REQUIRE(cli({"--threads", "4", "analyze", "--fixture", "cuspidal:beta=0.5", "--out", b.string()}).code == 0);
    CHECK(slurp(a / "singular.csv") == slurp(b / "singular.csv"));
    CHECK(slurp(a / "analysis.json") == slurp(b / "analysis.json"));
    REQUIRE(cli({"--threads", "3", "check", "--fixture", "sinh-wave", "--out", a.string()}).code == 0);
    REQUIRE(cli({"--threads", "2", "check", "--fixture", "sinh-wave", "--out", b.string()}).code == 0);
    CHECK(slurp(a / "residuals.csv") == slurp(b / "residuals.csv"));
    CHECK(cli({"--threads", "0", "check", "--fixture", "flat", "--out", a.string()}).code == 0);
}

TEST_CASE("verify selects criteria and honours the tolerance scale") {
    const Outcome r = cli({"verify", "--only", "realizer"});
    CHECK(r.code == 0);
    std::stringstream lines(r.out);
    std::string line;
    int criteria = 0;
    while (std::getline(lines, line)) {
        if (line.rfind("[PASS]", 0) != 0 && line.rfind("[FAIL]", 0) != 0) continue;
        ++criteria;
        CHECK(line.find("realizer") != std::string::npos);
    }
    CHECK(criteria >= 3);
    CHECK(cli({"verify", "--only", "1", "--tolerance-scale", "0"}).code == 1);
    CHECK(cli({"verify", "--only", "nothing"}).code == 2);
}
