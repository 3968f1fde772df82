#pragma once

// Command-line driver: scene configs, field resolution and the five subcommands.

#include "frontforge/bundle.hpp"
#include "frontforge/generators.hpp"
#include "frontforge/induce.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace frontforge::cli {

enum ExitCode : int { ok = 0, check_failed = 1, config_error = 2, computational_error = 3, nonconvergence = 4 };

struct OutputSpec {
    std::string directory = ".";
    std::string prefix;
    std::vector<std::string> formats{"obj", "csv", "json"};

    bool wants(const std::string& format) const;
    std::string path(const std::string& suffix) const;
};

/// A scene document. Keys: field, c, grid, outputs, tolerances, seed; anything else is rejected.
struct SceneConfig {
    /// Field name ("chebyshev-soliton", "s2xr:a=1", …), {"name": …, parameters} or
    /// {"theta_csv": path, "bundle": "chebyshev" | "curvature-line"}; for generate, a PDE spec.
    nlohmann::json field;
    double c = 0.0;
    bool has_c = false;
    /// {"bounds": [[lo, hi], …], "resolution": [n, …]}; empty selects the field's default.
    nlohmann::json grid;
    OutputSpec outputs;
    std::map<std::string, double> tolerances;
    unsigned seed = 42;

    double tolerance(const std::string& key, double fallback) const;
};

/// Throws ConfigError on schema violations.
SceneConfig parse_scene(const nlohmann::json& doc);
/// Throws ConfigError when the file is missing or is not valid JSON.
SceneConfig load_scene(const std::string& path);

struct ResolvedField {
    std::string name;
    FrontBundleField field;
    DomainGrid grid;
    /// Set when the field's θ is known in closed form (Chebyshev and curvature-line scenes).
    std::optional<ThetaField::ExactFn> theta;
};

/// Field names accepted in `field`.
std::vector<std::string> field_names();
ResolvedField resolve_field(const SceneConfig& scene);

int cmd_check(const SceneConfig& scene, std::ostream& out);
int cmd_realize(const SceneConfig& scene, std::ostream& out);
int cmd_generate(const SceneConfig& scene, std::ostream& out);
int cmd_analyze(const SceneConfig& scene, std::ostream& out);
/// `only`: criterion ids or group names.
int cmd_verify(double tolerance_scale, const std::vector<std::string>& only, unsigned seed, std::ostream& out);

/// Full command line (argv[0] included); errors are reported on `err` and mapped to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace frontforge::cli
