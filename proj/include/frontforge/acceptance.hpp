#pragma once

// The acceptance suite: ten criteria with pinned tolerances, shared by `frontforge verify` and
// the acceptance test binary.

#include <string>
#include <vector>

namespace frontforge {

struct CriterionResult {
    int id = 0;
    std::string title;
    std::vector<std::string> groups;
    bool passed = false;
    /// Measured values against their thresholds.
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    /// Multiplies every error tolerance; 0 makes every tolerance comparison fail.
    double tolerance_scale = 1.0;
    /// Criterion ids ("3") or group names ("realizer"); empty selects everything.
    std::vector<std::string> only;
    unsigned seed = 42;
};

/// realizer, integrability, generators, induce, singular.
std::vector<std::string> acceptance_groups();

/// Runs the selected criteria in id order. Throws ConfigError for an unknown selector.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

/// "[PASS]  2  realizer  constant-curvature realization  K error 1.5e-06 < 2e-04  (1.2 s)"
std::string format_result(const CriterionResult& r);

}  // namespace frontforge
