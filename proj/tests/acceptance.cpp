#include "frontforge/acceptance.hpp"

#include <cstdio>

int main() {
    const auto results = frontforge::run_acceptance();
    int failed = 0;
    for (const auto& r : results) {
        std::printf("%s\n", frontforge::format_result(r).c_str());
        failed += r.passed ? 0 : 1;
    }
    std::printf("%zu criteria, %d failed\n", results.size(), failed);
    return failed == 0 ? 0 : 1;
}
