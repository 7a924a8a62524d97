#pragma once

#include <string>
#include <vector>

namespace sgf {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    /// worst observed value and the bound it is compared with
    double value = 0;
    double threshold = 0;
    double seconds = 0;
    double time_limit = 0;  // 0 when the criterion has no runtime bound
    std::string detail;
};

constexpr int acceptance_count = 10;

/// Runs acceptance criterion k (1-based). Numerical exceptions are reported as failures.
CheckResult acceptance_criterion(int k, int threads = 0);

/// bessel, flow, stationary, model, geometry, all
std::vector<std::string> suite_names();
/// Criteria run by a suite. Throws ConfigError for unknown names.
std::vector<int> suite_criteria(const std::string& suite);

}  // namespace sgf
