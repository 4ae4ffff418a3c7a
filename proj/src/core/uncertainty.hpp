#pragma once

#include "core/errors.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace esteval {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double level = 0.95;
    std::string method;
};

// Percentile bootstrap over data rows. Endpoints are the order statistics at
// floor(alpha/2 * B) from either end; no interpolation.
Interval bootstrap_ci(const std::function<double(const std::vector<double>&)>& statistic,
                      const std::vector<double>& ds, size_t B, double level, uint64_t seed);

Interval binomial_interval(size_t successes, size_t trials, double level);

struct SensitivityRange {
    double min = 0.0;
    double max = 0.0;
    double spread = 0.0;
    std::vector<std::pair<std::string, double>> table;
};

SensitivityRange sensitivity_range(const std::vector<std::pair<std::string, double>>& estimates);

}  // namespace esteval
