#include "core/uncertainty.hpp"

#include "core/rng.hpp"

#include <algorithm>
#include <cmath>

namespace esteval {

Interval bootstrap_ci(const std::function<double(const std::vector<double>&)>& statistic,
                      const std::vector<double>& ds, size_t B, double level, uint64_t seed) {
    if (B < 100) throw Error(Err::invalid_argument, "bootstrap needs B >= 100");
    if (ds.empty()) throw Error(Err::empty_dataset, "bootstrap needs a nonempty dataset");
    if (!(level > 0.0 && level < 1.0)) throw Error(Err::invalid_argument, "level must be in (0,1)");
    std::vector<double> stats(B);
    std::vector<double> resample(ds.size());
    for (size_t b = 0; b < B; ++b) {
        Rng rng = Rng::from(seed, "bootstrap", b);
        for (auto& x : resample) x = ds[size_t(rng.next_below(ds.size()))];
        try {
            stats[b] = statistic(resample);
        } catch (const std::exception& e) {
            throw Error(Err::degenerate_statistic,
                        "statistic failed on resample " + std::to_string(b) + ": " + e.what());
        }
    }
    std::sort(stats.begin(), stats.end());
    size_t k = size_t(std::floor(0.5 * (1.0 - level) * double(B)));
    k = std::min(k, (B - 1) / 2);
    Interval iv;
    iv.lo = stats[k];
    iv.hi = stats[B - 1 - k];
    iv.level = level;
    iv.method = "percentile-bootstrap";
    return iv;
}

namespace {

// z with P(|N(0,1)| <= z) = level, via bisection on erfc (no closed form needed).
double normal_two_sided_z(double level) {
    double alpha = 1.0 - level;
    double lo = 0.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (std::erfc(mid / std::sqrt(2.0)) > alpha)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

Interval binomial_interval(size_t successes, size_t trials, double level) {
    if (trials == 0) throw Error(Err::invalid_argument, "trials must be positive");
    if (successes > trials) throw Error(Err::invalid_argument, "successes exceed trials");
    if (!(level > 0.0 && level < 1.0)) throw Error(Err::invalid_argument, "level must be in (0,1)");
    double z = normal_two_sided_z(level);
    double n = double(trials), p = double(successes) / n;
    double denom = 1.0 + z * z / n;
    double center = (p + z * z / (2.0 * n)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    Interval iv;
    iv.lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
    iv.hi = successes == trials ? 1.0 : std::min(1.0, center + half);
    iv.level = level;
    iv.method = "wilson";
    return iv;
}

SensitivityRange sensitivity_range(const std::vector<std::pair<std::string, double>>& estimates) {
    if (estimates.empty()) throw Error(Err::invalid_argument, "no estimates given");
    SensitivityRange r;
    r.table = estimates;
    r.min = estimates[0].second;
    r.max = estimates[0].second;
    for (const auto& [label, value] : estimates) {
        r.min = std::min(r.min, value);
        r.max = std::max(r.max, value);
    }
    r.spread = r.max - r.min;
    return r;
}

}  // namespace esteval
