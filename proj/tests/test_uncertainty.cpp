#include <doctest.h>

#include "core/rng.hpp"
#include "core/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace esteval;

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / double(v.size());
}

}  // namespace

TEST_SUITE("uncertainty") {

TEST_CASE("bootstrap of constant data collapses to a point") {
    std::vector<double> ds(25, 3.25);
    Interval iv = bootstrap_ci(mean_of, ds, 200, 0.95, 1);
    CHECK(iv.lo == 3.25);
    CHECK(iv.hi == 3.25);
    CHECK(iv.level == 0.95);
    CHECK(iv.method == "percentile-bootstrap");
}

TEST_CASE("bootstrap interval brackets the point estimate of the mean") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng = Rng::from(70, "test-boot-bracket", seed);
        std::vector<double> ds(50);
        for (auto& x : ds) x = rng.next_gaussian();
        Interval iv = bootstrap_ci(mean_of, ds, 1000, 0.95, seed);
        double point = mean_of(ds);
        CHECK(iv.lo <= point);
        CHECK(iv.hi >= point);
        CHECK(iv.lo <= iv.hi);
    }
}

TEST_CASE("bootstrap is deterministic given the seed") {
    Rng rng = Rng::from(71, "test-boot-det", 0);
    std::vector<double> ds(40);
    for (auto& x : ds) x = rng.next_gaussian();
    Interval a = bootstrap_ci(mean_of, ds, 300, 0.9, 7);
    Interval b = bootstrap_ci(mean_of, ds, 300, 0.9, 7);
    CHECK(a.lo == b.lo);
    CHECK(a.hi == b.hi);
}

TEST_CASE("bootstrap endpoints are order statistics of the resampled values") {
    Rng rng = Rng::from(72, "test-boot-order", 0);
    std::vector<double> ds(30);
    for (auto& x : ds) x = rng.next_gaussian();
    const size_t B = 400;
    Interval iv = bootstrap_ci(mean_of, ds, B, 0.95, 11);
    // replay the resampling to collect the statistic values
    std::vector<double> stats;
    for (size_t b = 0; b < B; ++b) {
        Rng r = Rng::from(11, "bootstrap", b);
        std::vector<double> re(ds.size());
        for (auto& x : re) x = ds[size_t(r.next_below(ds.size()))];
        stats.push_back(mean_of(re));
    }
    std::sort(stats.begin(), stats.end());
    size_t k = size_t(std::floor(0.025 * double(B)));
    CHECK(iv.lo == stats[k]);
    CHECK(iv.hi == stats[B - 1 - k]);
}

TEST_CASE("bootstrap validates its inputs") {
    std::vector<double> ds = {1.0, 2.0};
    CHECK_THROWS_AS(bootstrap_ci(mean_of, ds, 50, 0.95, 0), Error);   // B too small
    CHECK_THROWS_AS(bootstrap_ci(mean_of, {}, 200, 0.95, 0), Error);  // empty data
    auto failing = [](const std::vector<double>&) -> double {
        throw Error(Err::invalid_argument, "boom");
    };
    CHECK_THROWS_WITH_AS(bootstrap_ci(failing, ds, 200, 0.95, 0),
                         doctest::Contains("degenerate-statistic"), Error);
}

TEST_CASE("bootstrap coverage for the gaussian mean is near nominal") {
    size_t covered = 0;
    const size_t trials = 1000, n = 50, B = 1000;
    for (size_t t = 0; t < trials; ++t) {
        Rng rng = Rng::from(73, "test-boot-coverage", t);
        std::vector<double> ds(n);
        for (auto& x : ds) x = rng.next_gaussian();
        Interval iv = bootstrap_ci(mean_of, ds, B, 0.95, t);
        if (iv.lo <= 0.0 && 0.0 <= iv.hi) ++covered;
    }
    double coverage = double(covered) / double(trials);
    CHECK(coverage >= 0.92);
    CHECK(coverage <= 0.97);
}

TEST_CASE("wilson interval pins the degenerate corners") {
    Interval zero = binomial_interval(0, 10, 0.95);
    CHECK(zero.lo == 0.0);
    CHECK(zero.hi > 0.0);
    CHECK(zero.hi < 0.5);
    Interval ten = binomial_interval(10, 10, 0.95);
    CHECK(ten.hi == 1.0);
    CHECK(ten.lo > 0.5);
    CHECK(zero.method == "wilson");
}

TEST_CASE("wilson interval matches the closed form") {
    // z for 95% two-sided
    const double z = 1.959963984540054;
    const double n = 100.0, p = 0.75;
    double denom = 1.0 + z * z / n;
    double center = (p + z * z / (2 * n)) / denom;
    double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
    Interval iv = binomial_interval(75, 100, 0.95);
    CHECK(iv.lo == doctest::Approx(center - half).epsilon(1e-9));
    CHECK(iv.hi == doctest::Approx(center + half).epsilon(1e-9));
    CHECK(iv.lo <= 0.75);
    CHECK(iv.hi >= 0.75);
}

TEST_CASE("wilson interval validates its inputs") {
    CHECK_THROWS_AS(binomial_interval(5, 0, 0.95), Error);
    CHECK_THROWS_AS(binomial_interval(11, 10, 0.95), Error);
    CHECK_THROWS_AS(binomial_interval(1, 10, 1.5), Error);
}

TEST_CASE("sensitivity range of a single estimator is zero") {
    SensitivityRange r = sensitivity_range({{"loo", 4.0}});
    CHECK(r.min == 4.0);
    CHECK(r.max == 4.0);
    CHECK(r.spread == 0.0);
    REQUIRE(r.table.size() == 1);
    CHECK(r.table[0].first == "loo");
}

TEST_CASE("sensitivity range reports the spread across estimators") {
    SensitivityRange r = sensitivity_range({{"loo", 4.0}, {"10-fold", 3.9}});
    CHECK(r.min == doctest::Approx(3.9));
    CHECK(r.max == doctest::Approx(4.0));
    CHECK(r.spread == doctest::Approx(0.1));
}

TEST_CASE("sensitivity range is permutation invariant") {
    std::vector<std::pair<std::string, double>> a = {{"x", 1.0}, {"y", 5.0}, {"z", 3.0}};
    std::vector<std::pair<std::string, double>> b = {{"z", 3.0}, {"x", 1.0}, {"y", 5.0}};
    SensitivityRange ra = sensitivity_range(a), rb = sensitivity_range(b);
    CHECK(ra.min == rb.min);
    CHECK(ra.max == rb.max);
    CHECK(ra.spread == rb.spread);
    CHECK_THROWS_AS(sensitivity_range({}), Error);
}

}  // TEST_SUITE
