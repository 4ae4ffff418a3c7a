#include <doctest.h>

#include "core/dataset.hpp"
#include "core/rng.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

using namespace esteval;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
    fs::path p = fs::temp_directory_path() / name;
    std::ofstream f(p);
    f << content;
    return p;
}

const std::vector<std::string> kABSchema = {"a", "b", "t"};

// Independent two-sample KS: scan every observed value as a threshold.
double ks_oracle(std::vector<double> x, std::vector<double> y) {
    std::vector<double> all = x;
    all.insert(all.end(), y.begin(), y.end());
    double best = 0.0;
    for (double v : all) {
        double fx = 0, fy = 0;
        for (double e : x) fx += (e <= v);
        for (double e : y) fy += (e <= v);
        best = std::max(best, std::abs(fx / x.size() - fy / y.size()));
    }
    return best;
}

}  // namespace

TEST_SUITE_BEGIN("data");

TEST_CASE("loader reads rows in file order") {
    auto p = write_temp("esteval_ok.csv", "a,b,t\n1,2,3\n4,5,6\n");
    TabularDataset ds = load_tabular_csv(p.string(), kABSchema);
    REQUIRE(ds.n() == 2);
    REQUIRE(ds.d() == 2);
    CHECK(ds.x(0, 0) == 1.0);
    CHECK(ds.x(1, 1) == 5.0);
    CHECK(ds.y[0] == 3.0);
    CHECK(ds.y[1] == 6.0);
    CHECK(ds.target_name == "t");
    CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("loader rejects a reordered header") {
    auto p = write_temp("esteval_reorder.csv", "b,a,t\n1,2,3\n");
    CHECK_THROWS_WITH_AS(load_tabular_csv(p.string(), kABSchema),
                         doctest::Contains("schema-mismatch"), Error);
}

TEST_CASE("loader rejects an empty data section") {
    auto p = write_temp("esteval_empty.csv", "a,b,t\n");
    CHECK_THROWS_WITH_AS(load_tabular_csv(p.string(), kABSchema),
                         doctest::Contains("parse-error"), Error);
}

TEST_CASE("loader reports row and column of a bad cell") {
    auto p = write_temp("esteval_bad.csv", "a,b,t\n1,2,3\n1,zap,3\n");
    CHECK_THROWS_WITH_AS(load_tabular_csv(p.string(), kABSchema),
                         doctest::Contains("row 2"), Error);
}

TEST_CASE("loader rejects non-finite values") {
    auto p = write_temp("esteval_inf.csv", "a,b,t\n1,inf,3\n");
    CHECK_THROWS_WITH_AS(load_tabular_csv(p.string(), kABSchema),
                         doctest::Contains("non-finite"), Error);
}

TEST_CASE("loader reports missing files") {
    CHECK_THROWS_WITH_AS(load_tabular_csv("/nonexistent/x.csv", kABSchema),
                         doctest::Contains("dataset-missing"), Error);
}

TEST_CASE("bundled California asset loads with the documented schema") {
    fs::path p = fs::path(ESTEVAL_REPO_DIR) / "assets" / "california_housing.csv";
    REQUIRE_MESSAGE(fs::exists(p), "assets/california_housing.csv must be bundled");
    TabularDataset ds = load_tabular_csv(p.string(), california_schema());
    CHECK(ds.n() == 20640);
    CHECK(ds.d() == 8);
    // Spot values of the canonical first row; target in units of $100,000.
    CHECK(ds.x(0, 0) == doctest::Approx(8.3252).epsilon(1e-12));
    CHECK(ds.y[0] == doctest::Approx(4.526).epsilon(1e-12));
}

TEST_CASE("with-replacement sampling is deterministic and respects n") {
    auto p = write_temp("esteval_s.csv", "a,b,t\n1,2,3\n4,5,6\n7,8,9\n");
    TabularDataset ds = load_tabular_csv(p.string(), kABSchema);
    TabularDataset s1 = sample_with_replacement(ds, 2000, 7);
    TabularDataset s2 = sample_with_replacement(ds, 2000, 7);
    CHECK(s1.n() == 2000);
    CHECK(s1.X == s2.X);
    CHECK(s1.y == s2.y);
    CHECK(s1.ids == s2.ids);
    TabularDataset s3 = sample_with_replacement(ds, 2000, 8);
    CHECK(s1.y != s3.y);
}

TEST_CASE("n=1 sample from a 1-row dataset returns that row") {
    auto p = write_temp("esteval_one.csv", "a,b,t\n1,2,3\n");
    TabularDataset ds = load_tabular_csv(p.string(), kABSchema);
    TabularDataset s = sample_with_replacement(ds, 1, 123);
    REQUIRE(s.n() == 1);
    CHECK(s.x(0, 0) == 1.0);
    CHECK(s.y[0] == 3.0);
}

TEST_CASE("sampling an empty dataset is an error") {
    TabularDataset ds;
    ds.feature_names = {"a"};
    ds.target_name = "t";
    CHECK_THROWS_AS(sample_with_replacement(ds, 1, 0), Error);
}

TEST_CASE("with-replacement row frequencies pass a chi-square check") {
    // 10^6 draws over 10 rows; chi-square(9) critical value at p=0.001 is 27.877.
    std::string csv = "a,t\n";
    for (int i = 0; i < 10; ++i) csv += "0," + std::to_string(i) + "\n";
    TabularDataset ds = load_tabular_csv(write_temp("esteval_chi.csv", csv).string(), {"a", "t"});
    TabularDataset s = sample_with_replacement(ds, 1000000, 2024);
    std::vector<long> count(10, 0);
    for (double v : s.y) ++count[size_t(v)];
    double expect = 100000.0, chi = 0.0;
    for (long c : count) chi += (c - expect) * (c - expect) / expect;
    CHECK(chi < 27.877);
}

TEST_CASE("stratified sampling honors the allocation") {
    std::string csv = "a,t\n";
    std::vector<std::string> labels;
    for (int i = 0; i < 7; ++i) { csv += "1," + std::to_string(i) + "\n"; labels.push_back("A"); }
    for (int i = 7; i < 12; ++i) { csv += "2," + std::to_string(i) + "\n"; labels.push_back("B"); }
    TabularDataset ds = load_tabular_csv(write_temp("esteval_st.csv", csv).string(), {"a", "t"});

    TabularDataset s = stratified_sample(ds, labels, {{"A", 2}, {"B", 2}}, 5);
    REQUIRE(s.n() == 4);
    int fromA = 0, fromB = 0;
    for (double v : s.X) (v == 1.0 ? fromA : fromB)++;
    CHECK(fromA == 2);
    CHECK(fromB == 2);

    // allocation of a full stratum returns all of it
    TabularDataset all = stratified_sample(ds, labels, {{"A", 7}}, 5);
    REQUIRE(all.n() == 7);
    std::set<double> ys(all.y.begin(), all.y.end());
    CHECK(ys == std::set<double>{0, 1, 2, 3, 4, 5, 6});

    CHECK_THROWS_WITH_AS(stratified_sample(ds, labels, {{"B", 6}}, 5),
                         doctest::Contains("allocation-exceeds-stratum"), Error);
    CHECK(stratified_sample(ds, labels, {{"A", 3}}, 9).y ==
          stratified_sample(ds, labels, {{"A", 3}}, 9).y);
}

TEST_CASE("stratified inclusion frequencies match allocation/size") {
    std::string csv = "a,t\n";
    std::vector<std::string> labels;
    for (int i = 0; i < 7; ++i) { csv += "1," + std::to_string(i) + "\n"; labels.push_back("A"); }
    for (int i = 7; i < 12; ++i) { csv += "2," + std::to_string(i) + "\n"; labels.push_back("B"); }
    TabularDataset ds = load_tabular_csv(write_temp("esteval_stf.csv", csv).string(), {"a", "t"});

    const int reps = 10000;
    std::map<double, int> included;
    for (int r = 0; r < reps; ++r) {
        TabularDataset s = stratified_sample(ds, labels, {{"A", 3}, {"B", 2}}, 1000 + r);
        for (double v : s.y) ++included[v];
    }
    for (const auto& [row, cnt] : included) {
        double p = row < 7 ? 3.0 / 7.0 : 2.0 / 5.0;
        double sigma = std::sqrt(p * (1 - p) / reps);
        CHECK(std::abs(double(cnt) / reps - p) < 3 * sigma);
    }
}

TEST_CASE("distribution report on identical datasets is all zeros") {
    auto p = write_temp("esteval_d.csv", "a,b,t\n1,5,0\n2,6,0\n3,7,0\n4,8,0\n");
    TabularDataset ds = load_tabular_csv(p.string(), kABSchema);
    DistributionReport rep = feature_distribution_report(ds, ds);
    REQUIRE(rep.features.size() == 2);
    for (const auto& f : rep.features) {
        CHECK(f.ks == 0.0);
        CHECK_FALSE(f.coverage_flag);
        CHECK_FALSE(f.ks_flag);
        for (int q = 0; q + 1 < 7; ++q) CHECK(f.population_quantiles[q] <= f.population_quantiles[q + 1]);
    }
}

TEST_CASE("a 5-sigma shift is detected by the KS statistic") {
    Rng rng = Rng::from(31, "ks-shift", 0);
    std::string pop = "a,t\n", smp = "a,t\n";
    for (int i = 0; i < 400; ++i) pop += std::to_string(rng.next_gaussian() + 5.0) + ",0\n";
    for (int i = 0; i < 400; ++i) smp += std::to_string(rng.next_gaussian()) + ",0\n";
    TabularDataset dpop = load_tabular_csv(write_temp("esteval_ks1.csv", pop).string(), {"a", "t"});
    TabularDataset dsmp = load_tabular_csv(write_temp("esteval_ks2.csv", smp).string(), {"a", "t"});
    DistributionReport rep = feature_distribution_report(dsmp, dpop);
    CHECK(rep.features[0].ks >= 0.9);
    CHECK(rep.features[0].ks_flag);
}

TEST_CASE("KS statistic matches a direct threshold scan") {
    Rng rng = Rng::from(77, "ks-oracle", 0);
    for (int trial = 0; trial < 100; ++trial) {
        size_t nx = 3 + rng.next_below(40), ny = 3 + rng.next_below(40);
        std::vector<double> xs, ys;
        for (size_t i = 0; i < nx; ++i)
            xs.push_back(std::round(rng.next_gaussian() * 4) / 2);  // coarse grid forces ties
        for (size_t i = 0; i < ny; ++i)
            ys.push_back(std::round((rng.next_gaussian() + 0.3) * 4) / 2);
        double got = ks_two_sample(xs, ys);
        CHECK(got == doctest::Approx(ks_oracle(xs, ys)).epsilon(1e-12));
        CHECK(got >= 0.0);
        CHECK(got <= 1.0);
    }
}

TEST_CASE("synthetic identities have the requested shape") {
    EmbeddingDataset ds = generate_synthetic_identities(40, 10, 32, 1.0, 3.0, 99);
    CHECK(ds.n() == 400);
    CHECK(ds.dim() == 32);
    std::map<int, int> sizes;
    for (int id : ds.identity) ++sizes[id];
    CHECK(sizes.size() == 40);
    for (const auto& [id, cnt] : sizes) CHECK(cnt == 10);
    EmbeddingDataset again = generate_synthetic_identities(40, 10, 32, 1.0, 3.0, 99);
    CHECK(ds.vectors == again.vectors);
}

TEST_CASE("zero within-spread collapses members onto their centroid") {
    EmbeddingDataset ds = generate_synthetic_identities(5, 4, 8, 0.0, 2.0, 7);
    for (size_t i = 0; i < ds.n(); ++i) {
        size_t first_of_identity = (i / 4) * 4;
        for (size_t j = 0; j < ds.dim(); ++j)
            CHECK(ds.vectors[i * ds.dim() + j] == ds.vectors[first_of_identity * ds.dim() + j]);
    }
}

TEST_CASE("within-identity distances are smaller than between-identity distances") {
    EmbeddingDataset ds = generate_synthetic_identities(10, 20, 8, 1.0, 3.0, 5);
    double wsum = 0, bsum = 0;
    long wn = 0, bn = 0;
    for (size_t i = 0; i < ds.n(); ++i)
        for (size_t j = i + 1; j < ds.n(); ++j) {
            double d2 = 0;
            for (size_t c = 0; c < ds.dim(); ++c) {
                double diff = ds.vectors[i * ds.dim() + c] - ds.vectors[j * ds.dim() + c];
                d2 += diff * diff;
            }
            if (ds.identity[i] == ds.identity[j]) { wsum += std::sqrt(d2); ++wn; }
            else { bsum += std::sqrt(d2); ++bn; }
        }
    CHECK(wsum / wn < bsum / bn);
}

TEST_CASE("item responses follow the requested rates") {
    ItemResponseSpec spec;
    spec.models = {{"m1", {{"easy", 0.88}, {"hard", 0.36}}},
                   {"m2", {{"easy", 0.80}, {"hard", 0.45}}}};
    ItemResponseMatrix irm = generate_item_responses(spec, 10000, 42);
    REQUIRE(irm.models.size() == 2);
    REQUIRE(irm.items.size() == 20000);
    for (size_t m = 0; m < irm.models.size(); ++m) {
        std::map<std::string, std::pair<long, long>> agg;
        for (size_t i = 0; i < irm.items.size(); ++i) {
            auto& [succ, tot] = agg[*irm.items[i].stratum];
            succ += irm.at(m, i);
            ++tot;
        }
        for (const auto& [stratum, st] : agg) {
            double want = spec.models[m].rates.at(stratum);
            CHECK(std::abs(double(st.first) / st.second - want) < 0.02);
        }
    }
    ItemResponseMatrix again = generate_item_responses(spec, 10000, 42);
    CHECK(irm.responses == again.responses);
}

TEST_CASE("all-ones rates produce an all-ones matrix") {
    ItemResponseSpec spec;
    spec.models = {{"m", {{"s", 1.0}}}};
    ItemResponseMatrix irm = generate_item_responses(spec, 50, 1);
    for (uint8_t r : irm.responses) CHECK(r == 1);
}

TEST_CASE("item response CSV round-trip") {
    ItemResponseSpec spec;
    spec.models = {{"m1", {{"easy", 0.7}, {"hard", 0.3}}}, {"m2", {{"easy", 0.5}, {"hard", 0.5}}}};
    ItemResponseMatrix irm = generate_item_responses(spec, 20, 3);
    fs::path p = fs::temp_directory_path() / "esteval_irm.csv";
    save_item_responses_csv(irm, p.string());
    ItemResponseMatrix back = load_item_responses_csv(p.string());
    CHECK(back.models == irm.models);
    CHECK(back.responses == irm.responses);
    REQUIRE(back.items.size() == irm.items.size());
    for (size_t i = 0; i < irm.items.size(); ++i) {
        CHECK(back.items[i].id == irm.items[i].id);
        CHECK(back.items[i].stratum == irm.items[i].stratum);
    }
}

TEST_CASE("embeddings CSV round-trip") {
    EmbeddingDataset ds = generate_synthetic_identities(4, 3, 5, 1.0, 2.0, 11);
    fs::path p = fs::temp_directory_path() / "esteval_emb.csv";
    save_embeddings_csv(ds, p.string());
    EmbeddingDataset back = load_embeddings_csv(p.string());
    CHECK(back.ids == ds.ids);
    CHECK(back.identity == ds.identity);
    REQUIRE(back.vectors.size() == ds.vectors.size());
    for (size_t i = 0; i < ds.vectors.size(); ++i)
        CHECK(back.vectors[i] == doctest::Approx(ds.vectors[i]).epsilon(1e-15));
}

TEST_SUITE_END();
