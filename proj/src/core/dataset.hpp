#pragma once

#include "core/errors.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace esteval {

struct TabularDataset {
    std::vector<std::string> ids;
    std::vector<std::string> feature_names;
    std::string target_name;
    std::vector<double> X;  // row-major n x d
    std::vector<double> y;

    size_t n() const { return y.size(); }
    size_t d() const { return feature_names.size(); }
    double x(size_t i, size_t j) const { return X[i * d() + j]; }
};

struct EmbeddingDataset {
    std::vector<std::string> ids;
    std::vector<double> vectors;  // row-major n x dim
    std::vector<int> identity;
    size_t dim_ = 0;

    size_t n() const { return identity.size(); }
    size_t dim() const { return dim_; }
};

struct Item {
    std::string id;
    std::optional<std::string> stratum;
};

struct ItemResponseMatrix {
    std::vector<std::string> models;
    std::vector<Item> items;
    std::vector<uint8_t> responses;  // models x items, row-major

    uint8_t at(size_t model, size_t item) const { return responses[model * items.size() + item]; }
};

struct FeatureStats {
    std::string name;
    // 1, 5, 25, 50, 75, 95, 99 percent
    std::array<double, 7> sample_quantiles;
    std::array<double, 7> population_quantiles;
    double sample_excess_kurtosis;
    double population_excess_kurtosis;
    double ks;  // two-sample KS statistic, sample vs population
    bool ks_flag;
    bool coverage_flag;
};

struct DistributionReport {
    std::vector<FeatureStats> features;
};

// Flag constants for feature_distribution_report. The KS flag fires when the
// two-sample statistic exceeds kKsFlagThreshold; the coverage flag fires when
// the population max exceeds the sample max by more than the population
// 99-50% interquantile range.
inline constexpr double kKsFlagThreshold = 0.15;

// MedInc ... MedHouseVal; the last column is the target in units of $100,000.
const std::vector<std::string>& california_schema();

// Strict loader: header must equal the schema, every cell numeric and finite.
// The last schema column is the response.
TabularDataset load_tabular_csv(const std::string& path, const std::vector<std::string>& schema);

TabularDataset sample_with_replacement(const TabularDataset& ds, size_t n, uint64_t seed);

// Per-stratum simple random samples without replacement, concatenated in
// sorted stratum order.
TabularDataset stratified_sample(const TabularDataset& ds,
                                 const std::vector<std::string>& row_strata,
                                 const std::map<std::string, uint64_t>& allocation,
                                 uint64_t seed);

double ks_two_sample(std::vector<double> a, std::vector<double> b);

DistributionReport feature_distribution_report(const TabularDataset& sample,
                                               const TabularDataset& population);

// Identity centroids are i.i.d. isotropic Gaussian with scale between_spread;
// members sit at centroid + isotropic Gaussian noise with scale within_spread.
EmbeddingDataset generate_synthetic_identities(size_t n_identities, size_t per_identity,
                                               size_t dim, double within_spread,
                                               double between_spread, uint64_t seed);

struct ModelRates {
    std::string model_id;
    std::map<std::string, double> rates;  // stratum -> success rate
};

struct ItemResponseSpec {
    std::vector<ModelRates> models;
};

ItemResponseMatrix generate_item_responses(const ItemResponseSpec& spec,
                                           size_t items_per_stratum, uint64_t seed);

// CSV forms documented in the README: embeddings are id,identity,v0..v{d-1};
// item responses are long-format model_id,item_id,stratum,response.
EmbeddingDataset load_embeddings_csv(const std::string& path);
void save_embeddings_csv(const EmbeddingDataset& ds, const std::string& path);
ItemResponseMatrix load_item_responses_csv(const std::string& path);
void save_item_responses_csv(const ItemResponseMatrix& irm, const std::string& path);

}  // namespace esteval
