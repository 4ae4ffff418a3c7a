#pragma once

#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/learners.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace esteval {

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
};

struct PairComposition {
    unsigned long long matching_pairs = 0;
    unsigned long long non_matching_pairs = 0;
    std::optional<double> ratio;  // matching / non-matching, absent when the latter is 0
};

struct LearnerSpec {
    enum class Kind { ols, tree };
    Kind kind = Kind::ols;
    size_t max_depth = 5;
    size_t min_leaf = 1;
    std::string label;
};

using FittedModel = std::variant<LinearModel, RegressionTree>;

FittedModel fit_learner(const LearnerSpec& spec, const std::vector<double>& X,
                        const std::vector<double>& y, size_t d);
std::vector<double> predict_model(const FittedModel& m, const std::vector<double>& X, size_t d);

struct CvScheme {
    enum class Kind { loo, kfold };
    Kind kind = Kind::loo;
    size_t k = 10;
    uint64_t seed = 0;
    static CvScheme loo() { return {}; }
    static CvScheme kfold(size_t k, uint64_t seed) {
        CvScheme s;
        s.kind = Kind::kfold;
        s.k = k;
        s.seed = seed;
        return s;
    }
};

double true_generalization_error(const FittedModel& m, const TabularDataset& population);
double cross_validate(const LearnerSpec& spec, const TabularDataset& ds, const CvScheme& scheme);
double loo_ols_exact(const std::vector<double>& X, const std::vector<double>& y, size_t d);
double loo_ols_exact(const TabularDataset& ds);

PRF pairwise_prf(const Clustering& pred, const Clustering& truth);
PairComposition pair_composition(const Clustering& truth);
PRF plugin_f_on_cluster_sample(const Clustering& pred, const Clustering& truth,
                               const std::vector<int>& sampled_cluster_ids);

// Per-cluster decomposition sums over a sampled set of true clusters:
// tp = predicted-co-clustered pairs within each cluster, t = true pairs,
// phalf = tp + half of the predicted links leaving each cluster. Over the full
// census, phalf sums exactly to the predicted pair count.
struct DecomposedSums {
    double tp = 0.0;
    double t = 0.0;
    double phalf = 0.0;
};

DecomposedSums cluster_decomposed_sums(const Clustering& pred, const Clustering& truth,
                                       const std::vector<int>& sampled_cluster_ids);
PRF cluster_decomposed_f(const Clustering& pred, const Clustering& truth,
                         const std::vector<int>& sampled_cluster_ids);

struct DifficultyStrata {
    std::vector<std::string> item_ids;  // sorted by descending mean success, ties by id
    std::vector<double> mean_success;
    std::vector<std::string> stratum;  // easy | hard | expert, aligned with item_ids
    std::map<std::string, std::string> by_item;
};

DifficultyStrata estimate_item_difficulty(const ItemResponseMatrix& irm,
                                          const std::vector<std::string>& reference_models);
DifficultyStrata strata_from_metadata(const ItemResponseMatrix& irm);
std::map<std::string, double> stratified_success_rates(const ItemResponseMatrix& irm,
                                                       const DifficultyStrata& strata,
                                                       const std::string& model);

struct ViolationReport {
    size_t count = 0;
    std::vector<std::string> row_ids;
    double min_prediction = 0.0;
    double max_prediction = 0.0;
};

ViolationReport prediction_plausibility_check(const FittedModel& m,
                                              const TabularDataset& population, double lo,
                                              double hi);

}  // namespace esteval
