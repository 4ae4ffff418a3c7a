#pragma once

#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/estimators.hpp"
#include "core/learners.hpp"
#include "core/uncertainty.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace esteval {

enum class BetterIs { lower, higher };

// (est_A, est_B, true_A, true_B) for one replication.
struct ScoreRecord {
    double est_a = 0.0;
    double est_b = 0.0;
    double phi_a = 0.0;
    double phi_b = 0.0;
};

struct ReplicationRecord {
    size_t index = 0;
    double phi_a = 0.0;
    double phi_b = 0.0;
    double est_a = 0.0;
    double est_b = 0.0;
    bool reversal = false;
    bool tie = false;
    bool failure = false;
    std::string failure_reason;
};

struct RankReversalResult {
    std::optional<double> probability;  // absent when no effective replication exists
    size_t replications = 0;
    size_t reversals = 0;
    size_t ties = 0;
    size_t failures = 0;
    size_t effective = 0;
    double mean_phi_a = 0.0;
    double mean_phi_b = 0.0;
    double mean_est_a = 0.0;
    double mean_est_b = 0.0;
    std::optional<Interval> interval;  // 95% Wilson around the probability
    std::vector<ReplicationRecord> records;
};

// Recomputes reversal/tie flags in place and tallies the result. When
// truth_override is given (mean true scores), the comparison target is that
// fixed pair instead of each record's own phi values.
RankReversalResult aggregate_records(std::vector<ReplicationRecord> records, BetterIs better,
                                     std::optional<std::pair<double, double>> truth_override = {});

RankReversalResult rank_reversal_probability(const std::vector<ScoreRecord>& records,
                                             BetterIs better);

enum class Target { conditional, unconditional };

struct ResamplingPlan {
    size_t train_n = 2000;
    size_t replications = 200;
    CvScheme scheme = CvScheme::loo();
    Target target = Target::conditional;
    uint64_t master_seed = 0;
};

// (training-sample seed, cv-scheme seed) for one replication of a plan.
std::pair<uint64_t, uint64_t> replication_seeds(uint64_t master_seed, size_t index);

RankReversalResult run_resampling_experiment(const TabularDataset& population,
                                             const LearnerSpec& spec_a, const LearnerSpec& spec_b,
                                             const ResamplingPlan& plan, size_t threads);

enum class FEstimator { plugin, cluster_decomposed };

struct LabelingPlan {
    size_t m = 10;  // true clusters per sample
    size_t simulations = 2000;
    FEstimator estimator = FEstimator::plugin;
    uint64_t master_seed = 0;
};

RankReversalResult run_labeling_experiment(const Clustering& pred_a, const Clustering& pred_b,
                                           const Clustering& truth, const LabelingPlan& plan,
                                           size_t threads);

struct StrataReversalReport {
    bool reversal = false;
    std::map<std::string, std::string> preferred;  // stratum -> "A" | "B" | "tie"
};

StrataReversalReport detect_strata_reversal(const std::map<std::string, double>& rates_a,
                                            const std::map<std::string, double>& rates_b);

}  // namespace esteval
