// Config-driven experiment runner: parses a JSON experiment description,
// executes it, and renders report.json plus the CSV artifacts.
#pragma once

#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/estimand.hpp"
#include "core/mcdm.hpp"
#include "core/rank_reversal.hpp"
#include "core/uncertainty.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace esteval {

enum class ExperimentKind {
    cv_rank_reversal,
    clustering_rank_reversal,
    benchmark_strata,
    mcdm_aggregate,
};

const char* experiment_kind_name(ExperimentKind k);

struct CvConfig {
    std::string dataset_path;
    ResamplingPlan plan;
    LearnerSpec learner_a;
    LearnerSpec learner_b;
};

struct ClusteringConfig {
    std::optional<std::string> embeddings_path;  // otherwise the generator below
    size_t identities = 40;
    size_t per_identity = 10;
    size_t dim = 16;
    double within_spread = 1.0;
    double between_spread = 2.0;
    size_t k_a = 30;
    size_t k_b = 60;
    LabelingPlan plan;
};

struct StrataModelConfig {
    std::string id;
    std::map<std::string, double> rates;  // stratum -> success rate
};

struct StrataConfig {
    std::optional<std::string> responses_path;     // otherwise the generator below
    std::vector<StrataModelConfig> models;
    size_t items_per_stratum = 10000;
    std::string model_a;
    std::string model_b;
    bool strata_from_metadata = true;              // false: estimated tertiles
    std::vector<std::string> reference_models;     // estimated source; empty = all
};

struct McdmConfig {
    CriteriaMatrix criteria;
    std::optional<std::vector<double>> weights;
    std::optional<ComparisonMatrix> comparison;  // AHP-derived weights
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::cv_rank_reversal;
    Estimand estimand;
    uint64_t seed = 0;
    size_t threads = 1;
    std::string output_dir = "out";
    std::optional<CvConfig> cv;
    std::optional<ClusteringConfig> clustering;
    std::optional<StrataConfig> strata;
    std::optional<McdmConfig> mcdm;
};

// Throws Error(config_invalid) on structural problems (unknown kind, wrong
// types). Semantic problems are left to validate_config.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Human-readable issues; empty means runnable. Estimand issues are included
// with their validate_estimand message verbatim.
std::vector<std::string> validate_config(const ExperimentConfig& c);

struct SensitivityEntry {
    std::string label;
    double estimate = 0.0;
};

struct ReportProvenance {
    uint64_t seed = 0;
    uint64_t replications = 0;
    std::string started;   // UTC, second resolution
    std::string finished;
};

struct EvaluationReport {
    Estimand estimand;
    std::optional<double> main_estimate;
    std::optional<Interval> uncertainty;
    std::vector<SensitivityEntry> sensitivity;
    ReportProvenance provenance;
};

// Fields in fixed order: estimand, main_estimate, uncertainty, sensitivity,
// provenance. A percentile-bootstrap interval must bracket the main estimate.
nlohmann::ordered_json evaluation_report_to_json(const EvaluationReport& rep);

struct RunResult {
    nlohmann::ordered_json report;   // exact content of report.json
    std::vector<std::string> files;  // artifact paths, report.json first
};

// Validates, executes and writes the artifacts into output_dir. Everything in
// report.json except provenance.timestamps is a pure function of the config.
RunResult run_experiment(const ExperimentConfig& c);

// CSV table in the shape of the published summary tables; deterministic bytes.
std::string render_table(const nlohmann::ordered_json& report);

inline constexpr size_t kHistogramBins = 50;

struct FeatureHistogram {
    std::string feature;
    std::vector<double> edges;  // kHistogramBins + 1, fixed width over the population range
    std::vector<uint64_t> sample_counts;
    std::vector<uint64_t> population_counts;
};

// Values outside the population range are clamped into the edge bins, so each
// count column sums to its dataset size.
std::vector<FeatureHistogram> emit_plot_data(const TabularDataset& sample,
                                             const TabularDataset& population);
void write_histograms_csv(const std::vector<FeatureHistogram>& hists, const std::string& path);

}  // namespace esteval
