// Multi-criteria decision making over model comparisons: Pareto frontiers,
// explicit weighted aggregation, and AHP weight elicitation.
#pragma once

#include "core/errors.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace esteval {

struct Criterion {
    std::string id;
    bool maximize = true;
};

// Alternatives x criteria score table, row-major.
struct CriteriaMatrix {
    std::vector<std::string> alternatives;
    std::vector<Criterion> criteria;
    std::vector<double> scores;

    double at(size_t alt, size_t crit) const { return scores[alt * criteria.size() + crit]; }
};

// Alternatives not strictly dominated on every criterion, in input order.
// Exact ties are kept: two alternatives with identical rows both survive.
std::vector<std::string> pareto_frontier(const CriteriaMatrix& m);

// Weighted sum of direction-adjusted scores (minimized criteria are negated).
// Weights must be nonnegative, match the criterion count, and sum to one.
std::map<std::string, double> weighted_aggregate(const CriteriaMatrix& m,
                                                 const std::vector<double>& weights);

// Pairwise comparison matrix for AHP, k x k row-major, values[i*k+j] = how
// strongly criterion i is preferred over j. Must be positive and reciprocal.
struct ComparisonMatrix {
    std::vector<std::string> criteria;
    std::vector<double> values;

    size_t size() const { return criteria.size(); }
};

struct AhpResult {
    std::vector<double> weights;  // principal eigenvector, normalized to sum 1
    double lambda_max = 0.0;
    double consistency_index = 0.0;
    double consistency_ratio = 0.0;
    bool inconsistent = false;  // consistency ratio above 0.1
};

AhpResult ahp_weights(const ComparisonMatrix& c);

// CSV layouts:
//   criteria:   alternative,<id>:max,<id>:min,...  then one row per alternative
//   comparison: criterion,<id>,<id>,...            then one labeled row per criterion
void save_criteria_csv(const CriteriaMatrix& m, const std::string& path);
CriteriaMatrix load_criteria_csv(const std::string& path);
void save_comparison_csv(const ComparisonMatrix& c, const std::string& path);
ComparisonMatrix load_comparison_csv(const std::string& path);

nlohmann::ordered_json criteria_matrix_to_json(const CriteriaMatrix& m);
CriteriaMatrix criteria_matrix_from_json(const nlohmann::json& j);
nlohmann::ordered_json comparison_matrix_to_json(const ComparisonMatrix& c);
ComparisonMatrix comparison_matrix_from_json(const nlohmann::json& j);

}  // namespace esteval
