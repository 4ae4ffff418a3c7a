#pragma once

#include "core/dataset.hpp"
#include "core/errors.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace esteval {

struct LinearModel {
    std::vector<double> coefficients;
    double intercept = 0.0;
};

// feature < 0 marks a leaf; nodes[0] is the root, children stored in preorder.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    size_t d = 0;
    size_t max_depth = 0;
};

struct KMeansModel {
    std::vector<double> centroids;  // k x d row-major
    size_t k = 0;
    size_t d = 0;
    std::vector<double> inertia_history;  // one entry per assignment pass
};

// Index-aligned partition of a record universe.
struct Clustering {
    std::vector<std::string> ids;
    std::vector<int> labels;
    size_t n() const { return ids.size(); }
};

LinearModel fit_ols(const std::vector<double>& X, const std::vector<double>& y, size_t d);
std::vector<double> predict(const LinearModel& m, const std::vector<double>& X, size_t d);

// Per-feature row orders sorted by (value, row index). Shared across the
// leave-one-out refits of one training set: fitting with skip_row == i is
// bitwise identical to re-sorting and fitting the n-1 remaining rows.
struct TreePresort {
    std::vector<double> X;
    std::vector<double> y;
    size_t n = 0;
    size_t d = 0;
    std::vector<std::vector<int>> order;
};

TreePresort make_tree_presort(const std::vector<double>& X, const std::vector<double>& y, size_t d);
RegressionTree fit_tree_presorted(const TreePresort& pre, int skip_row, size_t max_depth,
                                  size_t min_leaf);
RegressionTree fit_tree(const std::vector<double>& X, const std::vector<double>& y, size_t d,
                        size_t max_depth, size_t min_leaf);
std::vector<double> predict(const RegressionTree& t, const std::vector<double>& X, size_t d);

KMeansModel fit_kmeans(const std::vector<double>& vectors, size_t d, size_t k, uint64_t seed,
                       size_t max_iter = 100, double tol = 1e-9);
Clustering assign_clusters(const KMeansModel& m, const EmbeddingDataset& ds);
Clustering truth_clustering(const EmbeddingDataset& ds);

}  // namespace esteval
