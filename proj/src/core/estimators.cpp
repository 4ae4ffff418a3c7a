#include "core/estimators.hpp"

#include "core/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace esteval {

namespace {

long long pairs_of(long long n) { return n * (n - 1) / 2; }

void check_same_universe(const Clustering& pred, const Clustering& truth) {
    if (pred.ids.size() != truth.ids.size() || pred.ids != truth.ids)
        throw Error(Err::dimension_mismatch, "clusterings cover different record universes");
    if (pred.labels.size() != pred.ids.size() || truth.labels.size() != truth.ids.size())
        throw Error(Err::dimension_mismatch, "clustering labels misaligned with ids");
}

size_t model_dim(const FittedModel& m) {
    if (std::holds_alternative<LinearModel>(m))
        return std::get<LinearModel>(m).coefficients.size();
    return std::get<RegressionTree>(m).d;
}

}  // namespace

FittedModel fit_learner(const LearnerSpec& spec, const std::vector<double>& X,
                        const std::vector<double>& y, size_t d) {
    if (spec.kind == LearnerSpec::Kind::ols) return fit_ols(X, y, d);
    return fit_tree(X, y, d, spec.max_depth, spec.min_leaf);
}

std::vector<double> predict_model(const FittedModel& m, const std::vector<double>& X, size_t d) {
    if (std::holds_alternative<LinearModel>(m)) return predict(std::get<LinearModel>(m), X, d);
    return predict(std::get<RegressionTree>(m), X, d);
}

double true_generalization_error(const FittedModel& m, const TabularDataset& population) {
    if (population.n() == 0) throw Error(Err::empty_dataset, "population is empty");
    if (model_dim(m) != population.d())
        throw Error(Err::dimension_mismatch, "model dimension differs from population");
    std::vector<double> pred = predict_model(m, population.X, population.d());
    double total = 0;
    for (size_t i = 0; i < population.n(); ++i) {
        double e = pred[i] - population.y[i];
        total += e * e;
    }
    return total / double(population.n());
}

namespace {

// Refit on all rows except `holdout`, in ascending row order, and return the
// held-out squared errors. The tree path goes through the shared presort so it
// stays bitwise identical to an explicit refit.
double holdout_sse(const LearnerSpec& spec, const TabularDataset& ds,
                   const std::vector<size_t>& holdout, const TreePresort* pre) {
    size_t d = ds.d();
    std::vector<char> held(ds.n(), 0);
    for (size_t i : holdout) held[i] = 1;
    FittedModel m;
    if (spec.kind == LearnerSpec::Kind::tree && pre != nullptr && holdout.size() == 1) {
        m = fit_tree_presorted(*pre, int(holdout[0]), spec.max_depth, spec.min_leaf);
    } else {
        std::vector<double> X, y;
        for (size_t i = 0; i < ds.n(); ++i) {
            if (held[i]) continue;
            y.push_back(ds.y[i]);
            for (size_t j = 0; j < d; ++j) X.push_back(ds.x(i, j));
        }
        m = fit_learner(spec, X, y, d);
    }
    double sse = 0;
    for (size_t i : holdout) {
        std::vector<double> row(ds.X.begin() + i * d, ds.X.begin() + (i + 1) * d);
        double e = predict_model(m, row, d)[0] - ds.y[i];
        sse += e * e;
    }
    return sse;
}

}  // namespace

double cross_validate(const LearnerSpec& spec, const TabularDataset& ds, const CvScheme& scheme) {
    size_t n = ds.n();
    if (n < 2) throw Error(Err::invalid_argument, "cross-validation needs at least 2 rows");
    if (scheme.kind == CvScheme::Kind::loo) {
        TreePresort pre;
        if (spec.kind == LearnerSpec::Kind::tree) pre = make_tree_presort(ds.X, ds.y, ds.d());
        double total = 0;
        for (size_t i = 0; i < n; ++i)
            total += holdout_sse(spec, ds, {i},
                                 spec.kind == LearnerSpec::Kind::tree ? &pre : nullptr);
        return total / double(n);
    }
    size_t k = scheme.k;
    if (k < 2) throw Error(Err::invalid_argument, "k-fold needs k >= 2");
    if (k > n)
        throw Error(Err::k_exceeds_n, "k-exceeds-n: k=" + std::to_string(k) + " > n=" + std::to_string(n));
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = Rng::from(scheme.seed, "kfold", 0);
    for (size_t i = n - 1; i > 0; --i) std::swap(idx[i], idx[size_t(rng.next_below(i + 1))]);
    double total = 0;
    size_t start = 0;
    for (size_t f = 0; f < k; ++f) {
        size_t size = n / k + (f < n % k ? 1 : 0);
        std::vector<size_t> fold(idx.begin() + start, idx.begin() + start + size);
        start += size;
        total += holdout_sse(spec, ds, fold, nullptr) / double(size);
    }
    return total / double(k);
}

double loo_ols_exact(const std::vector<double>& X, const std::vector<double>& y, size_t d) {
    size_t n = y.size();
    if (d == 0 || X.size() != n * d) throw Error(Err::dimension_mismatch, "X must be n x d");
    for (double v : X)
        if (!std::isfinite(v)) throw Error(Err::non_finite_input, "X contains a non-finite value");
    for (double v : y)
        if (!std::isfinite(v)) throw Error(Err::non_finite_input, "y contains a non-finite value");
    Eigen::MatrixXd A(n, d + 1);
    Eigen::VectorXd b(n);
    for (size_t i = 0; i < n; ++i) {
        A(i, 0) = 1.0;
        for (size_t j = 0; j < d; ++j) A(i, j + 1) = X[i * d + j];
        b(i) = y[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < Eigen::Index(d + 1))
        throw Error(Err::rank_deficient, "design matrix rank " + std::to_string(qr.rank()) +
                                             " < " + std::to_string(d + 1));
    Eigen::VectorXd residual = b - A * qr.solve(b);
    // leverage h_ii from the thin Q factor of the unpivoted decomposition
    Eigen::HouseholderQR<Eigen::MatrixXd> hh(A);
    Eigen::MatrixXd thin_q =
        hh.householderQ() * Eigen::MatrixXd::Identity(Eigen::Index(n), Eigen::Index(d + 1));
    double total = 0;
    for (size_t i = 0; i < n; ++i) {
        double h = thin_q.row(i).squaredNorm();
        if (h >= 1.0 - 1e-12)
            throw Error(Err::degenerate_leverage,
                        "row " + std::to_string(i) + " has leverage " + std::to_string(h));
        double e = residual(i) / (1.0 - h);
        total += e * e;
    }
    return total / double(n);
}

double loo_ols_exact(const TabularDataset& ds) { return loo_ols_exact(ds.X, ds.y, ds.d()); }

PRF pairwise_prf(const Clustering& pred, const Clustering& truth) {
    check_same_universe(pred, truth);
    std::map<std::pair<int, int>, long long> cells;
    std::map<int, long long> pred_sizes, truth_sizes;
    for (size_t i = 0; i < pred.labels.size(); ++i) {
        ++cells[{truth.labels[i], pred.labels[i]}];
        ++pred_sizes[pred.labels[i]];
        ++truth_sizes[truth.labels[i]];
    }
    long long tp = 0, pp = 0, tt = 0;
    for (const auto& [key, c] : cells) tp += pairs_of(c);
    for (const auto& [key, c] : pred_sizes) pp += pairs_of(c);
    for (const auto& [key, c] : truth_sizes) tt += pairs_of(c);
    if (pp == 0) throw Error(Err::no_predicted_pairs, "prediction has no co-clustered pairs");
    if (tt == 0) throw Error(Err::no_true_pairs, "truth has no co-clustered pairs");
    PRF out;
    out.precision = double(tp) / double(pp);
    out.recall = double(tp) / double(tt);
    out.f_score = 2.0 * double(tp) / double(pp + tt);
    return out;
}

PairComposition pair_composition(const Clustering& truth) {
    if (truth.ids.empty()) throw Error(Err::empty_dataset, "clustering universe is empty");
    std::map<int, long long> sizes;
    for (int l : truth.labels) ++sizes[l];
    long long matching = 0;
    for (const auto& [label, c] : sizes) matching += pairs_of(c);
    long long all = pairs_of((long long)truth.labels.size());
    PairComposition pc;
    pc.matching_pairs = (unsigned long long)matching;
    pc.non_matching_pairs = (unsigned long long)(all - matching);
    if (pc.non_matching_pairs > 0)
        pc.ratio = double(pc.matching_pairs) / double(pc.non_matching_pairs);
    return pc;
}

namespace {

std::set<int> validate_sample(const Clustering& truth, const std::vector<int>& sampled) {
    if (sampled.empty()) throw Error(Err::empty_sample, "empty cluster sample");
    std::set<int> existing(truth.labels.begin(), truth.labels.end());
    std::set<int> keep;
    for (int id : sampled) {
        if (!existing.count(id))
            throw Error(Err::invalid_argument,
                        "sampled cluster id " + std::to_string(id) + " not in truth");
        if (!keep.insert(id).second)
            throw Error(Err::invalid_argument,
                        "sampled cluster id " + std::to_string(id) + " repeated");
    }
    return keep;
}

}  // namespace

PRF plugin_f_on_cluster_sample(const Clustering& pred, const Clustering& truth,
                               const std::vector<int>& sampled_cluster_ids) {
    check_same_universe(pred, truth);
    std::set<int> keep = validate_sample(truth, sampled_cluster_ids);
    Clustering sub_pred, sub_truth;
    for (size_t i = 0; i < truth.labels.size(); ++i) {
        if (!keep.count(truth.labels[i])) continue;
        sub_truth.ids.push_back(truth.ids[i]);
        sub_truth.labels.push_back(truth.labels[i]);
        sub_pred.ids.push_back(pred.ids[i]);
        sub_pred.labels.push_back(pred.labels[i]);
    }
    return pairwise_prf(sub_pred, sub_truth);
}

DecomposedSums cluster_decomposed_sums(const Clustering& pred, const Clustering& truth,
                                       const std::vector<int>& sampled_cluster_ids) {
    check_same_universe(pred, truth);
    std::set<int> keep = validate_sample(truth, sampled_cluster_ids);
    std::map<int, long long> pred_sizes;
    for (int l : pred.labels) ++pred_sizes[l];
    std::map<int, std::vector<size_t>> members;
    for (size_t i = 0; i < truth.labels.size(); ++i)
        if (keep.count(truth.labels[i])) members[truth.labels[i]].push_back(i);
    DecomposedSums sums;
    for (const auto& [cluster, rows] : members) {
        std::map<int, long long> overlap;  // pred label -> members of this true cluster in it
        for (size_t i : rows) ++overlap[pred.labels[i]];
        long long tp = 0;
        double cross = 0;
        for (const auto& [plabel, a] : overlap) {
            tp += pairs_of(a);
            cross += double(a) * double(pred_sizes[plabel] - a);
        }
        sums.tp += double(tp);
        sums.t += double(pairs_of((long long)rows.size()));
        sums.phalf += double(tp) + 0.5 * cross;
    }
    return sums;
}

PRF cluster_decomposed_f(const Clustering& pred, const Clustering& truth,
                         const std::vector<int>& sampled_cluster_ids) {
    DecomposedSums s = cluster_decomposed_sums(pred, truth, sampled_cluster_ids);
    double denom = 0.5 * (s.t + s.phalf);
    if (denom == 0.0)
        throw Error(Err::zero_denominator, "no true or predicted pairs touch the sample");
    PRF out;
    out.precision = s.phalf > 0 ? s.tp / s.phalf : 0.0;
    out.recall = s.t > 0 ? s.tp / s.t : 0.0;
    out.f_score = s.tp / denom;
    return out;
}

DifficultyStrata estimate_item_difficulty(const ItemResponseMatrix& irm,
                                          const std::vector<std::string>& reference_models) {
    if (irm.items.empty()) throw Error(Err::empty_items, "item response matrix has no items");
    if (reference_models.empty())
        throw Error(Err::invalid_argument, "reference model list is empty");
    std::vector<size_t> refs;
    for (const auto& name : reference_models) {
        auto it = std::find(irm.models.begin(), irm.models.end(), name);
        if (it == irm.models.end())
            throw Error(Err::invalid_argument, "reference model '" + name + "' not in matrix");
        refs.push_back(size_t(it - irm.models.begin()));
    }
    size_t n = irm.items.size();
    std::vector<double> mean(n);
    for (size_t i = 0; i < n; ++i) {
        double s = 0;
        for (size_t m : refs) s += irm.at(m, i);
        mean[i] = s / double(refs.size());
    }
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (mean[a] != mean[b]) return mean[a] > mean[b];
        return irm.items[a].id < irm.items[b].id;
    });
    DifficultyStrata out;
    size_t base = n / 3, rem = n % 3, cut1 = base + (rem > 0), cut2 = 2 * base + (rem > 0) + (rem > 1);
    for (size_t pos = 0; pos < n; ++pos) {
        size_t i = order[pos];
        out.item_ids.push_back(irm.items[i].id);
        out.mean_success.push_back(mean[i]);
        std::string label = pos < cut1 ? "easy" : pos < cut2 ? "hard" : "expert";
        out.stratum.push_back(label);
        out.by_item[irm.items[i].id] = label;
    }
    return out;
}

DifficultyStrata strata_from_metadata(const ItemResponseMatrix& irm) {
    if (irm.items.empty()) throw Error(Err::empty_items, "item response matrix has no items");
    DifficultyStrata out;
    for (size_t i = 0; i < irm.items.size(); ++i) {
        const Item& item = irm.items[i];
        if (!item.stratum)
            throw Error(Err::invalid_argument, "item '" + item.id + "' has no stratum label");
        double s = 0;
        for (size_t m = 0; m < irm.models.size(); ++m) s += irm.at(m, i);
        out.item_ids.push_back(item.id);
        out.mean_success.push_back(s / double(irm.models.size()));
        out.stratum.push_back(*item.stratum);
        out.by_item[item.id] = *item.stratum;
    }
    return out;
}

std::map<std::string, double> stratified_success_rates(const ItemResponseMatrix& irm,
                                                       const DifficultyStrata& strata,
                                                       const std::string& model) {
    auto it = std::find(irm.models.begin(), irm.models.end(), model);
    if (it == irm.models.end())
        throw Error(Err::invalid_argument, "model '" + model + "' not in matrix");
    size_t m = size_t(it - irm.models.begin());
    std::map<std::string, double> sums;
    std::map<std::string, size_t> counts;
    for (size_t i = 0; i < irm.items.size(); ++i) {
        auto found = strata.by_item.find(irm.items[i].id);
        if (found == strata.by_item.end())
            throw Error(Err::invalid_argument, "item '" + irm.items[i].id + "' not in strata");
        sums[found->second] += irm.at(m, i);
        ++counts[found->second];
    }
    for (auto& [label, s] : sums) s /= double(counts[label]);
    return sums;
}

ViolationReport prediction_plausibility_check(const FittedModel& m,
                                              const TabularDataset& population, double lo,
                                              double hi) {
    if (!(lo < hi)) throw Error(Err::invalid_argument, "bounds must satisfy lo < hi");
    if (model_dim(m) != population.d())
        throw Error(Err::dimension_mismatch, "model dimension differs from population");
    std::vector<double> pred = predict_model(m, population.X, population.d());
    ViolationReport rep;
    rep.min_prediction = pred.empty() ? 0.0 : pred[0];
    rep.max_prediction = rep.min_prediction;
    for (size_t i = 0; i < pred.size(); ++i) {
        rep.min_prediction = std::min(rep.min_prediction, pred[i]);
        rep.max_prediction = std::max(rep.max_prediction, pred[i]);
        if (pred[i] < lo || pred[i] > hi) {
            ++rep.count;
            rep.row_ids.push_back(population.ids[i]);
        }
    }
    return rep;
}

}  // namespace esteval
