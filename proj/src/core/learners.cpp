#include "core/learners.hpp"

#include "core/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace esteval {

namespace {

void check_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw Error(Err::non_finite_input, std::string(what) + " contains a non-finite value");
}

void check_shape(const std::vector<double>& X, const std::vector<double>& y, size_t d) {
    if (d == 0 || y.empty() || X.size() != y.size() * d)
        throw Error(Err::dimension_mismatch, "X must be n x d with n = |y|");
}

}  // namespace

LinearModel fit_ols(const std::vector<double>& X, const std::vector<double>& y, size_t d) {
    check_shape(X, y, d);
    check_finite(X, "X");
    check_finite(y, "y");
    size_t n = y.size();
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
    Eigen::VectorXd w = qr.solve(b);
    LinearModel m;
    m.intercept = w(0);
    m.coefficients.assign(w.data() + 1, w.data() + d + 1);
    return m;
}

std::vector<double> predict(const LinearModel& m, const std::vector<double>& X, size_t d) {
    if (d != m.coefficients.size())
        throw Error(Err::dimension_mismatch, "model expects d=" + std::to_string(m.coefficients.size()));
    if (X.size() % d != 0) throw Error(Err::dimension_mismatch, "X size not a multiple of d");
    size_t n = X.size() / d;
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) {
        double v = m.intercept;
        for (size_t j = 0; j < d; ++j) v += m.coefficients[j] * X[i * d + j];
        out[i] = v;
    }
    return out;
}

TreePresort make_tree_presort(const std::vector<double>& X, const std::vector<double>& y, size_t d) {
    check_shape(X, y, d);
    check_finite(X, "X");
    check_finite(y, "y");
    TreePresort pre;
    pre.X = X;
    pre.y = y;
    pre.n = y.size();
    pre.d = d;
    pre.order.resize(d);
    for (size_t f = 0; f < d; ++f) {
        auto& ord = pre.order[f];
        ord.resize(pre.n);
        std::iota(ord.begin(), ord.end(), 0);
        std::sort(ord.begin(), ord.end(), [&](int a, int b) {
            double xa = X[size_t(a) * d + f], xb = X[size_t(b) * d + f];
            return xa != xb ? xa < xb : a < b;
        });
    }
    return pre;
}

namespace {

// Greedy CART on per-feature sorted row lists. The split score is the proxy
// sum^2/n maximization, scanned in ascending feature then threshold order with
// strict improvement, so ties resolve to the lowest feature and threshold.
struct TreeBuilder {
    const TreePresort& pre;
    size_t max_depth;
    size_t min_leaf;
    std::vector<TreeNode>& nodes;

    double xval(int row, size_t f) const { return pre.X[size_t(row) * pre.d + f]; }

    int build(std::vector<std::vector<int>> lists, size_t depth) {
        const auto& rows = lists[0];
        size_t n = rows.size();
        double total = 0;
        double ymin = pre.y[rows[0]], ymax = pre.y[rows[0]];
        for (int r : rows) {
            total += pre.y[r];
            ymin = std::min(ymin, pre.y[r]);
            ymax = std::max(ymax, pre.y[r]);
        }
        int self = int(nodes.size());
        nodes.push_back({});
        if (depth >= max_depth || n < 2 * min_leaf || ymin == ymax) {
            nodes[self].value = total / double(n);
            return self;
        }
        int best_f = -1;
        double best_thr = 0, best_proxy = -std::numeric_limits<double>::infinity();
        for (size_t f = 0; f < pre.d; ++f) {
            const auto& ord = lists[f];
            double left_sum = 0;
            for (size_t i = 0; i + 1 < n; ++i) {
                left_sum += pre.y[ord[i]];
                double a = xval(ord[i], f), b = xval(ord[i + 1], f);
                if (a == b) continue;
                size_t ln = i + 1, rn = n - ln;
                if (ln < min_leaf || rn < min_leaf) continue;
                double right_sum = total - left_sum;
                double proxy = left_sum * left_sum / double(ln) + right_sum * right_sum / double(rn);
                if (proxy > best_proxy) {
                    best_proxy = proxy;
                    best_f = int(f);
                    best_thr = (a + b) / 2.0;
                }
            }
        }
        if (best_f < 0) {
            nodes[self].value = total / double(n);
            return self;
        }
        std::vector<std::vector<int>> left(pre.d), right(pre.d);
        for (size_t f = 0; f < pre.d; ++f) {
            for (int r : lists[f])
                (xval(r, size_t(best_f)) <= best_thr ? left[f] : right[f]).push_back(r);
        }
        lists.clear();
        nodes[self].feature = best_f;
        nodes[self].threshold = best_thr;
        nodes[self].left = build(std::move(left), depth + 1);
        nodes[self].right = build(std::move(right), depth + 1);
        return self;
    }
};

}  // namespace

RegressionTree fit_tree_presorted(const TreePresort& pre, int skip_row, size_t max_depth,
                                  size_t min_leaf) {
    if (min_leaf == 0) throw Error(Err::invalid_argument, "min_leaf must be positive");
    std::vector<std::vector<int>> lists(pre.d);
    for (size_t f = 0; f < pre.d; ++f) {
        lists[f].reserve(pre.n);
        for (int r : pre.order[f])
            if (r != skip_row) lists[f].push_back(r);
    }
    if (lists[0].empty()) throw Error(Err::empty_dataset, "no rows left to fit");
    RegressionTree t;
    t.d = pre.d;
    t.max_depth = max_depth;
    TreeBuilder builder{pre, max_depth, min_leaf, t.nodes};
    builder.build(std::move(lists), 0);
    return t;
}

RegressionTree fit_tree(const std::vector<double>& X, const std::vector<double>& y, size_t d,
                        size_t max_depth, size_t min_leaf) {
    return fit_tree_presorted(make_tree_presort(X, y, d), -1, max_depth, min_leaf);
}

std::vector<double> predict(const RegressionTree& t, const std::vector<double>& X, size_t d) {
    if (d != t.d) throw Error(Err::dimension_mismatch, "model expects d=" + std::to_string(t.d));
    if (X.size() % d != 0) throw Error(Err::dimension_mismatch, "X size not a multiple of d");
    size_t n = X.size() / d;
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) {
        int node = 0;
        while (t.nodes[node].feature >= 0) {
            node = X[i * d + size_t(t.nodes[node].feature)] <= t.nodes[node].threshold
                       ? t.nodes[node].left
                       : t.nodes[node].right;
        }
        out[i] = t.nodes[node].value;
    }
    return out;
}

KMeansModel fit_kmeans(const std::vector<double>& vectors, size_t d, size_t k, uint64_t seed,
                       size_t max_iter, double tol) {
    if (d == 0 || vectors.size() % d != 0)
        throw Error(Err::dimension_mismatch, "vectors size not a multiple of d");
    check_finite(vectors, "vectors");
    size_t n = vectors.size() / d;
    if (k == 0) throw Error(Err::invalid_argument, "k must be positive");
    if (k > n) throw Error(Err::k_exceeds_n, "k=" + std::to_string(k) + " > n=" + std::to_string(n));

    auto dist2 = [&](size_t i, const double* c) {
        double s = 0;
        for (size_t j = 0; j < d; ++j) {
            double diff = vectors[i * d + j] - c[j];
            s += diff * diff;
        }
        return s;
    };

    KMeansModel m;
    m.k = k;
    m.d = d;
    m.centroids.resize(k * d);

    // k-means++ seeding: first centroid uniform, then D^2 weighting.
    Rng rng = Rng::from(seed, "kmeans++", 0);
    std::vector<char> chosen(n, 0);
    size_t first = size_t(rng.next_below(n));
    chosen[first] = 1;
    std::copy_n(&vectors[first * d], d, &m.centroids[0]);
    std::vector<double> mind(n);
    for (size_t i = 0; i < n; ++i) mind[i] = dist2(i, &m.centroids[0]);
    for (size_t c = 1; c < k; ++c) {
        double total = 0;
        for (double v : mind) total += v;
        size_t pick = n;
        if (total > 0) {
            double r = rng.next_double() * total, cum = 0;
            for (size_t i = 0; i < n; ++i) {
                cum += mind[i];
                if (cum > r) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) {  // numeric edge: fell off the cumulative scan
                for (size_t i = n; i-- > 0;)
                    if (mind[i] > 0) {
                        pick = i;
                        break;
                    }
            }
        }
        if (pick == n) {  // all remaining distances zero: take lowest unchosen
            for (size_t i = 0; i < n; ++i)
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
        }
        chosen[pick] = 1;
        std::copy_n(&vectors[pick * d], d, &m.centroids[c * d]);
        for (size_t i = 0; i < n; ++i) mind[i] = std::min(mind[i], dist2(i, &m.centroids[c * d]));
    }

    std::vector<int> assign(n, 0);
    std::vector<double> sums(k * d);
    std::vector<size_t> counts(k);
    for (size_t it = 0; it < max_iter; ++it) {
        double inertia = 0;
        for (size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = dist2(i, &m.centroids[0]);
            for (size_t c = 1; c < k; ++c) {
                double dd = dist2(i, &m.centroids[c * d]);
                if (dd < best_d) {
                    best_d = dd;
                    best = int(c);
                }
            }
            assign[i] = best;
            inertia += best_d;
        }
        m.inertia_history.push_back(inertia);
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (size_t i = 0; i < n; ++i) {
            ++counts[assign[i]];
            for (size_t j = 0; j < d; ++j) sums[size_t(assign[i]) * d + j] += vectors[i * d + j];
        }
        double shift = 0;
        for (size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its centroid
            double s = 0;
            for (size_t j = 0; j < d; ++j) {
                double nc = sums[c * d + j] / double(counts[c]);
                double diff = nc - m.centroids[c * d + j];
                s += diff * diff;
                m.centroids[c * d + j] = nc;
            }
            shift = std::max(shift, std::sqrt(s));
        }
        if (shift < tol) break;
    }
    return m;
}

Clustering assign_clusters(const KMeansModel& m, const EmbeddingDataset& ds) {
    if (m.d != ds.dim())
        throw Error(Err::dimension_mismatch, "model d=" + std::to_string(m.d) + " vs data dim=" +
                                                 std::to_string(ds.dim()));
    Clustering c;
    c.ids = ds.ids;
    c.labels.resize(ds.n());
    for (size_t i = 0; i < ds.n(); ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t cc = 0; cc < m.k; ++cc) {
            double s = 0;
            for (size_t j = 0; j < m.d; ++j) {
                double diff = ds.vectors[i * m.d + j] - m.centroids[cc * m.d + j];
                s += diff * diff;
            }
            if (s < best_d) {
                best_d = s;
                best = int(cc);
            }
        }
        c.labels[i] = best;
    }
    return c;
}

Clustering truth_clustering(const EmbeddingDataset& ds) {
    Clustering c;
    c.ids = ds.ids;
    c.labels = ds.identity;
    return c;
}

}  // namespace esteval
