#include <doctest.h>

#include "core/dataset.hpp"
#include "core/learners.hpp"
#include "core/rank_reversal.hpp"
#include "core/rng.hpp"

#include <cmath>
#include <cstring>
#include <vector>

using namespace esteval;

namespace {

TabularDataset random_tabular(Rng& rng, size_t n, size_t d) {
    TabularDataset ds;
    for (size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j));
    ds.target_name = "y";
    for (size_t i = 0; i < n; ++i) {
        ds.ids.push_back(std::to_string(i));
        double signal = 0;
        for (size_t j = 0; j < d; ++j) {
            double x = rng.next_gaussian();
            ds.X.push_back(x);
            signal += x;
        }
        ds.y.push_back(signal + 0.5 * rng.next_gaussian());
    }
    return ds;
}

bool records_equal(const std::vector<ReplicationRecord>& a,
                   const std::vector<ReplicationRecord>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].index != b[i].index || a[i].reversal != b[i].reversal ||
            a[i].tie != b[i].tie || a[i].failure != b[i].failure)
            return false;
        if (std::memcmp(&a[i].phi_a, &b[i].phi_a, 8) || std::memcmp(&a[i].phi_b, &b[i].phi_b, 8) ||
            std::memcmp(&a[i].est_a, &b[i].est_a, 8) || std::memcmp(&a[i].est_b, &b[i].est_b, 8))
            return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("rank-reversal") {

TEST_CASE("perfect estimates never reverse") {
    std::vector<ScoreRecord> recs;
    Rng rng = Rng::from(80, "test-rr-perfect", 0);
    for (int i = 0; i < 50; ++i) {
        double a = rng.next_double(), b = rng.next_double();
        recs.push_back({a, b, a, b});
    }
    RankReversalResult r = rank_reversal_probability(recs, BetterIs::lower);
    REQUIRE(r.probability.has_value());
    CHECK(*r.probability == 0.0);
    CHECK(r.reversals == 0);
    CHECK(r.ties == 0);
    CHECK(r.effective == 50);
}

TEST_CASE("swapped estimates always reverse") {
    std::vector<ScoreRecord> recs;
    Rng rng = Rng::from(81, "test-rr-swap", 0);
    for (int i = 0; i < 50; ++i) {
        double a = rng.next_double(), b = a + 0.1 + rng.next_double();
        recs.push_back({b, a, a, b});  // estimates trade places with truth
    }
    RankReversalResult r = rank_reversal_probability(recs, BetterIs::lower);
    CHECK(*r.probability == 1.0);
    CHECK(r.reversals == 50);
}

TEST_CASE("ties are excluded from both sides of the probability") {
    std::vector<ScoreRecord> recs = {
        {2.0, 1.0, 1.0, 2.0},  // reversal
        {1.5, 1.5, 1.0, 2.0},  // tie in estimates
        {1.0, 2.0, 3.0, 3.0},  // tie in truth
        {1.0, 2.0, 1.0, 2.0},  // agreement
    };
    RankReversalResult r = rank_reversal_probability(recs, BetterIs::lower);
    CHECK(r.replications == 4);
    CHECK(r.ties == 2);
    CHECK(r.effective == 2);
    CHECK(r.reversals == 1);
    CHECK(*r.probability == 0.5);
    CHECK(r.failures + r.ties + r.effective == r.replications);
}

TEST_CASE("probability is undefined with no effective records") {
    std::vector<ScoreRecord> recs = {{1.0, 1.0, 2.0, 3.0}, {4.0, 4.0, 2.0, 3.0}};
    RankReversalResult r = rank_reversal_probability(recs, BetterIs::lower);
    CHECK(!r.probability.has_value());
    CHECK(!r.interval.has_value());
    CHECK(r.ties == 2);
}

TEST_CASE("empty record lists are rejected") {
    CHECK_THROWS_WITH_AS(rank_reversal_probability({}, BetterIs::lower),
                         doctest::Contains("empty-records"), Error);
}

TEST_CASE("reversal probability is invariant under joint monotone rescaling") {
    Rng rng = Rng::from(82, "test-rr-monotone", 0);
    std::vector<ScoreRecord> base;
    for (int i = 0; i < 200; ++i)
        base.push_back({rng.next_double(), rng.next_double(), rng.next_double(),
                        rng.next_double()});
    RankReversalResult r0 = rank_reversal_probability(base, BetterIs::lower);
    for (int t = 0; t < 10; ++t) {
        double scale = 0.1 + 5.0 * rng.next_double();
        double offset = -2.0 + 4.0 * rng.next_double();
        std::vector<ScoreRecord> mapped = base;
        for (auto& rec : mapped) {
            rec.est_a = scale * rec.est_a + offset;
            rec.est_b = scale * rec.est_b + offset;
        }
        RankReversalResult r1 = rank_reversal_probability(mapped, BetterIs::lower);
        CHECK(*r1.probability == *r0.probability);
        CHECK(r1.reversals == r0.reversals);
    }
}

TEST_CASE("score and loss conventions agree on reversal frequency") {
    Rng rng = Rng::from(83, "test-rr-convention", 0);
    std::vector<ScoreRecord> recs;
    for (int i = 0; i < 100; ++i)
        recs.push_back({rng.next_double(), rng.next_double(), rng.next_double(),
                        rng.next_double()});
    RankReversalResult lower = rank_reversal_probability(recs, BetterIs::lower);
    RankReversalResult higher = rank_reversal_probability(recs, BetterIs::higher);
    CHECK(*lower.probability == *higher.probability);
}

TEST_CASE("the wilson interval brackets the reported probability") {
    Rng rng = Rng::from(84, "test-rr-interval", 0);
    std::vector<ScoreRecord> recs;
    for (int i = 0; i < 64; ++i)
        recs.push_back({rng.next_double(), rng.next_double(), rng.next_double(),
                        rng.next_double()});
    RankReversalResult r = rank_reversal_probability(recs, BetterIs::lower);
    REQUIRE(r.interval.has_value());
    CHECK(r.interval->lo <= *r.probability);
    CHECK(r.interval->hi >= *r.probability);
    CHECK(r.interval->method == "wilson");
}

TEST_CASE("resampling experiment runs, aggregates, and is thread-invariant") {
    Rng rng = Rng::from(85, "test-rr-resample", 0);
    TabularDataset pop = random_tabular(rng, 80, 2);
    LearnerSpec ols;
    ols.kind = LearnerSpec::Kind::ols;
    ols.label = "linear";
    LearnerSpec tree;
    tree.kind = LearnerSpec::Kind::tree;
    tree.max_depth = 2;
    tree.label = "tree";
    ResamplingPlan plan;
    plan.train_n = 30;
    plan.replications = 24;
    plan.scheme = CvScheme::loo();
    plan.target = Target::conditional;
    plan.master_seed = 99;
    RankReversalResult one = run_resampling_experiment(pop, ols, tree, plan, 1);
    RankReversalResult four = run_resampling_experiment(pop, ols, tree, plan, 4);
    CHECK(one.replications == 24);
    CHECK(one.records.size() == 24);
    CHECK(one.failures + one.ties + one.effective == one.replications);
    for (const auto& rec : one.records) {
        if (rec.failure) continue;
        CHECK(std::isfinite(rec.phi_a));
        CHECK(std::isfinite(rec.est_b));
        CHECK(rec.phi_a > 0.0);
    }
    CHECK(records_equal(one.records, four.records));
    RankReversalResult again = run_resampling_experiment(pop, ols, tree, plan, 1);
    CHECK(records_equal(one.records, again.records));
}

TEST_CASE("unconditional target compares estimates with the mean true scores") {
    Rng rng = Rng::from(86, "test-rr-uncond", 0);
    TabularDataset pop = random_tabular(rng, 60, 2);
    LearnerSpec ols;
    ols.kind = LearnerSpec::Kind::ols;
    LearnerSpec tree;
    tree.kind = LearnerSpec::Kind::tree;
    tree.max_depth = 1;
    ResamplingPlan plan;
    plan.train_n = 25;
    plan.replications = 16;
    plan.scheme = CvScheme::loo();
    plan.target = Target::unconditional;
    plan.master_seed = 7;
    RankReversalResult r = run_resampling_experiment(pop, ols, tree, plan, 2);
    REQUIRE(r.records.size() == 16);
    // reversal flags must follow from the mean truth, not per-replication truth
    double ma = r.mean_phi_a, mb = r.mean_phi_b;
    for (const auto& rec : r.records) {
        if (rec.failure || rec.tie) continue;
        bool est_prefers_a = rec.est_a < rec.est_b;
        bool truth_prefers_a = ma < mb;
        CHECK(rec.reversal == (est_prefers_a != truth_prefers_a));
    }
}

TEST_CASE("identical specs tie on every replication") {
    Rng rng = Rng::from(87, "test-rr-self", 0);
    TabularDataset pop = random_tabular(rng, 50, 2);
    LearnerSpec tree;
    tree.kind = LearnerSpec::Kind::tree;
    tree.max_depth = 2;
    ResamplingPlan plan;
    plan.train_n = 20;
    plan.replications = 10;
    plan.scheme = CvScheme::loo();
    plan.target = Target::conditional;
    plan.master_seed = 3;
    RankReversalResult r = run_resampling_experiment(pop, tree, tree, plan, 1);
    CHECK(r.ties == 10);
    CHECK(r.effective == 0);
    CHECK(!r.probability.has_value());
}

TEST_CASE("labeling experiment with the full census cannot reverse") {
    EmbeddingDataset ds = generate_synthetic_identities(8, 5, 4, 0.6, 2.5, 41);
    Clustering truth = truth_clustering(ds);
    Clustering under = assign_clusters(fit_kmeans(ds.vectors, 4, 6, 11), ds);
    Clustering over = assign_clusters(fit_kmeans(ds.vectors, 4, 10, 21), ds);
    for (FEstimator est : {FEstimator::plugin, FEstimator::cluster_decomposed}) {
        LabelingPlan plan;
        plan.m = 8;  // every true cluster
        plan.simulations = 20;
        plan.estimator = est;
        plan.master_seed = 5;
        RankReversalResult r = run_labeling_experiment(under, over, truth, plan, 1);
        REQUIRE(r.probability.has_value());
        CHECK(*r.probability == 0.0);
        CHECK(r.failures == 0);
        for (const auto& rec : r.records) {
            CHECK(rec.est_a == rec.phi_a);
            CHECK(rec.est_b == rec.phi_b);
        }
    }
}

TEST_CASE("labeling experiment is deterministic and thread-invariant") {
    EmbeddingDataset ds = generate_synthetic_identities(10, 6, 4, 1.0, 1.6, 42);
    Clustering truth = truth_clustering(ds);
    Clustering a = assign_clusters(fit_kmeans(ds.vectors, 4, 7, 11), ds);
    Clustering b = assign_clusters(fit_kmeans(ds.vectors, 4, 14, 21), ds);
    LabelingPlan plan;
    plan.m = 4;
    plan.simulations = 200;
    plan.estimator = FEstimator::plugin;
    plan.master_seed = 12;
    RankReversalResult one = run_labeling_experiment(a, b, truth, plan, 1);
    RankReversalResult three = run_labeling_experiment(a, b, truth, plan, 3);
    CHECK(records_equal(one.records, three.records));
    CHECK(one.replications == 200);
    CHECK(one.failures + one.ties + one.effective == 200);
    // truth scores are census constants across simulations
    for (const auto& rec : one.records) {
        CHECK(rec.phi_a == one.records[0].phi_a);
        CHECK(rec.phi_b == one.records[0].phi_b);
    }
}

TEST_CASE("labeling experiment validates m") {
    EmbeddingDataset ds = generate_synthetic_identities(5, 4, 3, 0.5, 2.0, 1);
    Clustering truth = truth_clustering(ds);
    Clustering pred = assign_clusters(fit_kmeans(ds.vectors, 3, 5, 2), ds);
    LabelingPlan plan;
    plan.m = 6;  // more than the 5 true clusters
    plan.simulations = 5;
    plan.estimator = FEstimator::plugin;
    plan.master_seed = 1;
    CHECK_THROWS_AS(run_labeling_experiment(pred, pred, truth, plan, 1), Error);
}

TEST_CASE("strata reversal detects the crossed preference") {
    std::map<std::string, double> a = {{"easy", 0.88}, {"hard", 0.36}};
    std::map<std::string, double> b = {{"easy", 0.80}, {"hard", 0.45}};
    StrataReversalReport rep = detect_strata_reversal(a, b);
    CHECK(rep.reversal);
    CHECK(rep.preferred.at("easy") == "A");
    CHECK(rep.preferred.at("hard") == "B");
}

TEST_CASE("strata reversal is false for identical and dominated tables") {
    std::map<std::string, double> a = {{"easy", 0.8}, {"hard", 0.5}};
    StrataReversalReport same = detect_strata_reversal(a, a);
    CHECK(!same.reversal);
    CHECK(same.preferred.at("easy") == "tie");
    std::map<std::string, double> worse = {{"easy", 0.7}, {"hard", 0.4}};
    StrataReversalReport dom = detect_strata_reversal(a, worse);
    CHECK(!dom.reversal);
    CHECK(dom.preferred.at("easy") == "A");
    CHECK(dom.preferred.at("hard") == "A");
}

TEST_CASE("strata reversal validates its inputs") {
    CHECK_THROWS_WITH_AS(detect_strata_reversal({}, {}), doctest::Contains("empty-strata"), Error);
    std::map<std::string, double> a = {{"easy", 0.8}};
    std::map<std::string, double> b = {{"hard", 0.5}};
    CHECK_THROWS_AS(detect_strata_reversal(a, b), Error);
}

}  // TEST_SUITE
