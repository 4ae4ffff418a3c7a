#include "core/rank_reversal.hpp"

#include "core/parallel.hpp"
#include "core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace esteval {

RankReversalResult aggregate_records(std::vector<ReplicationRecord> records, BetterIs better,
                                     std::optional<std::pair<double, double>> truth_override) {
    if (records.empty()) throw Error(Err::empty_records, "no replication records");
    RankReversalResult out;
    out.replications = records.size();
    size_t ok = 0;
    for (auto& rec : records) {
        rec.reversal = false;
        rec.tie = false;
        if (rec.failure) {
            ++out.failures;
            continue;
        }
        ++ok;
        out.mean_phi_a += rec.phi_a;
        out.mean_phi_b += rec.phi_b;
        out.mean_est_a += rec.est_a;
        out.mean_est_b += rec.est_b;
        double ta = truth_override ? truth_override->first : rec.phi_a;
        double tb = truth_override ? truth_override->second : rec.phi_b;
        if (rec.est_a == rec.est_b || ta == tb) {
            rec.tie = true;
            ++out.ties;
            continue;
        }
        bool est_prefers_a = better == BetterIs::lower ? rec.est_a < rec.est_b : rec.est_a > rec.est_b;
        bool truth_prefers_a = better == BetterIs::lower ? ta < tb : ta > tb;
        rec.reversal = est_prefers_a != truth_prefers_a;
        out.reversals += rec.reversal;
        ++out.effective;
    }
    if (ok > 0) {
        out.mean_phi_a /= double(ok);
        out.mean_phi_b /= double(ok);
        out.mean_est_a /= double(ok);
        out.mean_est_b /= double(ok);
    }
    if (out.effective > 0) {
        out.probability = double(out.reversals) / double(out.effective);
        out.interval = binomial_interval(out.reversals, out.effective, 0.95);
    }
    out.records = std::move(records);
    return out;
}

RankReversalResult rank_reversal_probability(const std::vector<ScoreRecord>& records,
                                             BetterIs better) {
    if (records.empty()) throw Error(Err::empty_records, "no replication records");
    std::vector<ReplicationRecord> recs(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        recs[i].index = i;
        recs[i].est_a = records[i].est_a;
        recs[i].est_b = records[i].est_b;
        recs[i].phi_a = records[i].phi_a;
        recs[i].phi_b = records[i].phi_b;
    }
    return aggregate_records(std::move(recs), better);
}

std::pair<uint64_t, uint64_t> replication_seeds(uint64_t master_seed, size_t index) {
    Rng stream = Rng::from(master_seed, "cv-replication", index);
    uint64_t sample_seed = stream.next_u64();
    uint64_t cv_seed = stream.next_u64();
    return {sample_seed, cv_seed};
}

RankReversalResult run_resampling_experiment(const TabularDataset& population,
                                             const LearnerSpec& spec_a, const LearnerSpec& spec_b,
                                             const ResamplingPlan& plan, size_t threads) {
    if (population.n() == 0) throw Error(Err::empty_dataset, "population is empty");
    if (plan.train_n < 2) throw Error(Err::invalid_argument, "train_n must be at least 2");
    if (plan.replications == 0) throw Error(Err::invalid_argument, "replications must be positive");

    std::vector<ReplicationRecord> records(plan.replications);
    parallel_for(plan.replications, threads, [&](size_t i) {
        ReplicationRecord& rec = records[i];
        rec.index = i;
        auto [sample_seed, cv_seed] = replication_seeds(plan.master_seed, i);
        try {
            TabularDataset train = sample_with_replacement(population, plan.train_n, sample_seed);
            CvScheme scheme = plan.scheme;
            scheme.seed = cv_seed;
            auto estimate = [&](const LearnerSpec& spec) {
                if (scheme.kind == CvScheme::Kind::loo && spec.kind == LearnerSpec::Kind::ols)
                    return loo_ols_exact(train);
                return cross_validate(spec, train, scheme);
            };
            rec.est_a = estimate(spec_a);
            rec.est_b = estimate(spec_b);
            FittedModel model_a = fit_learner(spec_a, train.X, train.y, train.d());
            FittedModel model_b = fit_learner(spec_b, train.X, train.y, train.d());
            rec.phi_a = true_generalization_error(model_a, population);
            rec.phi_b = true_generalization_error(model_b, population);
        } catch (const Error& e) {
            rec.failure = true;
            rec.failure_reason = e.what();
        }
    });

    if (plan.target == Target::unconditional) {
        double ma = 0, mb = 0;
        size_t ok = 0;
        for (const auto& rec : records) {
            if (rec.failure) continue;
            ma += rec.phi_a;
            mb += rec.phi_b;
            ++ok;
        }
        if (ok == 0) return aggregate_records(std::move(records), BetterIs::lower);
        return aggregate_records(std::move(records), BetterIs::lower,
                                 std::make_pair(ma / double(ok), mb / double(ok)));
    }
    return aggregate_records(std::move(records), BetterIs::lower);
}

RankReversalResult run_labeling_experiment(const Clustering& pred_a, const Clustering& pred_b,
                                           const Clustering& truth, const LabelingPlan& plan,
                                           size_t threads) {
    if (plan.simulations == 0) throw Error(Err::invalid_argument, "simulations must be positive");
    std::set<int> label_set(truth.labels.begin(), truth.labels.end());
    std::vector<int> all_labels(label_set.begin(), label_set.end());
    size_t M = all_labels.size();
    if (plan.m == 0 || plan.m > M)
        throw Error(Err::k_exceeds_n, "m=" + std::to_string(plan.m) + " outside [1, " +
                                          std::to_string(M) + "] true clusters");

    double phi_a = pairwise_prf(pred_a, truth).f_score;
    double phi_b = pairwise_prf(pred_b, truth).f_score;

    std::vector<ReplicationRecord> records(plan.simulations);
    parallel_for(plan.simulations, threads, [&](size_t i) {
        ReplicationRecord& rec = records[i];
        rec.index = i;
        rec.phi_a = phi_a;
        rec.phi_b = phi_b;
        Rng rng = Rng::from(plan.master_seed, "cluster-sample", i);
        std::vector<int> pool = all_labels;
        for (size_t j = 0; j < plan.m; ++j) {
            size_t pick = j + size_t(rng.next_below(M - j));
            std::swap(pool[j], pool[pick]);
        }
        std::vector<int> sampled(pool.begin(), pool.begin() + plan.m);
        try {
            if (plan.estimator == FEstimator::plugin) {
                rec.est_a = plugin_f_on_cluster_sample(pred_a, truth, sampled).f_score;
                rec.est_b = plugin_f_on_cluster_sample(pred_b, truth, sampled).f_score;
            } else {
                rec.est_a = cluster_decomposed_f(pred_a, truth, sampled).f_score;
                rec.est_b = cluster_decomposed_f(pred_b, truth, sampled).f_score;
            }
        } catch (const Error& e) {
            rec.failure = true;
            rec.failure_reason = e.what();
        }
    });
    return aggregate_records(std::move(records), BetterIs::higher);
}

StrataReversalReport detect_strata_reversal(const std::map<std::string, double>& rates_a,
                                            const std::map<std::string, double>& rates_b) {
    if (rates_a.empty() || rates_b.empty())
        throw Error(Err::empty_strata, "strata rate tables are empty");
    if (rates_a.size() != rates_b.size())
        throw Error(Err::dimension_mismatch, "strata keys differ between models");
    StrataReversalReport rep;
    bool saw_a = false, saw_b = false;
    for (const auto& [stratum, ra] : rates_a) {
        auto it = rates_b.find(stratum);
        if (it == rates_b.end())
            throw Error(Err::dimension_mismatch, "stratum '" + stratum + "' missing for model B");
        double rb = it->second;
        std::string pref = ra > rb ? "A" : ra < rb ? "B" : "tie";
        saw_a |= pref == "A";
        saw_b |= pref == "B";
        rep.preferred[stratum] = pref;
    }
    rep.reversal = saw_a && saw_b;
    return rep;
}

}  // namespace esteval
