#include "core/reporting.hpp"

#include "core/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace esteval {

namespace {

using nlohmann::ordered_json;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string utc_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ExperimentKind kind_from_string(const std::string& s) {
    if (s == "cv-rank-reversal") return ExperimentKind::cv_rank_reversal;
    if (s == "clustering-rank-reversal") return ExperimentKind::clustering_rank_reversal;
    if (s == "benchmark-strata") return ExperimentKind::benchmark_strata;
    if (s == "mcdm-aggregate") return ExperimentKind::mcdm_aggregate;
    throw Error(Err::config_invalid, "unknown experiment kind '" + s + "'");
}

LearnerSpec learner_from_json(const nlohmann::json& j) {
    LearnerSpec s;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "ols") {
        s.kind = LearnerSpec::Kind::ols;
    } else if (kind == "tree") {
        s.kind = LearnerSpec::Kind::tree;
    } else {
        throw Error(Err::config_invalid, "unknown learner kind '" + kind + "'");
    }
    s.max_depth = j.value("max_depth", size_t{5});
    s.min_leaf = j.value("min_leaf", size_t{1});
    s.label = j.value("label", kind);
    return s;
}

CvConfig cv_from_json(const nlohmann::json& j) {
    CvConfig c;
    c.dataset_path = j.value("dataset", std::string());
    c.plan.train_n = j.value("train_n", size_t{2000});
    c.plan.replications = j.value("replications", size_t{200});
    std::string scheme = j.value("scheme", std::string("loo"));
    if (scheme == "loo") {
        c.plan.scheme = CvScheme::loo();
    } else if (scheme == "kfold") {
        c.plan.scheme = CvScheme::kfold(j.value("k", size_t{10}), 0);
    } else {
        throw Error(Err::config_invalid, "unknown cv scheme '" + scheme + "'");
    }
    std::string target = j.value("target", std::string("conditional"));
    if (target == "conditional") {
        c.plan.target = Target::conditional;
    } else if (target == "unconditional") {
        c.plan.target = Target::unconditional;
    } else {
        throw Error(Err::config_invalid, "unknown target '" + target + "'");
    }
    if (j.contains("learner_a")) c.learner_a = learner_from_json(j.at("learner_a"));
    if (j.contains("learner_b")) c.learner_b = learner_from_json(j.at("learner_b"));
    if (c.learner_a.label.empty()) c.learner_a.label = "A";
    if (c.learner_b.label.empty()) c.learner_b.label = "B";
    return c;
}

ClusteringConfig clustering_from_json(const nlohmann::json& j) {
    ClusteringConfig c;
    if (j.contains("embeddings")) c.embeddings_path = j.at("embeddings").get<std::string>();
    c.identities = j.value("identities", size_t{40});
    c.per_identity = j.value("per_identity", size_t{10});
    c.dim = j.value("dim", size_t{16});
    c.within_spread = j.value("within_spread", 1.0);
    c.between_spread = j.value("between_spread", 2.0);
    c.k_a = j.value("k_a", size_t{30});
    c.k_b = j.value("k_b", size_t{60});
    c.plan.m = j.value("m", size_t{10});
    c.plan.simulations = j.value("simulations", size_t{2000});
    std::string est = j.value("estimator", std::string("plugin"));
    if (est == "plugin") {
        c.plan.estimator = FEstimator::plugin;
    } else if (est == "cluster-decomposed") {
        c.plan.estimator = FEstimator::cluster_decomposed;
    } else {
        throw Error(Err::config_invalid, "unknown estimator '" + est + "'");
    }
    return c;
}

StrataConfig strata_from_json(const nlohmann::json& j) {
    StrataConfig c;
    if (j.contains("responses")) c.responses_path = j.at("responses").get<std::string>();
    c.items_per_stratum = j.value("items_per_stratum", size_t{10000});
    if (j.contains("models")) {
        for (const auto& mj : j.at("models")) {
            StrataModelConfig m;
            m.id = mj.at("id").get<std::string>();
            m.rates = mj.at("rates").get<std::map<std::string, double>>();
            c.models.push_back(std::move(m));
        }
    }
    c.model_a = j.value("model_a", std::string());
    c.model_b = j.value("model_b", std::string());
    std::string source = j.value("strata_source", std::string("metadata"));
    if (source == "metadata") {
        c.strata_from_metadata = true;
    } else if (source == "estimated") {
        c.strata_from_metadata = false;
    } else {
        throw Error(Err::config_invalid, "unknown strata_source '" + source + "'");
    }
    if (j.contains("reference_models"))
        c.reference_models = j.at("reference_models").get<std::vector<std::string>>();
    return c;
}

McdmConfig mcdm_from_json(const nlohmann::json& j) {
    McdmConfig c;
    if (j.contains("criteria") && j.contains("criteria_csv"))
        throw Error(Err::config_invalid, "give criteria inline or as csv, not both");
    if (j.contains("criteria")) {
        c.criteria = criteria_matrix_from_json(j.at("criteria"));
    } else if (j.contains("criteria_csv")) {
        c.criteria = load_criteria_csv(j.at("criteria_csv").get<std::string>());
    } else {
        throw Error(Err::config_invalid, "mcdm requires criteria or criteria_csv");
    }
    if (j.contains("weights")) c.weights = j.at("weights").get<std::vector<double>>();
    if (j.contains("comparison")) c.comparison = comparison_matrix_from_json(j.at("comparison"));
    if (j.contains("comparison_csv")) {
        if (c.comparison) throw Error(Err::config_invalid, "give one comparison matrix only");
        c.comparison = load_comparison_csv(j.at("comparison_csv").get<std::string>());
    }
    return c;
}

std::string join_issues(const std::vector<std::string>& issues) {
    std::string out = "config rejected:";
    for (const auto& i : issues) out += " " + i + ";";
    return out;
}

ordered_json interval_to_json(const Interval& i) {
    ordered_json j;
    j["lo"] = i.lo;
    j["hi"] = i.hi;
    j["level"] = i.level;
    j["method"] = i.method;
    return j;
}

ordered_json aggregate_to_json(const RankReversalResult& r) {
    ordered_json j;
    j["probability"] = r.probability ? ordered_json(*r.probability) : ordered_json(nullptr);
    j["replications"] = r.replications;
    j["reversals"] = r.reversals;
    j["ties"] = r.ties;
    j["failures"] = r.failures;
    j["effective"] = r.effective;
    j["mean_true_a"] = r.mean_phi_a;
    j["mean_true_b"] = r.mean_phi_b;
    j["mean_est_a"] = r.mean_est_a;
    j["mean_est_b"] = r.mean_est_b;
    j["interval"] = r.interval ? interval_to_json(*r.interval) : ordered_json(nullptr);
    return j;
}

double probability_or_nan(const RankReversalResult& r) {
    return r.probability ? *r.probability : std::numeric_limits<double>::quiet_NaN();
}

// Schema is read from the file's own header; the strict loader then enforces it.
TabularDataset load_dataset_auto(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Err::dataset_missing, "cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw Error(Err::parse_error, path + " has no header row");
    in.close();
    std::vector<std::string> schema;
    std::string cell;
    for (char ch : header) {
        if (ch == '\r') continue;
        if (ch == ',') {
            schema.push_back(cell);
            cell.clear();
        } else {
            cell.push_back(ch);
        }
    }
    schema.push_back(cell);
    if (schema.size() < 2)
        throw Error(Err::schema_mismatch, path + " needs at least one feature and a response");
    return load_tabular_csv(path, schema);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Err::io_error, "cannot write " + path);
    out << content;
    if (!out) throw Error(Err::io_error, "failed writing " + path);
}

std::string replications_csv(const std::vector<ReplicationRecord>& records) {
    std::string out = "replication,phi_A,phi_B,est_A,est_B,reversal,failure\n";
    for (const auto& r : records) {
        out += std::to_string(r.index);
        out += ',';
        out += fmt_double(r.phi_a);
        out += ',';
        out += fmt_double(r.phi_b);
        out += ',';
        out += fmt_double(r.est_a);
        out += ',';
        out += fmt_double(r.est_b);
        out += ',';
        out += r.reversal ? '1' : '0';
        out += ',';
        out += r.failure ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::string json_number(const nlohmann::ordered_json& v) {
    if (v.is_null()) return "";
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return fmt_double(v.get<double>());
}

}  // namespace

const char* experiment_kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::cv_rank_reversal: return "cv-rank-reversal";
        case ExperimentKind::clustering_rank_reversal: return "clustering-rank-reversal";
        case ExperimentKind::benchmark_strata: return "benchmark-strata";
        case ExperimentKind::mcdm_aggregate: return "mcdm-aggregate";
    }
    return "unknown";
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    try {
        ExperimentConfig c;
        c.kind = kind_from_string(j.at("kind").get<std::string>());
        if (j.contains("estimand")) c.estimand = estimand_from_json(j.at("estimand"));
        c.seed = j.value("seed", uint64_t{0});
        c.threads = j.value("threads", size_t{1});
        c.output_dir = j.value("output_dir", std::string("out"));
        if (j.contains("cv")) c.cv = cv_from_json(j.at("cv"));
        if (j.contains("clustering")) c.clustering = clustering_from_json(j.at("clustering"));
        if (j.contains("strata")) c.strata = strata_from_json(j.at("strata"));
        if (j.contains("mcdm")) c.mcdm = mcdm_from_json(j.at("mcdm"));
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Err::config_invalid, e.what());
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Err::config_invalid, "cannot open config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Err::config_invalid, std::string(path) + ": " + e.what());
    }
    return config_from_json(j);
}

std::vector<std::string> validate_config(const ExperimentConfig& c) {
    namespace fs = std::filesystem;
    std::vector<std::string> issues;
    for (const auto& i : validate_estimand(c.estimand))
        issues.push_back(std::string("component ") + i.component + ": " + i.message);
    if (c.threads == 0) issues.push_back("threads must be positive");

    auto check_file = [&](const std::string& section, const std::string& path) {
        if (path.empty())
            issues.push_back(section + ": a dataset path is required");
        else if (!fs::exists(path))
            issues.push_back(section + ": dataset '" + path + "' not found");
    };

    switch (c.kind) {
        case ExperimentKind::cv_rank_reversal: {
            if (!c.cv) {
                issues.push_back("cv section is required for kind cv-rank-reversal");
                break;
            }
            check_file("cv", c.cv->dataset_path);
            if (c.cv->plan.train_n < 2) issues.push_back("cv: train_n must be at least 2");
            if (c.cv->plan.replications == 0) issues.push_back("cv: replications must be positive");
            if (c.cv->plan.scheme.kind == CvScheme::Kind::kfold && c.cv->plan.scheme.k < 2)
                issues.push_back("cv: k must be at least 2");
            if (c.cv->learner_a.label == c.cv->learner_b.label)
                issues.push_back("cv: learner labels must differ");
            break;
        }
        case ExperimentKind::clustering_rank_reversal: {
            if (!c.clustering) {
                issues.push_back("clustering section is required for kind clustering-rank-reversal");
                break;
            }
            const auto& cl = *c.clustering;
            if (cl.embeddings_path) {
                if (!fs::exists(*cl.embeddings_path))
                    issues.push_back("clustering: dataset '" + *cl.embeddings_path + "' not found");
            } else {
                if (cl.identities == 0 || cl.per_identity == 0 || cl.dim == 0)
                    issues.push_back("clustering: generator sizes must be positive");
                if (cl.plan.m > cl.identities)
                    issues.push_back("clustering: m exceeds the identity count");
            }
            if (cl.k_a == 0 || cl.k_b == 0) issues.push_back("clustering: cluster counts must be positive");
            if (cl.plan.m == 0) issues.push_back("clustering: m must be positive");
            if (cl.plan.simulations == 0) issues.push_back("clustering: simulations must be positive");
            break;
        }
        case ExperimentKind::benchmark_strata: {
            if (!c.strata) {
                issues.push_back("strata section is required for kind benchmark-strata");
                break;
            }
            const auto& st = *c.strata;
            if (st.responses_path) {
                if (!fs::exists(*st.responses_path))
                    issues.push_back("strata: dataset '" + *st.responses_path + "' not found");
            } else {
                if (st.models.empty()) issues.push_back("strata: generator needs model rates");
                if (st.items_per_stratum == 0)
                    issues.push_back("strata: items_per_stratum must be positive");
                for (const auto& m : st.models)
                    if (m.rates.empty())
                        issues.push_back("strata: model '" + m.id + "' has no rates");
            }
            if (st.model_a.empty() || st.model_b.empty())
                issues.push_back("strata: model_a and model_b are required");
            if (!st.models.empty()) {
                auto has = [&](const std::string& id) {
                    for (const auto& m : st.models)
                        if (m.id == id) return true;
                    return false;
                };
                if (!st.model_a.empty() && !has(st.model_a))
                    issues.push_back("strata: model_a '" + st.model_a + "' not in the generator");
                if (!st.model_b.empty() && !has(st.model_b))
                    issues.push_back("strata: model_b '" + st.model_b + "' not in the generator");
            }
            break;
        }
        case ExperimentKind::mcdm_aggregate: {
            if (!c.mcdm) {
                issues.push_back("mcdm section is required for kind mcdm-aggregate");
                break;
            }
            const auto& mc = *c.mcdm;
            if (mc.criteria.alternatives.empty()) issues.push_back("mcdm: no alternatives");
            if (mc.weights && mc.comparison)
                issues.push_back("mcdm: give either weights or a comparison matrix, not both");
            if (!mc.weights && !mc.comparison)
                issues.push_back("mcdm: a weight vector or comparison matrix is required");
            break;
        }
    }
    return issues;
}

nlohmann::ordered_json evaluation_report_to_json(const EvaluationReport& rep) {
    if (rep.uncertainty) {
        const Interval& u = *rep.uncertainty;
        if (u.lo > u.hi) throw Error(Err::invalid_argument, "interval lo exceeds hi");
        if (u.method == "percentile-bootstrap" && rep.main_estimate &&
            (*rep.main_estimate < u.lo || *rep.main_estimate > u.hi))
            throw Error(Err::invalid_argument,
                        "percentile-bootstrap interval must bracket the main estimate");
    }
    ordered_json j;
    j["estimand"] = estimand_to_json(rep.estimand);
    j["main_estimate"] =
        rep.main_estimate ? ordered_json(*rep.main_estimate) : ordered_json(nullptr);
    j["uncertainty"] =
        rep.uncertainty ? interval_to_json(*rep.uncertainty) : ordered_json(nullptr);
    j["sensitivity"] = ordered_json::array();
    for (const auto& s : rep.sensitivity)
        j["sensitivity"].push_back({{"label", s.label}, {"estimate", s.estimate}});
    ordered_json p;
    p["seed"] = rep.provenance.seed;
    p["replications"] = rep.provenance.replications;
    p["timestamps"] = {{"started", rep.provenance.started}, {"finished", rep.provenance.finished}};
    j["provenance"] = p;
    return j;
}

std::vector<FeatureHistogram> emit_plot_data(const TabularDataset& sample,
                                             const TabularDataset& population) {
    if (sample.feature_names != population.feature_names)
        throw Error(Err::dimension_mismatch, "sample and population schemas differ");
    if (population.n() == 0) throw Error(Err::empty_dataset, "population is empty");
    std::vector<FeatureHistogram> out;
    for (size_t f = 0; f < population.d(); ++f) {
        FeatureHistogram h;
        h.feature = population.feature_names[f];
        double lo = population.x(0, f), hi = lo;
        for (size_t i = 1; i < population.n(); ++i) {
            lo = std::min(lo, population.x(i, f));
            hi = std::max(hi, population.x(i, f));
        }
        double width = (hi - lo) / double(kHistogramBins);
        h.edges.resize(kHistogramBins + 1);
        for (size_t b = 0; b < kHistogramBins; ++b) h.edges[b] = lo + width * double(b);
        h.edges[kHistogramBins] = hi;
        auto bin_of = [&](double v) -> size_t {
            if (width <= 0.0) return 0;
            double idx = (v - lo) / width;
            if (idx <= 0.0) return 0;
            size_t b = size_t(idx);
            return b >= kHistogramBins ? kHistogramBins - 1 : b;
        };
        h.sample_counts.assign(kHistogramBins, 0);
        h.population_counts.assign(kHistogramBins, 0);
        for (size_t i = 0; i < sample.n(); ++i) ++h.sample_counts[bin_of(sample.x(i, f))];
        for (size_t i = 0; i < population.n(); ++i) ++h.population_counts[bin_of(population.x(i, f))];
        out.push_back(std::move(h));
    }
    return out;
}

void write_histograms_csv(const std::vector<FeatureHistogram>& hists, const std::string& path) {
    std::string out = "feature,bin,lo,hi,sample,population\n";
    for (const auto& h : hists) {
        for (size_t b = 0; b < kHistogramBins; ++b) {
            out += h.feature;
            out += ',';
            out += std::to_string(b);
            out += ',';
            out += fmt_double(h.edges[b]);
            out += ',';
            out += fmt_double(h.edges[b + 1]);
            out += ',';
            out += std::to_string(h.sample_counts[b]);
            out += ',';
            out += std::to_string(h.population_counts[b]);
            out += '\n';
        }
    }
    write_file(path, out);
}

std::string render_table(const nlohmann::ordered_json& report) {
    std::string kind = report.at("kind").get<std::string>();
    const auto& res = report.at("results");
    std::ostringstream out;
    if (kind == "cv-rank-reversal") {
        std::string a = res.at("learner_a").get<std::string>();
        std::string b = res.at("learner_b").get<std::string>();
        const auto& main = res.at(res.at("target").get<std::string>());
        out << "metric," << a << ',' << b << '\n';
        out << "avg true MSE," << json_number(main.at("mean_true_a")) << ','
            << json_number(main.at("mean_true_b")) << '\n';
        out << "avg CV estimate," << json_number(main.at("mean_est_a")) << ','
            << json_number(main.at("mean_est_b")) << '\n';
        out << "reversal probability," << json_number(report.at("main_estimate")) << ",\n";
    } else if (kind == "clustering-rank-reversal") {
        const auto& main = res.at(res.at("estimator").get<std::string>());
        out << "metric,k=" << res.at("k_a").get<size_t>() << ",k=" << res.at("k_b").get<size_t>()
            << '\n';
        out << "avg true F-score," << json_number(res.at("true_f_a")) << ','
            << json_number(res.at("true_f_b")) << '\n';
        out << "avg F-score estimate," << json_number(main.at("mean_est_a")) << ','
            << json_number(main.at("mean_est_b")) << '\n';
        out << "reversal probability," << json_number(report.at("main_estimate")) << ",\n";
    } else if (kind == "benchmark-strata") {
        out << "metric," << res.at("model_a").get<std::string>() << ','
            << res.at("model_b").get<std::string>() << '\n';
        const auto& ra = res.at("rates_a");
        const auto& rb = res.at("rates_b");
        for (auto it = ra.begin(); it != ra.end(); ++it)
            out << "success rate (" << it.key() << ")," << json_number(it.value()) << ','
                << json_number(rb.at(it.key())) << '\n';
        out << "equal-weight mean," << json_number(res.at("aggregate_a")) << ','
            << json_number(res.at("aggregate_b")) << '\n';
        out << "strata reversal," << (res.at("reversal").get<bool>() ? "true" : "false") << ",\n";
    } else if (kind == "mcdm-aggregate") {
        out << "alternative,score,on_frontier\n";
        std::set<std::string> frontier;
        for (const auto& f : res.at("frontier")) frontier.insert(f.get<std::string>());
        const auto& scores = res.at("scores");
        for (auto it = scores.begin(); it != scores.end(); ++it)
            out << it.key() << ',' << json_number(it.value()) << ','
                << (frontier.count(it.key()) ? "yes" : "no") << '\n';
    } else {
        throw Error(Err::invalid_argument, "unknown report kind '" + kind + "'");
    }
    return out.str();
}

namespace {

struct KindOutput {
    ordered_json results;
    std::optional<std::vector<ReplicationRecord>> records;
    std::optional<std::vector<FeatureHistogram>> hists;
};

KindOutput run_cv(const ExperimentConfig& c, EvaluationReport& rep) {
    const CvConfig& cv = *c.cv;
    TabularDataset population = load_dataset_auto(cv.dataset_path);

    ResamplingPlan plan = cv.plan;
    plan.master_seed = c.seed;
    plan.target = Target::conditional;
    RankReversalResult cond =
        run_resampling_experiment(population, cv.learner_a, cv.learner_b, plan, c.threads);
    RankReversalResult uncond =
        cond.failures < cond.replications
            ? aggregate_records(cond.records, BetterIs::lower,
                                std::make_pair(cond.mean_phi_a, cond.mean_phi_b))
            : cond;
    const RankReversalResult& main = cv.plan.target == Target::conditional ? cond : uncond;

    rep.main_estimate = main.probability;
    rep.uncertainty = main.interval;
    rep.sensitivity = {{"conditional", probability_or_nan(cond)},
                       {"unconditional", probability_or_nan(uncond)}};
    rep.provenance.replications = cv.plan.replications;

    KindOutput out;
    out.results["dataset"] = cv.dataset_path;
    out.results["train_n"] = cv.plan.train_n;
    out.results["replications"] = cv.plan.replications;
    out.results["scheme"] = cv.plan.scheme.kind == CvScheme::Kind::loo
                                ? std::string("loo")
                                : "kfold:" + std::to_string(cv.plan.scheme.k);
    out.results["target"] =
        cv.plan.target == Target::conditional ? "conditional" : "unconditional";
    out.results["learner_a"] = cv.learner_a.label;
    out.results["learner_b"] = cv.learner_b.label;
    out.results["conditional"] = aggregate_to_json(cond);
    out.results["unconditional"] = aggregate_to_json(uncond);
    out.records = main.records;

    auto [sample_seed, cv_seed] = replication_seeds(c.seed, 0);
    (void)cv_seed;
    TabularDataset first = sample_with_replacement(population, cv.plan.train_n, sample_seed);
    out.hists = emit_plot_data(first, population);
    return out;
}

KindOutput run_clustering(const ExperimentConfig& c, EvaluationReport& rep) {
    const ClusteringConfig& cl = *c.clustering;
    EmbeddingDataset emb =
        cl.embeddings_path
            ? load_embeddings_csv(*cl.embeddings_path)
            : generate_synthetic_identities(cl.identities, cl.per_identity, cl.dim,
                                            cl.within_spread, cl.between_spread, c.seed);
    uint64_t seed_a = Rng::from(c.seed, "kmeans-model", 0).next_u64();
    uint64_t seed_b = Rng::from(c.seed, "kmeans-model", 1).next_u64();
    KMeansModel model_a = fit_kmeans(emb.vectors, emb.dim(), cl.k_a, seed_a);
    KMeansModel model_b = fit_kmeans(emb.vectors, emb.dim(), cl.k_b, seed_b);
    Clustering pred_a = assign_clusters(model_a, emb);
    Clustering pred_b = assign_clusters(model_b, emb);
    Clustering truth = truth_clustering(emb);

    LabelingPlan plan = cl.plan;
    plan.master_seed = c.seed;
    plan.estimator = FEstimator::plugin;
    RankReversalResult plug = run_labeling_experiment(pred_a, pred_b, truth, plan, c.threads);
    plan.estimator = FEstimator::cluster_decomposed;
    RankReversalResult dec = run_labeling_experiment(pred_a, pred_b, truth, plan, c.threads);
    bool main_is_plugin = cl.plan.estimator == FEstimator::plugin;
    const RankReversalResult& main = main_is_plugin ? plug : dec;

    rep.main_estimate = main.probability;
    rep.uncertainty = main.interval;
    rep.sensitivity = {{"plugin", probability_or_nan(plug)},
                       {"cluster-decomposed", probability_or_nan(dec)}};
    rep.provenance.replications = cl.plan.simulations;

    KindOutput out;
    if (cl.embeddings_path) {
        out.results["source"] = *cl.embeddings_path;
    } else {
        out.results["source"] = "generator";
        out.results["identities"] = cl.identities;
        out.results["per_identity"] = cl.per_identity;
        out.results["dim"] = cl.dim;
        out.results["within_spread"] = cl.within_spread;
        out.results["between_spread"] = cl.between_spread;
    }
    out.results["k_a"] = cl.k_a;
    out.results["k_b"] = cl.k_b;
    out.results["m"] = cl.plan.m;
    out.results["simulations"] = cl.plan.simulations;
    out.results["estimator"] = main_is_plugin ? "plugin" : "cluster-decomposed";
    out.results["true_f_a"] = main.mean_phi_a;
    out.results["true_f_b"] = main.mean_phi_b;
    out.results["plugin"] = aggregate_to_json(plug);
    out.results["cluster-decomposed"] = aggregate_to_json(dec);
    out.records = main.records;
    return out;
}

KindOutput run_strata(const ExperimentConfig& c, EvaluationReport& rep) {
    const StrataConfig& st = *c.strata;
    ItemResponseMatrix irm;
    if (st.responses_path) {
        irm = load_item_responses_csv(*st.responses_path);
    } else {
        ItemResponseSpec spec;
        for (const auto& m : st.models) spec.models.push_back({m.id, m.rates});
        irm = generate_item_responses(spec, st.items_per_stratum, c.seed);
    }
    DifficultyStrata strata =
        st.strata_from_metadata
            ? strata_from_metadata(irm)
            : estimate_item_difficulty(
                  irm, st.reference_models.empty() ? irm.models : st.reference_models);
    auto rates_a = stratified_success_rates(irm, strata, st.model_a);
    auto rates_b = stratified_success_rates(irm, strata, st.model_b);
    StrataReversalReport reversal = detect_strata_reversal(rates_a, rates_b);

    auto equal_weight = [](const std::map<std::string, double>& rates) {
        double acc = 0.0;
        for (const auto& [name, r] : rates) acc += r;
        return acc / double(rates.size());
    };
    double agg_a = equal_weight(rates_a);
    double agg_b = equal_weight(rates_b);

    rep.main_estimate = agg_a - agg_b;
    rep.provenance.replications = 0;
    for (const auto& [name, ra] : rates_a)
        rep.sensitivity.push_back({"delta (" + name + ")", ra - rates_b.at(name)});
    rep.sensitivity.push_back({"delta (aggregate)", agg_a - agg_b});

    KindOutput out;
    out.results["source"] = st.responses_path ? *st.responses_path : "generator";
    if (!st.responses_path) out.results["items_per_stratum"] = st.items_per_stratum;
    out.results["strata_source"] = st.strata_from_metadata ? "metadata" : "estimated";
    out.results["model_a"] = st.model_a;
    out.results["model_b"] = st.model_b;
    out.results["rates_a"] = rates_a;
    out.results["rates_b"] = rates_b;
    out.results["aggregate_a"] = agg_a;
    out.results["aggregate_b"] = agg_b;
    out.results["preferred"] = reversal.preferred;
    out.results["reversal"] = reversal.reversal;
    return out;
}

KindOutput run_mcdm(const ExperimentConfig& c, EvaluationReport& rep) {
    const McdmConfig& mc = *c.mcdm;
    std::vector<double> weights;
    ordered_json ahp_json = nullptr;
    std::string source = "explicit";
    if (mc.comparison) {
        AhpResult ahp = ahp_weights(*mc.comparison);
        weights = ahp.weights;
        source = "ahp";
        ahp_json = ordered_json{{"lambda_max", ahp.lambda_max},
                                {"consistency_index", ahp.consistency_index},
                                {"consistency_ratio", ahp.consistency_ratio},
                                {"inconsistent", ahp.inconsistent}};
    } else {
        weights = *mc.weights;
    }
    auto scores = weighted_aggregate(mc.criteria, weights);
    auto frontier = pareto_frontier(mc.criteria);

    std::vector<std::pair<std::string, double>> table;
    for (const auto& alt : mc.criteria.alternatives) table.push_back({alt, scores.at(alt)});
    SensitivityRange range = sensitivity_range(table);

    rep.main_estimate = range.max;
    rep.provenance.replications = 0;
    for (const auto& [alt, v] : table) rep.sensitivity.push_back({alt, v});

    KindOutput out;
    out.results["alternatives"] = mc.criteria.alternatives;
    out.results["criteria"] = ordered_json::array();
    for (const auto& crit : mc.criteria.criteria)
        out.results["criteria"].push_back(
            {{"id", crit.id}, {"direction", crit.maximize ? "max" : "min"}});
    out.results["weight_source"] = source;
    out.results["weights"] = weights;
    out.results["ahp"] = ahp_json;
    ordered_json sj;
    for (const auto& [alt, v] : table) sj[alt] = v;
    out.results["scores"] = sj;
    out.results["frontier"] = frontier;
    out.results["score_range"] =
        ordered_json{{"min", range.min}, {"max", range.max}, {"spread", range.spread}};
    return out;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& c) {
    auto issues = validate_config(c);
    if (!issues.empty()) throw Error(Err::config_invalid, join_issues(issues));
    namespace fs = std::filesystem;
    fs::create_directories(c.output_dir);

    EvaluationReport rep;
    rep.estimand = c.estimand;
    rep.provenance.seed = c.seed;
    rep.provenance.started = utc_now();

    KindOutput kind_out;
    switch (c.kind) {
        case ExperimentKind::cv_rank_reversal: kind_out = run_cv(c, rep); break;
        case ExperimentKind::clustering_rank_reversal: kind_out = run_clustering(c, rep); break;
        case ExperimentKind::benchmark_strata: kind_out = run_strata(c, rep); break;
        case ExperimentKind::mcdm_aggregate: kind_out = run_mcdm(c, rep); break;
    }
    rep.provenance.finished = utc_now();

    ordered_json base = evaluation_report_to_json(rep);
    ordered_json report;
    report["kind"] = experiment_kind_name(c.kind);
    report["estimand"] = base["estimand"];
    report["main_estimate"] = base["main_estimate"];
    report["uncertainty"] = base["uncertainty"];
    report["sensitivity"] = base["sensitivity"];
    report["results"] = kind_out.results;
    report["provenance"] = base["provenance"];

    RunResult out;
    out.report = report;
    std::string report_path = (fs::path(c.output_dir) / "report.json").string();
    write_file(report_path, report.dump(2) + "\n");
    out.files.push_back(report_path);
    if (kind_out.records) {
        std::string path = (fs::path(c.output_dir) / "replications.csv").string();
        write_file(path, replications_csv(*kind_out.records));
        out.files.push_back(path);
    }
    std::string table_path = (fs::path(c.output_dir) / "table.csv").string();
    write_file(table_path, render_table(report));
    out.files.push_back(table_path);
    if (kind_out.hists) {
        std::string path = (fs::path(c.output_dir) / "histograms.csv").string();
        write_histograms_csv(*kind_out.hists, path);
        out.files.push_back(path);
    }
    return out;
}

}  // namespace esteval
