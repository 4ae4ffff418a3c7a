#include "core/estimand.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace esteval {

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

std::string after_marker(const std::string& line, const std::string& marker) {
    auto pos = line.rfind(marker);
    if (pos == std::string::npos) return {};
    return line.substr(pos + marker.size());
}

}  // namespace

const std::vector<std::string>& registered_metrics() {
    static const std::vector<std::string> v = {
        "mse", "rmse", "f_score", "precision", "recall", "success_rate",
    };
    return v;
}

const std::vector<std::string>& registered_aggregations() {
    static const std::vector<std::string> v = {
        "mean", "stratified_mean", "reversal_probability",
        "pareto", "weighted_sum", "ahp_weighted_sum",
    };
    return v;
}

const char* population_kind_name(PopulationKind k) {
    switch (k) {
        case PopulationKind::finite_dataset: return "finite-dataset";
        case PopulationKind::resampling_process: return "resampling-process";
        case PopulationKind::cluster_population: return "cluster-population";
        case PopulationKind::item_population: return "item-population";
    }
    return "unknown";
}

static PopulationKind population_kind_from(const std::string& s) {
    if (s == "finite-dataset") return PopulationKind::finite_dataset;
    if (s == "resampling-process") return PopulationKind::resampling_process;
    if (s == "cluster-population") return PopulationKind::cluster_population;
    if (s == "item-population") return PopulationKind::item_population;
    throw Error(Err::parse_error, "unknown population kind '" + s + "'");
}

std::string scheme_to_string(const AcquisitionScheme& s) {
    std::ostringstream os;
    switch (s.kind) {
        case SchemeKind::with_replacement_sample:
            os << "with-replacement-sample(n=" << s.n << ")";
            break;
        case SchemeKind::simple_random_cluster_sample:
            os << "simple-random-cluster-sample(m=" << s.m << ")";
            break;
        case SchemeKind::stratified_sample: {
            os << "stratified-sample(";
            bool first = true;
            for (const auto& [name, count] : s.allocation) {
                if (!first) os << ",";
                os << name << "=" << count;
                first = false;
            }
            os << ")";
            break;
        }
        case SchemeKind::full_census:
            os << "full-census";
            break;
    }
    return os.str();
}

std::vector<EstimandIssue> validate_estimand(const Estimand& e) {
    std::vector<EstimandIssue> issues;
    if (!e.population) {
        issues.push_back({'A', "population (component A) is missing"});
    } else if (e.population->strata) {
        std::set<std::string> seen;
        bool overlap = false, empty = false;
        for (const auto& [name, members] : *e.population->strata) {
            if (members.empty()) empty = true;
            for (const auto& m : members) {
                if (!seen.insert(m).second) overlap = true;
            }
        }
        if (overlap)
            issues.push_back({'A', "strata overlap: member lists must be disjoint"});
        if (empty)
            issues.push_back({'A', "strata contain an empty stratum"});
    }
    if (!e.acquisition) {
        issues.push_back({'B', "acquisition (component B) is missing"});
    } else {
        const auto& s = e.acquisition->scheme;
        if (s.kind == SchemeKind::with_replacement_sample && s.n == 0)
            issues.push_back({'B', "with-replacement sample size must be positive"});
        if (s.kind == SchemeKind::simple_random_cluster_sample && s.m == 0)
            issues.push_back({'B', "cluster sample size must be positive"});
        if (s.kind == SchemeKind::stratified_sample) {
            if (s.allocation.empty())
                issues.push_back({'B', "stratified-sample requires an allocation"});
            for (const auto& [name, count] : s.allocation)
                if (count == 0) {
                    issues.push_back({'B', "allocation for stratum '" + name + "' must be positive"});
                    break;
                }
        }
    }
    if (!e.metric) {
        issues.push_back({'C', "metric (component C) is missing"});
    } else if (!contains(registered_metrics(), e.metric->id)) {
        issues.push_back({'C', "metric '" + e.metric->id + "' is not registered"});
    }
    if (!e.aggregation_id) {
        issues.push_back({'D', "aggregation (component D) is missing"});
    } else if (!contains(registered_aggregations(), *e.aggregation_id)) {
        issues.push_back({'D', "aggregation '" + *e.aggregation_id + "' is not registered"});
    }
    return issues;
}

std::string describe_estimand(const Estimand& e) {
    auto issues = validate_estimand(e);
    if (!issues.empty()) {
        std::string what = "cannot describe an incomplete estimand:";
        for (const auto& i : issues) what += std::string(" [") + i.component + "] " + i.message + ";";
        throw Error(Err::invalid_estimand, what);
    }
    std::ostringstream os;
    os << "estimand\n";
    os << "  A population: kind=" << population_kind_name(e.population->kind);
    if (e.population->strata) {
        os << " strata=";
        bool first = true;
        for (const auto& [name, members] : *e.population->strata) {
            if (!first) os << "|";
            os << name << "(" << members.size() << ")";
            first = false;
        }
    } else {
        os << " strata=none";
    }
    os << " reference=" << e.population->reference << "\n";
    os << "  B acquisition: seed=" << e.acquisition->seed << " caveats=";
    if (e.acquisition->caveats.empty()) {
        os << "none";
    } else {
        os << "[";
        for (size_t i = 0; i < e.acquisition->caveats.size(); ++i) {
            if (i) os << "; ";
            os << e.acquisition->caveats[i];
        }
        os << "]";
    }
    os << " scheme=" << scheme_to_string(e.acquisition->scheme) << "\n";
    os << "  C metric: units=" << (e.metric->units.empty() ? "(none)" : e.metric->units)
       << " id=" << e.metric->id << "\n";
    os << "  D aggregation: id=" << *e.aggregation_id << "\n";
    os << "  narrative: " << e.narrative << "\n";
    return os.str();
}

DescribedIdentifiers parse_described_identifiers(const std::string& text) {
    DescribedIdentifiers out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("  A population:", 0) == 0) {
            out.population_reference = after_marker(line, " reference=");
        } else if (line.rfind("  B acquisition:", 0) == 0) {
            out.scheme = after_marker(line, " scheme=");
        } else if (line.rfind("  C metric:", 0) == 0) {
            out.metric_id = after_marker(line, " id=");
        } else if (line.rfind("  D aggregation:", 0) == 0) {
            out.aggregation_id = after_marker(line, " id=");
        }
    }
    if (out.population_reference.empty() && out.scheme.empty() && out.metric_id.empty() &&
        out.aggregation_id.empty())
        throw Error(Err::parse_error, "text is not a describe_estimand rendering");
    return out;
}

nlohmann::ordered_json estimand_to_json(const Estimand& e) {
    nlohmann::ordered_json j;
    if (e.population) {
        nlohmann::ordered_json p;
        p["kind"] = population_kind_name(e.population->kind);
        p["reference"] = e.population->reference;
        if (e.population->strata)
            p["strata"] = *e.population->strata;
        else
            p["strata"] = nullptr;
        j["population"] = p;
    } else {
        j["population"] = nullptr;
    }
    if (e.acquisition) {
        nlohmann::ordered_json a;
        const auto& s = e.acquisition->scheme;
        nlohmann::ordered_json sj;
        switch (s.kind) {
            case SchemeKind::with_replacement_sample:
                sj["kind"] = "with-replacement-sample";
                sj["n"] = s.n;
                break;
            case SchemeKind::simple_random_cluster_sample:
                sj["kind"] = "simple-random-cluster-sample";
                sj["m"] = s.m;
                break;
            case SchemeKind::stratified_sample:
                sj["kind"] = "stratified-sample";
                sj["allocation"] = s.allocation;
                break;
            case SchemeKind::full_census:
                sj["kind"] = "full-census";
                break;
        }
        a["scheme"] = sj;
        a["seed"] = e.acquisition->seed;
        a["caveats"] = e.acquisition->caveats;
        j["acquisition"] = a;
    } else {
        j["acquisition"] = nullptr;
    }
    if (e.metric) {
        j["metric"] = {{"id", e.metric->id}, {"units", e.metric->units}};
    } else {
        j["metric"] = nullptr;
    }
    if (e.aggregation_id)
        j["aggregation"] = *e.aggregation_id;
    else
        j["aggregation"] = nullptr;
    j["narrative"] = e.narrative;
    return j;
}

Estimand estimand_from_json(const nlohmann::ordered_json& j) {
    Estimand e;
    if (j.contains("population") && !j["population"].is_null()) {
        const auto& p = j["population"];
        PopulationSpec pop;
        pop.kind = population_kind_from(p.at("kind").get<std::string>());
        pop.reference = p.value("reference", std::string());
        if (p.contains("strata") && !p["strata"].is_null())
            pop.strata = p["strata"].get<std::map<std::string, std::vector<std::string>>>();
        e.population = pop;
    }
    if (j.contains("acquisition") && !j["acquisition"].is_null()) {
        const auto& a = j["acquisition"];
        AcquisitionPolicy acq;
        const auto& sj = a.at("scheme");
        std::string kind = sj.at("kind").get<std::string>();
        if (kind == "with-replacement-sample") {
            acq.scheme.kind = SchemeKind::with_replacement_sample;
            acq.scheme.n = sj.at("n").get<uint64_t>();
        } else if (kind == "simple-random-cluster-sample") {
            acq.scheme.kind = SchemeKind::simple_random_cluster_sample;
            acq.scheme.m = sj.at("m").get<uint64_t>();
        } else if (kind == "stratified-sample") {
            acq.scheme.kind = SchemeKind::stratified_sample;
            acq.scheme.allocation = sj.at("allocation").get<std::map<std::string, uint64_t>>();
        } else if (kind == "full-census") {
            acq.scheme.kind = SchemeKind::full_census;
        } else {
            throw Error(Err::parse_error, "unknown acquisition scheme '" + kind + "'");
        }
        acq.seed = a.value("seed", uint64_t{0});
        if (a.contains("caveats")) acq.caveats = a["caveats"].get<std::vector<std::string>>();
        e.acquisition = acq;
    }
    if (j.contains("metric") && !j["metric"].is_null()) {
        e.metric = MetricId{j["metric"].at("id").get<std::string>(),
                            j["metric"].value("units", std::string())};
    }
    if (j.contains("aggregation") && !j["aggregation"].is_null())
        e.aggregation_id = j["aggregation"].get<std::string>();
    e.narrative = j.value("narrative", std::string());
    return e;
}

}  // namespace esteval
