#include "esteval/esteval.h"

#include "core/reporting.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

struct esteval_config {
    esteval::ExperimentConfig cfg;
};

namespace {

thread_local std::string g_last_error;

esteval_status status_of(esteval::Err code) {
    using esteval::Err;
    switch (code) {
        case Err::config_invalid:
        case Err::invalid_estimand:
            return ESTEVAL_E_CONFIG;
        case Err::dataset_missing:
        case Err::schema_mismatch:
        case Err::parse_error:
        case Err::non_finite_value:
        case Err::empty_dataset:
            return ESTEVAL_E_DATASET;
        case Err::rank_deficient:
        case Err::singular_fit:
        case Err::degenerate_leverage:
        case Err::non_convergence:
        case Err::degenerate_statistic:
        case Err::zero_denominator:
        case Err::non_finite_input:
            return ESTEVAL_E_NUMERIC;
        case Err::io_error:
            return ESTEVAL_E_IO;
        default:
            return ESTEVAL_E_INVALID;
    }
}

template <typename F>
esteval_status guarded(F&& body) {
    try {
        g_last_error.clear();
        return body();
    } catch (const esteval::Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return ESTEVAL_E_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) return nullptr;
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

esteval_status out_string(const std::string& s, char** out) {
    *out = dup_string(s);
    if (!*out) {
        g_last_error = "out of memory";
        return ESTEVAL_E_INTERNAL;
    }
    return ESTEVAL_OK;
}

esteval_status invalid(const char* what) {
    g_last_error = what;
    return ESTEVAL_E_INVALID;
}

}  // namespace

extern "C" {

uint32_t esteval_abi_version(void) { return 1; }

const char* esteval_last_error(void) { return g_last_error.c_str(); }

esteval_status esteval_config_load(const char* path, esteval_config** out) {
    if (!path || !out) return invalid("null argument");
    *out = nullptr;
    return guarded([&] {
        auto* handle = new esteval_config{esteval::load_config(path)};
        *out = handle;
        return ESTEVAL_OK;
    });
}

esteval_status esteval_config_parse(const char* json_text, esteval_config** out) {
    if (!json_text || !out) return invalid("null argument");
    *out = nullptr;
    return guarded([&] {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(json_text);
        } catch (const nlohmann::json::exception& e) {
            throw esteval::Error(esteval::Err::config_invalid, e.what());
        }
        auto* handle = new esteval_config{esteval::config_from_json(j)};
        *out = handle;
        return ESTEVAL_OK;
    });
}

void esteval_config_free(esteval_config* cfg) { delete cfg; }

esteval_status esteval_config_set_seed(esteval_config* cfg, uint64_t seed) {
    if (!cfg) return invalid("null config");
    cfg->cfg.seed = seed;
    return ESTEVAL_OK;
}

esteval_status esteval_config_set_replications(esteval_config* cfg, uint64_t n) {
    if (!cfg) return invalid("null config");
    if (n == 0) return invalid("replications must be positive");
    switch (cfg->cfg.kind) {
        case esteval::ExperimentKind::cv_rank_reversal:
            if (!cfg->cfg.cv) return invalid("config has no cv section");
            cfg->cfg.cv->plan.replications = n;
            return ESTEVAL_OK;
        case esteval::ExperimentKind::clustering_rank_reversal:
            if (!cfg->cfg.clustering) return invalid("config has no clustering section");
            cfg->cfg.clustering->plan.simulations = n;
            return ESTEVAL_OK;
        default:
            return invalid("replications do not apply to this experiment kind");
    }
}

esteval_status esteval_config_set_output_dir(esteval_config* cfg, const char* dir) {
    if (!cfg || !dir) return invalid("null argument");
    cfg->cfg.output_dir = dir;
    return ESTEVAL_OK;
}

esteval_status esteval_config_set_threads(esteval_config* cfg, uint64_t threads) {
    if (!cfg) return invalid("null config");
    if (threads == 0) return invalid("threads must be positive");
    cfg->cfg.threads = size_t(threads);
    return ESTEVAL_OK;
}

esteval_status esteval_config_validate(const esteval_config* cfg, char** issues) {
    if (!cfg || !issues) return invalid("null argument");
    *issues = nullptr;
    return guarded([&] {
        auto list = esteval::validate_config(cfg->cfg);
        std::string joined;
        for (size_t i = 0; i < list.size(); ++i) {
            if (i) joined += '\n';
            joined += list[i];
        }
        return out_string(joined, issues);
    });
}

esteval_status esteval_run(const esteval_config* cfg, char** report_json) {
    if (!cfg || !report_json) return invalid("null argument");
    *report_json = nullptr;
    return guarded([&] {
        esteval::RunResult r = esteval::run_experiment(cfg->cfg);
        return out_string(r.report.dump(2) + "\n", report_json);
    });
}

esteval_status esteval_render_table(const char* report_json, char** csv) {
    if (!report_json || !csv) return invalid("null argument");
    *csv = nullptr;
    return guarded([&] {
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(report_json);
        } catch (const nlohmann::json::exception& e) {
            throw esteval::Error(esteval::Err::parse_error, e.what());
        }
        return out_string(esteval::render_table(j), csv);
    });
}

void esteval_string_free(char* s) { std::free(s); }

}  // extern "C"
