#include "core/errors.hpp"

namespace esteval {

const char* err_name(Err e) {
    switch (e) {
        case Err::schema_mismatch: return "schema-mismatch";
        case Err::parse_error: return "parse-error";
        case Err::non_finite_value: return "non-finite-value";
        case Err::empty_dataset: return "empty-dataset";
        case Err::allocation_exceeds_stratum: return "allocation-exceeds-stratum";
        case Err::dimension_mismatch: return "dimension-mismatch";
        case Err::rank_deficient: return "rank-deficient";
        case Err::non_finite_input: return "non-finite-input";
        case Err::k_exceeds_n: return "k-exceeds-n";
        case Err::invalid_estimand: return "invalid-estimand";
        case Err::singular_fit: return "singular-fit";
        case Err::degenerate_leverage: return "degenerate-leverage";
        case Err::no_predicted_pairs: return "no-predicted-pairs";
        case Err::no_true_pairs: return "no-true-pairs";
        case Err::empty_sample: return "empty-sample";
        case Err::zero_denominator: return "zero-denominator";
        case Err::empty_items: return "empty-items";
        case Err::empty_records: return "empty-records";
        case Err::empty_strata: return "empty-strata";
        case Err::degenerate_statistic: return "degenerate-statistic";
        case Err::weight_dimension_mismatch: return "weight-dimension-mismatch";
        case Err::non_reciprocal_matrix: return "non-reciprocal-matrix";
        case Err::non_convergence: return "non-convergence";
        case Err::config_invalid: return "config-invalid";
        case Err::dataset_missing: return "dataset-missing";
        case Err::invalid_argument: return "invalid-argument";
        case Err::io_error: return "io-error";
    }
    return "unknown";
}

}  // namespace esteval
