#pragma once

#include <stdexcept>
#include <string>

namespace esteval {

// Stable identifiers for failure cases; these surface through the C API.
enum class Err {
    schema_mismatch,
    parse_error,
    non_finite_value,
    empty_dataset,
    allocation_exceeds_stratum,
    dimension_mismatch,
    rank_deficient,
    non_finite_input,
    k_exceeds_n,
    invalid_estimand,
    singular_fit,
    degenerate_leverage,
    no_predicted_pairs,
    no_true_pairs,
    empty_sample,
    zero_denominator,
    empty_items,
    empty_records,
    empty_strata,
    degenerate_statistic,
    weight_dimension_mismatch,
    non_reciprocal_matrix,
    non_convergence,
    config_invalid,
    dataset_missing,
    invalid_argument,
    io_error,
};

const char* err_name(Err e);

class Error : public std::runtime_error {
public:
    Error(Err code, const std::string& what)
        : std::runtime_error(std::string(err_name(code)) + ": " + what), code_(code) {}
    Err code() const { return code_; }

private:
    Err code_;
};

}  // namespace esteval
