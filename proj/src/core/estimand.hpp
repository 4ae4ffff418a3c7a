#pragma once

#include "core/errors.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace esteval {

enum class PopulationKind {
    finite_dataset,
    resampling_process,
    cluster_population,
    item_population,
};

enum class SchemeKind {
    with_replacement_sample,
    simple_random_cluster_sample,
    stratified_sample,
    full_census,
};

struct PopulationSpec {
    PopulationKind kind = PopulationKind::finite_dataset;
    std::string reference;  // dataset or generator identifier
    // Optional named partition of the population; member lists must be disjoint.
    std::optional<std::map<std::string, std::vector<std::string>>> strata;
};

struct AcquisitionScheme {
    SchemeKind kind = SchemeKind::full_census;
    uint64_t n = 0;  // with-replacement-sample
    uint64_t m = 0;  // simple-random-cluster-sample
    std::map<std::string, uint64_t> allocation;  // stratified-sample
};

struct AcquisitionPolicy {
    AcquisitionScheme scheme;
    uint64_t seed = 0;
    std::vector<std::string> caveats;
};

struct MetricId {
    std::string id;
    std::string units;
};

// The four-component estimation target. Components are optional so that an
// incomplete declaration can be represented and reported on; validation names
// whichever letters are missing or invalid.
struct Estimand {
    std::optional<PopulationSpec> population;     // A
    std::optional<AcquisitionPolicy> acquisition; // B
    std::optional<MetricId> metric;               // C
    std::optional<std::string> aggregation_id;    // D
    std::string narrative;                        // carried, never interpreted
};

struct EstimandIssue {
    char component;  // 'A'..'D'
    std::string message;
};

const std::vector<std::string>& registered_metrics();
const std::vector<std::string>& registered_aggregations();

// Empty iff all four components are present and registered.
std::vector<EstimandIssue> validate_estimand(const Estimand& e);

// Deterministic text block listing A-D, caveats and units.
// Throws Error(invalid_estimand) when validation issues exist.
std::string describe_estimand(const Estimand& e);

struct DescribedIdentifiers {
    std::string population_reference;
    std::string scheme;
    std::string metric_id;
    std::string aggregation_id;
};

// Recovers the component identifiers from a describe_estimand rendering.
DescribedIdentifiers parse_described_identifiers(const std::string& text);

std::string scheme_to_string(const AcquisitionScheme& s);

nlohmann::ordered_json estimand_to_json(const Estimand& e);
Estimand estimand_from_json(const nlohmann::ordered_json& j);

const char* population_kind_name(PopulationKind k);

}  // namespace esteval
