#include "core/dataset.hpp"

#include "core/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace esteval {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

double parse_cell(const std::string& cell, size_t row, size_t col) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw Error(Err::parse_error, "row " + std::to_string(row) + ", column " +
                                          std::to_string(col + 1) + ": cannot parse '" + cell + "'");
    if (!std::isfinite(v))
        throw Error(Err::non_finite_value, "row " + std::to_string(row) + ", column " +
                                               std::to_string(col + 1) + " is not finite");
    return v;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Type-7 (linear interpolation) quantile of already sorted data.
double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    double h = p * double(sorted.size() - 1);
    size_t lo = size_t(std::floor(h));
    size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = h - double(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double excess_kurtosis(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0;
    for (double x : v) mean += x;
    mean /= double(v.size());
    double m2 = 0, m4 = 0;
    for (double x : v) {
        double c = x - mean;
        m2 += c * c;
        m4 += c * c * c * c;
    }
    m2 /= double(v.size());
    m4 /= double(v.size());
    if (m2 == 0) return 0.0;
    return m4 / (m2 * m2) - 3.0;
}

TabularDataset take_rows(const TabularDataset& ds, const std::vector<size_t>& rows) {
    TabularDataset out;
    out.feature_names = ds.feature_names;
    out.target_name = ds.target_name;
    out.X.reserve(rows.size() * ds.d());
    out.y.reserve(rows.size());
    out.ids.reserve(rows.size());
    for (size_t r : rows) {
        out.ids.push_back(ds.ids[r]);
        out.y.push_back(ds.y[r]);
        for (size_t j = 0; j < ds.d(); ++j) out.X.push_back(ds.x(r, j));
    }
    return out;
}

}  // namespace

const std::vector<std::string>& california_schema() {
    static const std::vector<std::string> v = {
        "MedInc", "HouseAge", "AveRooms",  "AveBedrms",  "Population",
        "AveOccup", "Latitude", "Longitude", "MedHouseVal",
    };
    return v;
}

TabularDataset load_tabular_csv(const std::string& path, const std::vector<std::string>& schema) {
    if (schema.size() < 2)
        throw Error(Err::invalid_argument, "schema needs at least one feature and a target");
    std::ifstream f(path);
    if (!f) throw Error(Err::dataset_missing, "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(f, line)) throw Error(Err::parse_error, "'" + path + "' is empty");
    auto header = split_csv_line(line);
    if (header != schema) {
        std::string want, got;
        for (const auto& c : schema) want += c + ",";
        for (const auto& c : header) got += c + ",";
        throw Error(Err::schema_mismatch, "header [" + got + "] does not match schema [" + want + "]");
    }
    TabularDataset ds;
    ds.feature_names.assign(schema.begin(), schema.end() - 1);
    ds.target_name = schema.back();
    size_t row = 0;
    while (std::getline(f, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        auto cells = split_csv_line(line);
        if (cells.size() != schema.size())
            throw Error(Err::parse_error, "row " + std::to_string(row) + " has " +
                                              std::to_string(cells.size()) + " cells, expected " +
                                              std::to_string(schema.size()));
        for (size_t c = 0; c + 1 < cells.size(); ++c) ds.X.push_back(parse_cell(cells[c], row, c));
        ds.y.push_back(parse_cell(cells.back(), row, cells.size() - 1));
        ds.ids.push_back(std::to_string(row - 1));
    }
    if (ds.y.empty()) throw Error(Err::parse_error, "'" + path + "' has no data rows");
    return ds;
}

TabularDataset sample_with_replacement(const TabularDataset& ds, size_t n, uint64_t seed) {
    if (ds.n() == 0) throw Error(Err::empty_dataset, "cannot sample an empty dataset");
    if (n == 0) throw Error(Err::invalid_argument, "sample size must be positive");
    Rng rng = Rng::from(seed, "sample-with-replacement", 0);
    std::vector<size_t> rows(n);
    for (size_t i = 0; i < n; ++i) rows[i] = size_t(rng.next_below(ds.n()));
    return take_rows(ds, rows);
}

TabularDataset stratified_sample(const TabularDataset& ds,
                                 const std::vector<std::string>& row_strata,
                                 const std::map<std::string, uint64_t>& allocation,
                                 uint64_t seed) {
    if (row_strata.size() != ds.n())
        throw Error(Err::dimension_mismatch, "row_strata size differs from dataset size");
    std::map<std::string, std::vector<size_t>> members;
    for (size_t i = 0; i < row_strata.size(); ++i) members[row_strata[i]].push_back(i);
    std::vector<size_t> rows;
    size_t stratum_index = 0;
    for (const auto& [label, count] : allocation) {
        auto it = members.find(label);
        if (it == members.end())
            throw Error(Err::allocation_exceeds_stratum, "stratum '" + label + "' has no members");
        auto idx = it->second;
        if (count > idx.size())
            throw Error(Err::allocation_exceeds_stratum,
                        "allocation " + std::to_string(count) + " exceeds stratum '" + label +
                            "' of size " + std::to_string(idx.size()));
        Rng rng = Rng::from(seed, "stratified-sample", stratum_index);
        for (size_t i = 0; i < count; ++i) {
            size_t j = i + size_t(rng.next_below(idx.size() - i));
            std::swap(idx[i], idx[j]);
            rows.push_back(idx[i]);
        }
        ++stratum_index;
    }
    return take_rows(ds, rows);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error(Err::empty_dataset, "KS needs nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double na = double(a.size()), nb = double(b.size());
    size_t i = 0, j = 0;
    double best = 0.0;
    while (i < a.size() && j < b.size()) {
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        best = std::max(best, std::abs(double(i) / na - double(j) / nb));
    }
    return best;
}

DistributionReport feature_distribution_report(const TabularDataset& sample,
                                               const TabularDataset& population) {
    if (sample.d() != population.d() || sample.feature_names != population.feature_names)
        throw Error(Err::dimension_mismatch, "sample and population schemas differ");
    static const double kProbs[7] = {0.01, 0.05, 0.25, 0.50, 0.75, 0.95, 0.99};
    DistributionReport rep;
    for (size_t f = 0; f < sample.d(); ++f) {
        std::vector<double> sv(sample.n()), pv(population.n());
        for (size_t i = 0; i < sample.n(); ++i) sv[i] = sample.x(i, f);
        for (size_t i = 0; i < population.n(); ++i) pv[i] = population.x(i, f);
        FeatureStats st;
        st.name = sample.feature_names[f];
        st.ks = ks_two_sample(sv, pv);
        st.ks_flag = st.ks > kKsFlagThreshold;
        st.sample_excess_kurtosis = excess_kurtosis(sv);
        st.population_excess_kurtosis = excess_kurtosis(pv);
        std::sort(sv.begin(), sv.end());
        std::sort(pv.begin(), pv.end());
        for (int q = 0; q < 7; ++q) {
            st.sample_quantiles[q] = quantile_sorted(sv, kProbs[q]);
            st.population_quantiles[q] = quantile_sorted(pv, kProbs[q]);
        }
        double iqr_tail = st.population_quantiles[6] - st.population_quantiles[3];
        st.coverage_flag = pv.back() > sv.back() + iqr_tail;
        rep.features.push_back(st);
    }
    return rep;
}

EmbeddingDataset generate_synthetic_identities(size_t n_identities, size_t per_identity,
                                               size_t dim, double within_spread,
                                               double between_spread, uint64_t seed) {
    if (n_identities == 0 || per_identity == 0 || dim == 0)
        throw Error(Err::invalid_argument, "all synthetic generator counts must be positive");
    EmbeddingDataset ds;
    ds.dim_ = dim;
    std::vector<double> centroid(dim);
    size_t digits = std::to_string(n_identities * per_identity - 1).size();
    for (size_t i = 0; i < n_identities; ++i) {
        Rng crng = Rng::from(seed, "synthetic-identity-centroid", i);
        for (size_t c = 0; c < dim; ++c) centroid[c] = between_spread * crng.next_gaussian();
        for (size_t j = 0; j < per_identity; ++j) {
            Rng mrng = Rng::from(seed, "synthetic-identity-member", i * per_identity + j);
            for (size_t c = 0; c < dim; ++c)
                ds.vectors.push_back(centroid[c] + within_spread * mrng.next_gaussian());
            ds.identity.push_back(int(i));
            std::string num = std::to_string(i * per_identity + j);
            ds.ids.push_back("r" + std::string(digits - num.size(), '0') + num);
        }
    }
    return ds;
}

ItemResponseMatrix generate_item_responses(const ItemResponseSpec& spec,
                                           size_t items_per_stratum, uint64_t seed) {
    if (spec.models.empty()) throw Error(Err::invalid_argument, "spec has no models");
    if (items_per_stratum == 0) throw Error(Err::invalid_argument, "items_per_stratum must be positive");
    const auto& strata = spec.models.front().rates;
    for (const auto& m : spec.models) {
        if (m.rates.size() != strata.size())
            throw Error(Err::invalid_argument, "models disagree on strata");
        for (const auto& [name, rate] : m.rates) {
            if (!strata.count(name)) throw Error(Err::invalid_argument, "models disagree on strata");
            if (rate < 0.0 || rate > 1.0)
                throw Error(Err::invalid_argument, "rate for stratum '" + name + "' outside [0,1]");
        }
    }
    ItemResponseMatrix irm;
    for (const auto& m : spec.models) irm.models.push_back(m.model_id);
    size_t digits = std::to_string(items_per_stratum - 1).size();
    for (const auto& [name, rate] : strata) {
        for (size_t j = 0; j < items_per_stratum; ++j) {
            std::string num = std::to_string(j);
            irm.items.push_back({name + ":" + std::string(digits - num.size(), '0') + num, name});
        }
    }
    irm.responses.assign(irm.models.size() * irm.items.size(), 0);
    for (size_t mi = 0; mi < spec.models.size(); ++mi) {
        size_t item_index = 0;
        for (const auto& [name, rate] : spec.models[mi].rates) {
            Rng rng = Rng::from(seed, "item-response:" + spec.models[mi].model_id + ":" + name, 0);
            for (size_t j = 0; j < items_per_stratum; ++j, ++item_index)
                irm.responses[mi * irm.items.size() + item_index] = rng.next_double() < rate ? 1 : 0;
        }
    }
    return irm;
}

void save_embeddings_csv(const EmbeddingDataset& ds, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error(Err::io_error, "cannot write '" + path + "'");
    f << "id,identity";
    for (size_t c = 0; c < ds.dim(); ++c) f << ",v" << c;
    f << "\n";
    for (size_t i = 0; i < ds.n(); ++i) {
        f << ds.ids[i] << "," << ds.identity[i];
        for (size_t c = 0; c < ds.dim(); ++c) f << "," << fmt_double(ds.vectors[i * ds.dim() + c]);
        f << "\n";
    }
}

EmbeddingDataset load_embeddings_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(Err::dataset_missing, "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(f, line)) throw Error(Err::parse_error, "'" + path + "' is empty");
    auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "id" || header[1] != "identity")
        throw Error(Err::schema_mismatch, "embeddings header must be id,identity,v0,...");
    EmbeddingDataset ds;
    ds.dim_ = header.size() - 2;
    size_t row = 0;
    while (std::getline(f, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw Error(Err::parse_error, "row " + std::to_string(row) + " has wrong cell count");
        ds.ids.push_back(cells[0]);
        ds.identity.push_back(int(parse_cell(cells[1], row, 1)));
        for (size_t c = 2; c < cells.size(); ++c) ds.vectors.push_back(parse_cell(cells[c], row, c));
    }
    if (ds.identity.empty()) throw Error(Err::parse_error, "'" + path + "' has no data rows");
    return ds;
}

void save_item_responses_csv(const ItemResponseMatrix& irm, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error(Err::io_error, "cannot write '" + path + "'");
    f << "model_id,item_id,stratum,response\n";
    for (size_t m = 0; m < irm.models.size(); ++m)
        for (size_t i = 0; i < irm.items.size(); ++i)
            f << irm.models[m] << "," << irm.items[i].id << ","
              << (irm.items[i].stratum ? *irm.items[i].stratum : "") << ","
              << int(irm.at(m, i)) << "\n";
}

ItemResponseMatrix load_item_responses_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(Err::dataset_missing, "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(f, line)) throw Error(Err::parse_error, "'" + path + "' is empty");
    auto header = split_csv_line(line);
    bool with_stratum = header == std::vector<std::string>{"model_id", "item_id", "stratum", "response"};
    if (!with_stratum && header != std::vector<std::string>{"model_id", "item_id", "response"})
        throw Error(Err::schema_mismatch,
                    "item responses header must be model_id,item_id[,stratum],response");
    ItemResponseMatrix irm;
    std::map<std::string, size_t> model_index, item_index;
    struct Cell { size_t m, i; uint8_t r; };
    std::vector<Cell> cells;
    size_t row = 0;
    while (std::getline(f, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        auto parts = split_csv_line(line);
        if (parts.size() != header.size())
            throw Error(Err::parse_error, "row " + std::to_string(row) + " has wrong cell count");
        const std::string& model = parts[0];
        const std::string& item = parts[1];
        const std::string& resp = parts.back();
        if (resp != "0" && resp != "1")
            throw Error(Err::parse_error, "row " + std::to_string(row) + ": response must be 0 or 1");
        if (!model_index.count(model)) {
            model_index[model] = irm.models.size();
            irm.models.push_back(model);
        }
        if (!item_index.count(item)) {
            item_index[item] = irm.items.size();
            Item it{item, std::nullopt};
            if (with_stratum && !parts[2].empty()) it.stratum = parts[2];
            irm.items.push_back(it);
        }
        cells.push_back({model_index[model], item_index[item], uint8_t(resp == "1")});
    }
    if (cells.empty()) throw Error(Err::parse_error, "'" + path + "' has no data rows");
    irm.responses.assign(irm.models.size() * irm.items.size(), 0);
    std::vector<uint8_t> seen(irm.models.size() * irm.items.size(), 0);
    for (const auto& c : cells) {
        size_t flat = c.m * irm.items.size() + c.i;
        if (seen[flat]) throw Error(Err::parse_error, "duplicate (model,item) pair in '" + path + "'");
        seen[flat] = 1;
        irm.responses[flat] = c.r;
    }
    for (uint8_t s : seen)
        if (!s) throw Error(Err::parse_error, "incomplete matrix: missing (model,item) pairs");
    return irm;
}

}  // namespace esteval
