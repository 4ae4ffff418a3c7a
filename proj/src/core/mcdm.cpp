#include "core/mcdm.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace esteval {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    for (char ch : line) {
        if (ch == '\r') continue;
        if (ch == ',') {
            out.push_back(cell);
            cell.clear();
        } else {
            cell.push_back(ch);
        }
    }
    out.push_back(cell);
    return out;
}

double parse_double(const std::string& cell, const std::string& where) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end)
        throw Error(Err::parse_error, "bad number '" + cell + "' at " + where);
    if (!std::isfinite(v))
        throw Error(Err::non_finite_value, "non-finite value at " + where);
    return v;
}

void require_finite_scores(const CriteriaMatrix& m) {
    for (double v : m.scores)
        if (!std::isfinite(v)) throw Error(Err::non_finite_input, "criteria scores must be finite");
}

void require_shape(const CriteriaMatrix& m) {
    if (m.alternatives.empty()) throw Error(Err::empty_dataset, "no alternatives");
    if (m.criteria.empty()) throw Error(Err::empty_dataset, "no criteria");
    if (m.scores.size() != m.alternatives.size() * m.criteria.size())
        throw Error(Err::dimension_mismatch,
                    "expected " + std::to_string(m.alternatives.size() * m.criteria.size()) +
                        " scores, got " + std::to_string(m.scores.size()));
    std::set<std::string> seen(m.alternatives.begin(), m.alternatives.end());
    if (seen.size() != m.alternatives.size())
        throw Error(Err::invalid_argument, "duplicate alternative id");
    require_finite_scores(m);
}

}  // namespace

std::vector<std::string> pareto_frontier(const CriteriaMatrix& m) {
    require_shape(m);
    size_t n = m.alternatives.size();
    size_t k = m.criteria.size();
    auto adjusted = [&](size_t alt, size_t crit) {
        double v = m.at(alt, crit);
        return m.criteria[crit].maximize ? v : -v;
    };
    std::vector<std::string> frontier;
    for (size_t a = 0; a < n; ++a) {
        bool dominated = false;
        for (size_t b = 0; b < n && !dominated; ++b) {
            if (b == a) continue;
            bool at_least = true;
            bool strictly = false;
            for (size_t c = 0; c < k; ++c) {
                double va = adjusted(a, c);
                double vb = adjusted(b, c);
                if (vb < va) {
                    at_least = false;
                    break;
                }
                if (vb > va) strictly = true;
            }
            dominated = at_least && strictly;
        }
        if (!dominated) frontier.push_back(m.alternatives[a]);
    }
    return frontier;
}

std::map<std::string, double> weighted_aggregate(const CriteriaMatrix& m,
                                                 const std::vector<double>& weights) {
    require_shape(m);
    size_t k = m.criteria.size();
    if (weights.size() != k)
        throw Error(Err::weight_dimension_mismatch,
                    std::to_string(weights.size()) + " weights for " + std::to_string(k) +
                        " criteria");
    double total = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0)
            throw Error(Err::invalid_argument, "weights must be finite and nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw Error(Err::invalid_argument, "weights must sum to 1, got " + fmt_double(total));
    std::map<std::string, double> out;
    for (size_t a = 0; a < m.alternatives.size(); ++a) {
        double acc = 0.0;
        for (size_t c = 0; c < k; ++c) {
            double v = m.at(a, c);
            acc += weights[c] * (m.criteria[c].maximize ? v : -v);
        }
        out[m.alternatives[a]] = acc;
    }
    return out;
}

AhpResult ahp_weights(const ComparisonMatrix& c) {
    size_t k = c.size();
    if (k < 2) throw Error(Err::invalid_argument, "need at least two criteria");
    if (c.values.size() != k * k)
        throw Error(Err::dimension_mismatch, "comparison matrix must be " + std::to_string(k) +
                                                 "x" + std::to_string(k));
    for (double v : c.values)
        if (!std::isfinite(v) || v <= 0.0)
            throw Error(Err::invalid_argument, "comparison entries must be positive");
    for (size_t i = 0; i < k; ++i)
        for (size_t j = i; j < k; ++j) {
            double prod = c.values[i * k + j] * c.values[j * k + i];
            if (std::abs(prod - 1.0) > 1e-9)
                throw Error(Err::non_reciprocal_matrix,
                            "entries (" + std::to_string(i) + "," + std::to_string(j) +
                                ") violate reciprocity");
        }

    // Power iteration for the Perron eigenpair; guaranteed dominant for a
    // positive matrix, so only the tolerance and iteration cap matter.
    std::vector<double> v(k, 1.0 / double(k));
    std::vector<double> next(k, 0.0);
    double lambda = 0.0;
    bool converged = false;
    for (int iter = 0; iter < 10000; ++iter) {
        for (size_t i = 0; i < k; ++i) {
            double acc = 0.0;
            for (size_t j = 0; j < k; ++j) acc += c.values[i * k + j] * v[j];
            next[i] = acc;
        }
        double sum = 0.0;
        for (double x : next) sum += x;
        lambda = sum;  // previous iterate sums to 1
        double worst = 0.0;
        for (size_t i = 0; i < k; ++i) {
            next[i] /= sum;
            worst = std::max(worst, std::abs(next[i] - v[i]) / next[i]);
        }
        v = next;
        if (worst <= 1e-12) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw Error(Err::non_convergence, "power iteration did not settle in 10000 steps");

    // Saaty's random consistency index, tabulated for k = 1..10.
    static const double kRandomIndex[] = {0.0, 0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49};
    if (k > 10)
        throw Error(Err::invalid_argument, "random consistency index is tabulated up to 10 criteria");

    AhpResult r;
    r.weights = v;
    r.lambda_max = lambda;
    r.consistency_index = (lambda - double(k)) / double(k - 1);
    double ri = kRandomIndex[k];
    r.consistency_ratio = ri > 0.0 ? r.consistency_index / ri : 0.0;
    r.inconsistent = r.consistency_ratio > 0.1;
    return r;
}

void save_criteria_csv(const CriteriaMatrix& m, const std::string& path) {
    require_shape(m);
    std::ofstream out(path);
    if (!out) throw Error(Err::io_error, "cannot write " + path);
    out << "alternative";
    for (const Criterion& c : m.criteria) out << ',' << c.id << ':' << (c.maximize ? "max" : "min");
    out << '\n';
    for (size_t a = 0; a < m.alternatives.size(); ++a) {
        out << m.alternatives[a];
        for (size_t c = 0; c < m.criteria.size(); ++c) out << ',' << fmt_double(m.at(a, c));
        out << '\n';
    }
    if (!out) throw Error(Err::io_error, "failed writing " + path);
}

CriteriaMatrix load_criteria_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Err::dataset_missing, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(Err::parse_error, path + " is empty");
    std::vector<std::string> header = split_line(line);
    if (header.empty() || header[0] != "alternative")
        throw Error(Err::schema_mismatch, "first column must be 'alternative'");
    CriteriaMatrix m;
    for (size_t i = 1; i < header.size(); ++i) {
        const std::string& cell = header[i];
        size_t colon = cell.rfind(':');
        std::string dir = colon == std::string::npos ? "" : cell.substr(colon + 1);
        if (dir != "max" && dir != "min")
            throw Error(Err::parse_error, "criterion '" + cell + "' needs a :max or :min suffix");
        m.criteria.push_back({cell.substr(0, colon), dir == "max"});
    }
    size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw Error(Err::parse_error, "row " + std::to_string(row) + " has " +
                                              std::to_string(cells.size()) + " cells, expected " +
                                              std::to_string(header.size()));
        m.alternatives.push_back(cells[0]);
        for (size_t i = 1; i < cells.size(); ++i)
            m.scores.push_back(parse_double(cells[i], "row " + std::to_string(row)));
    }
    require_shape(m);
    return m;
}

void save_comparison_csv(const ComparisonMatrix& c, const std::string& path) {
    size_t k = c.size();
    if (c.values.size() != k * k) throw Error(Err::dimension_mismatch, "comparison matrix not square");
    std::ofstream out(path);
    if (!out) throw Error(Err::io_error, "cannot write " + path);
    out << "criterion";
    for (const std::string& id : c.criteria) out << ',' << id;
    out << '\n';
    for (size_t i = 0; i < k; ++i) {
        out << c.criteria[i];
        for (size_t j = 0; j < k; ++j) out << ',' << fmt_double(c.values[i * k + j]);
        out << '\n';
    }
    if (!out) throw Error(Err::io_error, "failed writing " + path);
}

ComparisonMatrix load_comparison_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Err::dataset_missing, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(Err::parse_error, path + " is empty");
    std::vector<std::string> header = split_line(line);
    if (header.empty() || header[0] != "criterion")
        throw Error(Err::schema_mismatch, "first column must be 'criterion'");
    ComparisonMatrix c;
    c.criteria.assign(header.begin() + 1, header.end());
    size_t k = c.criteria.size();
    size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != k + 1)
            throw Error(Err::parse_error, "row " + std::to_string(row) + " has " +
                                              std::to_string(cells.size()) + " cells, expected " +
                                              std::to_string(k + 1));
        size_t i = c.values.size() / k;
        if (i >= k) throw Error(Err::parse_error, "more rows than criteria");
        if (cells[0] != c.criteria[i])
            throw Error(Err::schema_mismatch, "row label '" + cells[0] + "' does not match header '" +
                                                  c.criteria[i] + "'");
        for (size_t j = 1; j < cells.size(); ++j)
            c.values.push_back(parse_double(cells[j], "row " + std::to_string(row)));
    }
    if (c.values.size() != k * k)
        throw Error(Err::parse_error, "expected " + std::to_string(k) + " rows");
    return c;
}

nlohmann::ordered_json criteria_matrix_to_json(const CriteriaMatrix& m) {
    nlohmann::ordered_json j;
    j["alternatives"] = m.alternatives;
    j["criteria"] = nlohmann::ordered_json::array();
    for (const Criterion& c : m.criteria)
        j["criteria"].push_back({{"id", c.id}, {"direction", c.maximize ? "max" : "min"}});
    j["scores"] = nlohmann::ordered_json::array();
    for (size_t a = 0; a < m.alternatives.size(); ++a) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (size_t c = 0; c < m.criteria.size(); ++c) row.push_back(m.at(a, c));
        j["scores"].push_back(row);
    }
    return j;
}

CriteriaMatrix criteria_matrix_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("alternatives") || !j.contains("criteria") ||
        !j.contains("scores"))
        throw Error(Err::parse_error, "criteria matrix needs alternatives, criteria and scores");
    CriteriaMatrix m;
    try {
        m.alternatives = j.at("alternatives").get<std::vector<std::string>>();
        for (const auto& c : j.at("criteria")) {
            std::string dir = c.at("direction").get<std::string>();
            if (dir != "max" && dir != "min")
                throw Error(Err::parse_error, "criterion direction must be max or min");
            m.criteria.push_back({c.at("id").get<std::string>(), dir == "max"});
        }
        for (const auto& row : j.at("scores"))
            for (const auto& v : row) m.scores.push_back(v.get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(Err::parse_error, std::string("criteria matrix json: ") + e.what());
    }
    require_shape(m);
    return m;
}

nlohmann::ordered_json comparison_matrix_to_json(const ComparisonMatrix& c) {
    size_t k = c.size();
    if (c.values.size() != k * k) throw Error(Err::dimension_mismatch, "comparison matrix not square");
    nlohmann::ordered_json j;
    j["criteria"] = c.criteria;
    j["values"] = nlohmann::ordered_json::array();
    for (size_t i = 0; i < k; ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (size_t jj = 0; jj < k; ++jj) row.push_back(c.values[i * k + jj]);
        j["values"].push_back(row);
    }
    return j;
}

ComparisonMatrix comparison_matrix_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("criteria") || !j.contains("values"))
        throw Error(Err::parse_error, "comparison matrix needs criteria and values");
    ComparisonMatrix c;
    try {
        c.criteria = j.at("criteria").get<std::vector<std::string>>();
        for (const auto& row : j.at("values")) {
            if (row.size() != c.criteria.size())
                throw Error(Err::parse_error, "comparison rows must match the criterion count");
            for (const auto& v : row) c.values.push_back(v.get<double>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Err::parse_error, std::string("comparison matrix json: ") + e.what());
    }
    if (c.values.size() != c.criteria.size() * c.criteria.size())
        throw Error(Err::parse_error, "comparison matrix must be square");
    return c;
}

}  // namespace esteval
