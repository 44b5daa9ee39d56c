#pragma once

// JSON and CSV encodings of matrices and reports. Matrices are nested arrays
// of [re, im] pairs, row by row. Objects are emitted with sorted keys and
// doubles in shortest round-trip form, so equal reports serialize to equal
// bytes. CSV cells use 17 significant digits.

#include <cinttypes>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "locobs/defect.hpp"
#include "locobs/experiments.hpp"
#include "locobs/opcore.hpp"

namespace locobs {

using Json = nlohmann::json;

/// A configuration document is missing a field or holds an invalid value.
/// The message names the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Accepts [[[re, im], ...], ...]; a bare number is taken as a real entry.
inline Matrix matrix_from_json(const Json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw ConfigError("field '" + field + "': expected a non-empty array of rows");
    const auto rows = static_cast<Index>(j.size());
    if (!j[0].is_array() || j[0].empty()) throw ConfigError("field '" + field + "': rows must be non-empty arrays");
    const auto cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const Json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols)
            throw ConfigError("field '" + field + "': row " + std::to_string(i) + " has the wrong length");
        for (Index k = 0; k < cols; ++k) {
            const Json& e = row[static_cast<std::size_t>(k)];
            if (e.is_number()) {
                m(i, k) = Complex(e.get<double>(), 0.0);
            } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
                m(i, k) = Complex(e[0].get<double>(), e[1].get<double>());
            } else {
                throw ConfigError("field '" + field + "': entry (" + std::to_string(i) + "," + std::to_string(k) +
                                  ") must be [re, im]");
            }
        }
    }
    if (!m.allFinite()) throw ConfigError("field '" + field + "': entries must be finite");
    return m;
}

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline Json to_json(const OptimizerConfig& c) {
    return {{"restarts", c.restarts},
            {"max_iters", c.max_iters},
            {"step_init", c.step_init},
            {"grad_tol", c.grad_tol},
            {"seed", c.seed.value}};
}

inline Json to_json(const DefectEstimate& e) {
    return {{"value", e.value},
            {"witness", matrix_to_json(e.witness)},
            {"restarts_used", e.restarts_used},
            {"converged", e.converged},
            {"iterations", e.iterations}};
}

/// Canonical summary: everything but the wall time and the per-trial rows.
inline Json to_json(const CampaignReport& r) {
    return {{"d1", r.d1},
            {"d2", r.d2},
            {"n_trials", r.n_trials},
            {"n_success", r.n_success},
            {"min_ratio", r.min_ratio},
            {"median_ratio", r.median_ratio},
            {"max_ratio", r.max_ratio},
            {"base_seed", r.base_seed.value},
            {"optimizer", to_json(r.optimizer)}};
}

inline Json to_json(const BoundSuiteReport& r) {
    Json dims = Json::array();
    for (const auto& d : r.dims)
        dims.push_back({{"d1", d.d1},
                        {"d2", d.d2},
                        {"n", d.n},
                        {"chain_pass", d.chain_pass},
                        {"defect_pass", d.defect_pass},
                        {"defect_reruns", d.defect_reruns},
                        {"triangle_pass", d.triangle_pass},
                        {"worst_chain_margin", d.worst_chain_margin},
                        {"worst_defect_margin", d.worst_defect_margin},
                        {"worst_triangle_margin", d.worst_triangle_margin}});
    return {{"dims", dims}};
}

inline const char* kTrialCsvHeader = "trial_id,seed,delta,best_gap,ratio,success";

inline std::string trial_csv_row(const TrialRecord& t) {
    return std::to_string(t.trial_id) + "," + std::to_string(t.seed.value) + "," + format_double(t.delta) + "," +
           format_double(t.best_gap) + "," + format_double(t.ratio) + "," + (t.success ? "true" : "false");
}

inline const char* kCurveCsvHeader = "radius,error";

} // namespace locobs
