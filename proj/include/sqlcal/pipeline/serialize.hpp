#pragma once

// JSON and CSV encodings for models and metric reports.

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "sqlcal/calibrate.hpp"
#include "sqlcal/metrics.hpp"
#include "sqlcal/pipeline/records.hpp"

namespace sqlcal {

inline constexpr const char* kToolkitVersion = "0.1.0";

}  // namespace sqlcal

namespace sqlcal::pipeline {

inline Json to_json(const calibrate::CalibratorModel& m) {
    Json j;
    j["schema_id"] = m.schema_id;
    j["feature_names"] = m.feature_names;
    j["input_indices"] = m.input_indices;
    j["intercept"] = m.intercept;
    j["weights"] = m.weights;
    j["penalty"] = m.penalty;
    j["fit_intercept"] = m.fit_intercept;
    j["feature_means"] = m.feature_means;
    j["feature_scales"] = m.feature_scales;
    j["standardized_weights"] = m.standardized_weights();
    j["diagnostics"] = {{"iterations", m.diagnostics.iterations},
                        {"gradient_inf_norm", m.diagnostics.gradient_inf_norm},
                        {"objective", m.diagnostics.objective},
                        {"warnings", m.diagnostics.warnings}};
    j["toolkit_version"] = kToolkitVersion;
    return j;
}

inline calibrate::CalibratorModel model_from_json(const Json& j) {
    calibrate::CalibratorModel m;
    try {
        m.schema_id = j.at("schema_id").get<std::string>();
        m.intercept = j.at("intercept").get<double>();
        m.weights = j.at("weights").get<std::vector<double>>();
        m.penalty = j.at("penalty").get<double>();
        m.feature_means = j.value("feature_means", std::vector<double>{});
        m.feature_scales = j.value("feature_scales", std::vector<double>{});
        m.fit_intercept = j.value("fit_intercept", true);
        m.feature_names = j.value("feature_names", std::vector<std::string>{});
        if (j.contains("input_indices")) {
            m.input_indices = j.at("input_indices").get<std::vector<std::size_t>>();
        } else {
            m.input_indices.resize(m.weights.size());
            for (std::size_t i = 0; i < m.input_indices.size(); ++i) m.input_indices[i] = i;
        }
        if (j.contains("diagnostics")) {
            const auto& d = j.at("diagnostics");
            m.diagnostics.iterations = d.value("iterations", 0);
            m.diagnostics.gradient_inf_norm = d.value("gradient_inf_norm", 0.0);
            m.diagnostics.objective = d.value("objective", 0.0);
            m.diagnostics.warnings = d.value("warnings", std::vector<std::string>{});
        }
    } catch (const Json::exception& e) {
        throw DataError(std::string("malformed model document: ") + e.what());
    }
    if (m.input_indices.size() != m.weights.size())
        throw DataError("model input_indices and weights differ in length");
    for (double w : m.weights)
        if (!std::isfinite(w)) throw NonFinite("model weights are not finite");
    return m;
}

inline void write_model(const std::string& path, const calibrate::CalibratorModel& m) {
    auto out = detail::open_output(path);
    out << to_json(m).dump(2) << '\n';
}

inline calibrate::CalibratorModel read_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return model_from_json(Json::parse(in));
    } catch (const Json::parse_error& e) {
        throw JsonError(e.byte, e.what());
    }
}

inline Json to_json(const metrics::BinRow& r) {
    return Json{{"bin_index", r.bin_index},   {"lower", r.lower},
                {"upper", r.upper},           {"count", r.count},
                {"mean_score", r.mean_score}, {"empirical_accuracy", r.empirical_accuracy},
                {"bias", r.bias}};
}

inline Json to_json(const metrics::MetricsReport& r) {
    Json j;
    if (r.group) j["group"] = *r.group;
    j["n"] = r.n;
    j["brier"] = r.brier;
    j["ece"] = r.ece;
    j["ace"] = r.ace;
    j["auc"] = r.auc ? Json(*r.auc) : Json(nullptr);
    j["bins_ece"] = Json::array();
    for (const auto& b : r.bins_ece) j["bins_ece"].push_back(to_json(b));
    j["bins_ace"] = Json::array();
    for (const auto& b : r.bins_ace) j["bins_ace"].push_back(to_json(b));
    return j;
}

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline constexpr const char* kReliabilityHeader = "bin_index,lower,upper,count,mean_score,empirical_accuracy,bias";

inline std::string reliability_csv(const std::vector<metrics::BinRow>& rows) {
    std::ostringstream out;
    out << kReliabilityHeader << '\n';
    for (const auto& r : rows) {
        out << r.bin_index << ',' << format_double(r.lower) << ',' << format_double(r.upper) << ',' << r.count << ','
            << format_double(r.mean_score) << ',' << format_double(r.empirical_accuracy) << ','
            << format_double(r.bias) << '\n';
    }
    return out.str();
}

}  // namespace sqlcal::pipeline
