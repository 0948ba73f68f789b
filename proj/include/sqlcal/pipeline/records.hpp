#pragma once

// JSONL record types exchanged between pipeline stages.
//
//   candidates  {"id", "label", "candidates": [{"sql", "sum_log_prob", "source"}],
//                "group"?, "extra_features"?}
//   features    {"id", "label", "group"?, "schema_id", "values", "raw_prob"}
//   scored      {"id", "label", "raw_prob", "calibrated_prob", "group"?, "schema_id"}

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sqlcal/errors.hpp"
#include "sqlcal/features.hpp"
#include "sqlcal/sql/parser.hpp"

namespace sqlcal::pipeline {

using Json = nlohmann::ordered_json;

struct Candidate {
    std::string sql;
    double sum_log_prob = 0.0;
    Source source = Source::Nucleus;
    std::optional<sql::QueryTree> tree;  // empty when the SQL failed to parse
    std::string parse_error;

    bool parseable() const { return tree.has_value(); }
};

struct CandidateRecord {
    std::string id;
    int label = 0;
    std::vector<Candidate> candidates;
    std::optional<std::string> group;
    std::map<std::string, double> extra_features;
    std::size_t line = 0;

    /// False when every candidate failed to parse.
    bool usable() const {
        for (const auto& c : candidates)
            if (c.parseable()) return true;
        return false;
    }
};

enum class Scope { Nucleus, Beam, Union };

inline Scope parse_scope(std::string_view s) {
    if (s == "nucleus") return Scope::Nucleus;
    if (s == "beam") return Scope::Beam;
    if (s == "union") return Scope::Union;
    throw UsageError("unknown scope '" + std::string(s) + "' (expected nucleus, beam or union)");
}

inline bool in_scope(Source s, Scope scope) {
    return scope == Scope::Union || (scope == Scope::Nucleus) == (s == Source::Nucleus);
}

/// Highest sum_log_prob among parseable candidates in scope; ties keep the earlier candidate.
inline const Candidate& choose_primary(const CandidateRecord& record, Scope scope) {
    const Candidate* best = nullptr;
    for (const auto& c : record.candidates) {
        if (!c.parseable() || !in_scope(c.source, scope)) continue;
        if (!best || c.sum_log_prob > best->sum_log_prob) best = &c;
    }
    if (!best) throw NoUsableCandidate("record '" + record.id + "' has no parseable candidate in scope");
    return *best;
}

namespace detail {

inline Json parse_line(const std::string& text, std::size_t line) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw JsonError(line, e.what());
    }
}

inline const Json& require(const Json& obj, const char* field, std::size_t line) {
    if (!obj.is_object()) throw SchemaError(line, "", "record is not a JSON object");
    const auto it = obj.find(field);
    if (it == obj.end()) throw SchemaError(line, field, std::string("missing field '") + field + "'");
    return *it;
}

inline std::string require_string(const Json& obj, const char* field, std::size_t line) {
    const auto& v = require(obj, field, line);
    if (!v.is_string()) throw SchemaError(line, field, std::string("field '") + field + "' must be a string");
    return v.get<std::string>();
}

inline double require_number(const Json& obj, const char* field, std::size_t line) {
    const auto& v = require(obj, field, line);
    if (!v.is_number()) throw SchemaError(line, field, std::string("field '") + field + "' must be a number");
    return v.get<double>();
}

inline int require_label(const Json& obj, std::size_t line) {
    const auto& v = require(obj, "label", line);
    if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
    if (v.is_number_integer() && (v.get<long>() == 0 || v.get<long>() == 1)) return static_cast<int>(v.get<long>());
    throw SchemaError(line, "label", "field 'label' must be 0 or 1");
}

inline std::optional<std::string> optional_group(const Json& obj, std::size_t line) {
    const auto it = obj.find("group");
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw SchemaError(line, "group", "field 'group' must be a string");
    return it->get<std::string>();
}

/// Calls fn(text, line_number) for every non-blank line.
inline std::size_t for_each_line(const std::string& path, const std::function<void(const std::string&, std::size_t)>& fn) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string text;
    std::size_t line = 0, records = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++records;
        fn(text, line);
    }
    return records;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    return out;
}

}  // namespace detail

inline CandidateRecord parse_candidate_record(const std::string& text, std::size_t line) {
    const Json obj = detail::parse_line(text, line);
    CandidateRecord r;
    r.line = line;
    r.id = detail::require_string(obj, "id", line);
    r.label = detail::require_label(obj, line);
    const auto& cands = detail::require(obj, "candidates", line);
    if (!cands.is_array() || cands.empty())
        throw SchemaError(line, "candidates", "field 'candidates' must be a non-empty array");
    for (const auto& c : cands) {
        Candidate cand;
        cand.sql = detail::require_string(c, "sql", line);
        cand.sum_log_prob = detail::require_number(c, "sum_log_prob", line);
        if (!std::isfinite(cand.sum_log_prob))
            throw SchemaError(line, "sum_log_prob", "field 'sum_log_prob' must be finite");
        const auto source = parse_source(detail::require_string(c, "source", line));
        if (!source) throw SchemaError(line, "source", "field 'source' must be \"nucleus\" or \"beam\"");
        cand.source = *source;
        try {
            cand.tree = sql::parse_sql(cand.sql);
        } catch (const ParseError& e) {
            cand.parse_error = e.what();
        }
        r.candidates.push_back(std::move(cand));
    }
    r.group = detail::optional_group(obj, line);
    if (const auto it = obj.find("extra_features"); it != obj.end() && !it->is_null()) {
        if (!it->is_object()) throw SchemaError(line, "extra_features", "field 'extra_features' must be an object");
        for (const auto& [k, v] : it->items()) {
            if (!v.is_number()) throw SchemaError(line, "extra_features", "extra feature '" + k + "' must be a number");
            r.extra_features[k] = v.get<double>();
        }
    }
    return r;
}

struct LoadFailure {
    std::size_t line = 0;
    std::string error;
};

struct LoadResult {
    std::vector<CandidateRecord> records;
    std::vector<LoadFailure> failures;  // malformed lines (lenient mode only)
    std::size_t lines = 0;              // non-blank input lines
    std::vector<std::string> warnings;
};

/// Reads a candidate JSONL file. Strict mode throws on the first malformed
/// line; lenient mode records it in failures and keeps going.
inline LoadResult load_candidates(const std::string& path, bool strict = true) {
    LoadResult out;
    out.lines = detail::for_each_line(path, [&](const std::string& text, std::size_t line) {
        try {
            out.records.push_back(parse_candidate_record(text, line));
        } catch (const DataError& e) {
            if (strict) throw;
            out.failures.push_back({line, e.what()});
        }
    });
    if (out.lines == 0) out.warnings.push_back("input '" + path + "' contains no records");
    return out;
}

// --- feature records -------------------------------------------------------

struct FeatureRecord {
    std::string id;
    int label = 0;
    std::optional<std::string> group;
    std::string schema_id;
    std::vector<double> values;
    double raw_prob = 0.5;

    FeatureVector features() const { return {schema_id, values}; }
};

inline Json to_json(const FeatureRecord& r) {
    Json j;
    j["id"] = r.id;
    j["label"] = r.label;
    if (r.group) j["group"] = *r.group;
    j["schema_id"] = r.schema_id;
    j["values"] = r.values;
    j["raw_prob"] = r.raw_prob;
    return j;
}

inline FeatureRecord parse_feature_record(const std::string& text, std::size_t line) {
    const Json obj = detail::parse_line(text, line);
    FeatureRecord r;
    r.id = detail::require_string(obj, "id", line);
    r.label = detail::require_label(obj, line);
    r.group = detail::optional_group(obj, line);
    r.schema_id = detail::require_string(obj, "schema_id", line);
    const auto& vals = detail::require(obj, "values", line);
    if (!vals.is_array()) throw SchemaError(line, "values", "field 'values' must be an array");
    for (const auto& v : vals) {
        if (!v.is_number()) throw SchemaError(line, "values", "field 'values' must hold numbers");
        r.values.push_back(v.get<double>());
    }
    r.raw_prob = detail::require_number(obj, "raw_prob", line);
    const auto schema = FeatureSchema::parse(r.schema_id);
    if (r.values.size() != schema.size())
        throw SchemaError(line, "values",
                          "schema '" + r.schema_id + "' expects " + std::to_string(schema.size()) + " values, got " +
                              std::to_string(r.values.size()));
    return r;
}

/// Reads a feature file; every record must share one schema id.
inline std::vector<FeatureRecord> read_features(const std::string& path) {
    std::vector<FeatureRecord> out;
    detail::for_each_line(path, [&](const std::string& text, std::size_t line) {
        out.push_back(parse_feature_record(text, line));
        if (out.back().schema_id != out.front().schema_id)
            throw SchemaMismatch("line " + std::to_string(line) + ": schema '" + out.back().schema_id +
                                 "' differs from '" + out.front().schema_id + "'");
    });
    return out;
}

inline void write_features(const std::string& path, const std::vector<FeatureRecord>& records) {
    auto out = detail::open_output(path);
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

// --- scored records --------------------------------------------------------

struct ScoredRecord {
    std::string id;
    int label = 0;
    double raw_prob = 0.5;
    double calibrated_prob = 0.5;
    std::optional<std::string> group;
    std::string schema_id;
};

inline Json to_json(const ScoredRecord& r) {
    Json j;
    j["id"] = r.id;
    j["label"] = r.label;
    j["raw_prob"] = r.raw_prob;
    j["calibrated_prob"] = r.calibrated_prob;
    if (r.group) j["group"] = *r.group;
    j["schema_id"] = r.schema_id;
    return j;
}

inline std::vector<ScoredRecord> read_scored(const std::string& path) {
    std::vector<ScoredRecord> out;
    detail::for_each_line(path, [&](const std::string& text, std::size_t line) {
        const Json obj = detail::parse_line(text, line);
        ScoredRecord r;
        r.id = detail::require_string(obj, "id", line);
        r.label = detail::require_label(obj, line);
        r.raw_prob = detail::require_number(obj, "raw_prob", line);
        r.calibrated_prob = detail::require_number(obj, "calibrated_prob", line);
        r.group = detail::optional_group(obj, line);
        r.schema_id = detail::require_string(obj, "schema_id", line);
        out.push_back(std::move(r));
    });
    return out;
}

inline void write_scored(const std::string& path, const std::vector<ScoredRecord>& records) {
    auto out = detail::open_output(path);
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

}  // namespace sqlcal::pipeline
