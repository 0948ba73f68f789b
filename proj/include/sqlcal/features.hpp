#pragma once

// Feature schemas and assembly of calibration feature vectors.
//
//   ps           [logit_prob]                                   1
//   mps-nucleus  [logit_prob] ++ scf(nucleus)                   21
//   mps-beam     [logit_prob] ++ scf(beam)                      21
//   mps-nb       [logit_prob] ++ scf(nucleus) ++ scf(beam)      41
//
// scf(pool) is the 19 match frequencies followed by their product. Extra
// client-supplied scalars append after the standard layout; their names are
// appended to the schema id as "+name" suffixes.

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqlcal/errors.hpp"
#include "sqlcal/prob.hpp"
#include "sqlcal/scf.hpp"

namespace sqlcal {

enum class Source { Nucleus, Beam };

inline std::string_view to_string(Source s) { return s == Source::Nucleus ? "nucleus" : "beam"; }

inline std::optional<Source> parse_source(std::string_view s) {
    if (s == "nucleus") return Source::Nucleus;
    if (s == "beam") return Source::Beam;
    return std::nullopt;
}

inline constexpr std::size_t kScfBlock = scf::kMatchLength + 1;  // 20

struct FeatureSchema {
    std::string base;                   // ps | mps-nucleus | mps-beam | mps-nb
    std::vector<Source> sources;        // pools in layout order
    std::vector<std::string> extras;

    std::string id() const {
        std::string out = base;
        for (const auto& e : extras) out += "+" + e;
        return out;
    }

    std::size_t size() const { return 1 + sources.size() * kScfBlock + extras.size(); }

    std::vector<std::string> feature_names() const {
        std::vector<std::string> names{"logit_prob"};
        const auto match = scf::match_names();
        for (auto src : sources) {
            const std::string prefix = std::string(to_string(src)) + ".";
            for (const auto& m : match) names.push_back(prefix + m);
            names.push_back(prefix + "aggregate");
        }
        for (const auto& e : extras) names.push_back("extra." + e);
        return names;
    }

    static FeatureSchema parse(std::string_view id) {
        FeatureSchema s;
        const auto plus = id.find('+');
        s.base = std::string(id.substr(0, plus));
        if (s.base == "mps-nucleus") s.sources = {Source::Nucleus};
        else if (s.base == "mps-beam") s.sources = {Source::Beam};
        else if (s.base == "mps-nb") s.sources = {Source::Nucleus, Source::Beam};
        else if (s.base != "ps") throw SchemaMismatch("unknown feature schema '" + std::string(id) + "'");
        std::size_t pos = plus;
        while (pos != std::string_view::npos) {
            const auto next = id.find('+', pos + 1);
            auto name = id.substr(pos + 1, next == std::string_view::npos ? next : next - pos - 1);
            if (name.empty()) throw SchemaMismatch("empty extra feature name in schema '" + std::string(id) + "'");
            s.extras.emplace_back(name);
            pos = next;
        }
        return s;
    }

    friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;
};

struct FeatureVector {
    std::string schema_id;
    std::vector<double> values;
};

using Pools = std::map<Source, std::vector<scf::PreparedQuery>>;

inline FeatureVector assemble_features(const scf::PreparedQuery& candidate, double sum_log_prob, const Pools& pools,
                                       const FeatureSchema& schema,
                                       const std::map<std::string, double>& extra_features = {}) {
    FeatureVector out{schema.id(), {}};
    out.values.reserve(schema.size());
    out.values.push_back(logit(probability_from_log(sum_log_prob)));
    for (auto src : schema.sources) {
        const auto it = pools.find(src);
        if (it == pools.end())
            throw SchemaMismatch("schema '" + schema.id() + "' needs a " + std::string(to_string(src)) + " pool");
        const auto scores = scf::scf_score(candidate, it->second);
        out.values.insert(out.values.end(), scores.frequencies.begin(), scores.frequencies.end());
        out.values.push_back(scores.aggregate);
    }
    for (const auto& name : schema.extras) {
        const auto it = extra_features.find(name);
        if (it == extra_features.end()) throw SchemaMismatch("missing extra feature '" + name + "'");
        if (!std::isfinite(it->second)) throw NonFinite("extra feature '" + name + "' is not finite");
        out.values.push_back(it->second);
    }
    return out;
}

inline FeatureVector assemble_features(const sql::QueryTree& candidate, double sum_log_prob,
                                       const std::map<Source, std::vector<sql::QueryTree>>& pools,
                                       const FeatureSchema& schema,
                                       const std::map<std::string, double>& extra_features = {}) {
    Pools prepared;
    for (const auto& [src, trees] : pools) {
        auto& dst = prepared[src];
        for (const auto& t : trees) dst.push_back(scf::prepare(t));
    }
    return assemble_features(scf::prepare(candidate), sum_log_prob, prepared, schema, extra_features);
}

}  // namespace sqlcal
