#pragma once

// Orchestration behind the sqlcal subcommands. Every command reads and
// writes files only; per-record problems are counted, never fatal.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sqlcal/calibrate.hpp"
#include "sqlcal/features.hpp"
#include "sqlcal/metrics.hpp"
#include "sqlcal/pipeline/records.hpp"
#include "sqlcal/pipeline/serialize.hpp"
#include "sqlcal/pipeline/synth.hpp"
#include "sqlcal/scf.hpp"
#include "sqlcal/sql/clauses.hpp"

namespace sqlcal::pipeline {

// --- parse -----------------------------------------------------------------

inline Json clause_map_json(const sql::ClauseMap& m) {
    Json j;
    for (auto c : sql::kAllClauses) j[std::string(sql::to_string(c))] = m[c] ? Json(*m[c]) : Json("NONE");
    return j;
}

/// Clause maps of every leaf under a sub-query, left to right.
inline void collect_leaves(const sql::QueryTree& tree, Json& out) {
    if (tree.is_leaf()) {
        out.push_back(clause_map_json(sql::extract_clauses(tree.select())));
        return;
    }
    collect_leaves(*tree.set_op().left, out);
    collect_leaves(*tree.set_op().right, out);
}

inline Json parse_command(const std::string& text) {
    const sql::QueryBox tree(sql::parse_sql(text));
    const auto d = sql::decompose(tree);
    auto sub = [](const sql::QueryBox& q) {
        if (!q) return Json("NONE");
        Json leaves = Json::array();
        collect_leaves(*q, leaves);
        return Json{{"sql", sql::canonicalize(*q)}, {"leaves", leaves}};
    };
    Json j;
    j["canonical"] = sql::canonicalize(*tree);
    j["set_op"] = d.set_op ? Json(std::string(sql::to_string(*d.set_op))) : Json("NONE");
    j["subq1"] = sub(d.subq1);
    j["subq2"] = sub(d.subq2);
    return j;
}

// --- featurize -------------------------------------------------------------

struct FeaturizeOptions {
    std::string input;
    std::string output;
    std::string schema = "mps-nb";
    std::string scope = "union";
    std::size_t pool_size = 0;  // keep only the first k samples per source; 0 keeps all
    unsigned threads = 0;       // 0 = hardware concurrency
};

struct RecordFailure {
    std::size_t line = 0;
    std::string id;
    std::string error;
};

struct FeaturizeSummary {
    std::size_t lines = 0;
    std::size_t used = 0;
    std::size_t unusable = 0;
    std::size_t failed = 0;
    std::size_t candidates = 0;
    std::size_t unparseable_candidates = 0;
    std::vector<RecordFailure> failures;
    std::vector<std::string> warnings;
    std::vector<FeatureRecord> records;
};

inline CandidateRecord truncate_pools(const CandidateRecord& r, std::size_t k) {
    if (k == 0) return r;
    CandidateRecord out = r;
    out.candidates.clear();
    std::map<Source, std::size_t> taken;
    for (const auto& c : r.candidates)
        if (taken[c.source]++ < k) out.candidates.push_back(c);
    return out;
}

inline FeatureRecord featurize_record(const CandidateRecord& record, const FeatureSchema& schema, Scope scope) {
    const Candidate& primary = choose_primary(record, scope);
    Pools pools;
    for (auto src : schema.sources) {
        auto& pool = pools[src];
        for (const auto& c : record.candidates)
            if (c.source == src && c.parseable()) pool.push_back(scf::prepare(*c.tree));
        if (pool.empty())
            throw EmptyPool("record '" + record.id + "' has no parseable " + std::string(to_string(src)) +
                            " candidates");
    }
    FeatureRecord out;
    out.id = record.id;
    out.label = record.label;
    out.group = record.group;
    out.raw_prob = probability_from_log(primary.sum_log_prob);
    out.values =
        assemble_features(scf::prepare(*primary.tree), primary.sum_log_prob, pools, schema, record.extra_features)
            .values;
    out.schema_id = schema.id();
    return out;
}

inline FeaturizeSummary featurize_command(const FeaturizeOptions& opts) {
    const auto schema = FeatureSchema::parse(opts.schema);
    const auto scope = parse_scope(opts.scope);
    auto loaded = load_candidates(opts.input, /*strict=*/false);

    FeaturizeSummary summary;
    summary.lines = loaded.lines;
    summary.warnings = loaded.warnings;
    for (const auto& f : loaded.failures) summary.failures.push_back({f.line, "", f.error});

    std::vector<CandidateRecord> records;
    records.reserve(loaded.records.size());
    for (const auto& r : loaded.records) records.push_back(truncate_pools(r, opts.pool_size));

    std::vector<std::optional<FeatureRecord>> results(records.size());
    std::vector<std::string> errors(records.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < records.size(); i = next++) {
            if (!records[i].usable()) continue;
            try {
                results[i] = featurize_record(records[i], schema, scope);
            } catch (const DataError& e) {
                errors[i] = e.what();
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned n_threads = std::clamp<unsigned>(opts.threads ? opts.threads : hw, 1u,
                                                    static_cast<unsigned>(std::max<std::size_t>(1, records.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::size_t positive = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (const auto& c : records[i].candidates) {
            ++summary.candidates;
            if (!c.parseable()) ++summary.unparseable_candidates;
            if (c.sum_log_prob > 0.0) ++positive;
        }
        if (!records[i].usable()) {
            ++summary.unusable;
        } else if (results[i]) {
            ++summary.used;
            summary.records.push_back(std::move(*results[i]));
        } else {
            summary.failures.push_back({records[i].line, records[i].id, errors[i]});
        }
    }
    if (positive)
        summary.warnings.push_back(std::to_string(positive) +
                                   " candidates have sum_log_prob > 0; their probabilities are clipped");
    summary.failed = summary.failures.size();
    std::sort(summary.failures.begin(), summary.failures.end(),
              [](const auto& a, const auto& b) { return a.line < b.line; });
    if (summary.used + summary.unusable + summary.failed != summary.lines)
        throw InvariantViolation("featurize lost track of input records");

    write_features(opts.output, summary.records);

    Json report;
    report["input"] = opts.input;
    report["schema_id"] = schema.id();
    report["records"] = summary.lines;
    report["used"] = summary.used;
    report["unusable"] = summary.unusable;
    report["failed"] = summary.failed;
    report["candidates"] = summary.candidates;
    report["unparseable_candidates"] = summary.unparseable_candidates;
    report["warnings"] = summary.warnings;
    report["failures"] = Json::array();
    for (const auto& f : summary.failures)
        report["failures"].push_back(Json{{"line", f.line}, {"id", f.id}, {"error", f.error}});
    report["unparseable"] = Json::array();
    for (const auto& r : records)
        for (std::size_t k = 0; k < r.candidates.size(); ++k)
            if (!r.candidates[k].parseable())
                report["unparseable"].push_back(
                    Json{{"id", r.id}, {"candidate", k}, {"error", r.candidates[k].parse_error}});
    auto out = detail::open_output(opts.output + ".report.json");
    out << report.dump(2) << '\n';
    return summary;
}

// --- fit -------------------------------------------------------------------

inline bool glob_match(std::string_view pattern, std::string_view text) {
    if (pattern.empty()) return text.empty();
    if (pattern[0] == '*') {
        for (std::size_t i = 0; i <= text.size(); ++i)
            if (glob_match(pattern.substr(1), text.substr(i))) return true;
        return false;
    }
    return !text.empty() && pattern[0] == text[0] && glob_match(pattern.substr(1), text.substr(1));
}

/// Resolves a feature mask to column indices. Plain selectors keep matching
/// features, "!" selectors drop them; a mask of only drops starts from all
/// features. Selectors may use '*' wildcards.
inline std::vector<std::size_t> resolve_mask(const std::vector<std::string>& names,
                                             const std::vector<std::string>& mask) {
    std::vector<bool> keep(names.size(), true);
    const bool any_positive =
        std::any_of(mask.begin(), mask.end(), [](const auto& s) { return !s.empty() && s[0] != '!'; });
    if (any_positive) std::fill(keep.begin(), keep.end(), false);
    for (const auto& sel : mask) {
        if (sel.empty()) continue;
        const bool drop = sel[0] == '!';
        const std::string_view pattern = drop ? std::string_view(sel).substr(1) : std::string_view(sel);
        bool matched = false;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (glob_match(pattern, names[i])) {
                if (!drop) keep[i] = true;
                matched = true;
            }
        }
        if (!matched) throw UsageError("mask selector '" + sel + "' matches no feature");
        if (drop)
            for (std::size_t i = 0; i < names.size(); ++i)
                if (glob_match(pattern, names[i])) keep[i] = false;
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < names.size(); ++i)
        if (keep[i]) out.push_back(i);
    if (out.empty()) throw UsageError("feature mask removes every feature");
    return out;
}

struct FitCommandOptions {
    std::string input;
    std::string output;
    std::string method = "mps";  // ps | mps
    double penalty = 1.0;
    std::vector<std::string> mask;
    std::optional<double> subsample_fraction;
    std::optional<std::size_t> subsample_count;
    std::uint64_t seed = 0;
    bool temperature = false;  // ps only: intercept fixed at 0
};

/// Indices of a without-replacement subsample, in original order.
inline std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(n, k));
    std::sort(idx.begin(), idx.end());
    return idx;
}

inline calibrate::LabeledFeatures build_training_data(const std::vector<FeatureRecord>& records,
                                                      const std::vector<std::size_t>& rows,
                                                      const std::vector<std::size_t>& cols,
                                                      const std::vector<std::string>& all_names) {
    calibrate::LabeledFeatures data;
    data.schema_id = records.empty() ? "" : records.front().schema_id;
    for (auto c : cols) data.feature_names.push_back(all_names[c]);
    data.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = records[rows[i]];
        data.ids.push_back(r.id);
        data.y.push_back(r.label);
        for (std::size_t j = 0; j < cols.size(); ++j)
            data.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r.values[cols[j]];
    }
    return data;
}

inline calibrate::CalibratorModel fit_records(const std::vector<FeatureRecord>& records, const FitCommandOptions& opts) {
    if (records.empty()) throw EmptyInput("feature file has no records");
    if (opts.method != "ps" && opts.method != "mps")
        throw UsageError("unknown method '" + opts.method + "' (expected ps or mps)");
    if (opts.temperature && opts.method != "ps") throw UsageError("temperature scaling applies to method ps only");
    const auto schema = FeatureSchema::parse(records.front().schema_id);
    const auto names = schema.feature_names();

    std::vector<std::size_t> cols;
    if (opts.method == "ps") {
        cols = opts.mask.empty() ? std::vector<std::size_t>{0} : resolve_mask(names, opts.mask);
        if (cols != std::vector<std::size_t>{0})
            throw UsageError("method ps uses logit_prob only; the mask selects other features");
    } else {
        cols = opts.mask.empty() ? std::vector<std::size_t>(names.size()) : resolve_mask(names, opts.mask);
        if (opts.mask.empty()) std::iota(cols.begin(), cols.end(), 0);
    }

    std::vector<std::size_t> rows(records.size());
    std::iota(rows.begin(), rows.end(), 0);
    if (opts.subsample_fraction || opts.subsample_count) {
        if (opts.subsample_fraction && opts.subsample_count)
            throw UsageError("use either a subsample fraction or a subsample count");
        std::size_t k = 0;
        if (opts.subsample_fraction) {
            const double f = *opts.subsample_fraction;
            if (!(f > 0.0 && f <= 1.0)) throw UsageError("subsample fraction must lie in (0, 1]");
            k = static_cast<std::size_t>(std::llround(f * static_cast<double>(records.size())));
        } else {
            k = *opts.subsample_count;
        }
        if (k == 0) throw UsageError("subsample is empty");
        rows = subsample_indices(records.size(), k, opts.seed);
    }

    const auto data = build_training_data(records, rows, cols, names);
    calibrate::FitOptions fit;
    fit.penalty = opts.penalty;
    fit.fit_intercept = !opts.temperature;
    auto model = calibrate::fit_logistic(data, fit);
    model.input_indices = cols;
    if (opts.method == "ps") calibrate::warn_on_non_increasing_slope(model);
    return model;
}

inline calibrate::CalibratorModel fit_command(const FitCommandOptions& opts) {
    auto model = fit_records(read_features(opts.input), opts);
    write_model(opts.output, model);
    return model;
}

/// Human-readable weight table, largest standardized magnitude first.
inline std::string weight_table(const calibrate::CalibratorModel& m) {
    const auto std_w = m.standardized_weights();
    std::vector<std::size_t> order(m.weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return std::abs(std_w[a]) > std::abs(std_w[b]); });
    std::ostringstream out;
    out << std::left << std::setw(26) << "feature" << std::right << std::setw(14) << "weight" << std::setw(16)
        << "standardized" << '\n';
    out << std::left << std::setw(26) << "(intercept)" << std::right << std::setw(14) << std::setprecision(6)
        << m.intercept << '\n';
    for (auto j : order) {
        const std::string name = j < m.feature_names.size() ? m.feature_names[j] : "x" + std::to_string(j);
        out << std::left << std::setw(26) << name << std::right << std::setw(14) << m.weights[j] << std::setw(16)
            << std_w[j] << '\n';
    }
    return out.str();
}

// --- evaluate / apply ------------------------------------------------------

inline std::vector<ScoredRecord> score_records(const std::vector<FeatureRecord>& records,
                                               const std::optional<calibrate::CalibratorModel>& model) {
    std::vector<ScoredRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        ScoredRecord s;
        s.id = r.id;
        s.label = r.label;
        s.group = r.group;
        s.schema_id = r.schema_id;
        s.raw_prob = clip_probability(r.raw_prob);
        s.calibrated_prob = model ? calibrate::apply(*model, r.features()) : s.raw_prob;
        out.push_back(std::move(s));
    }
    return out;
}

struct EvaluateOptions {
    std::string input;
    std::optional<std::string> model;
    std::string output;  // directory
    int bins = metrics::kDefaultBins;
    std::optional<std::string> group_by;
};

struct EvaluationResult {
    metrics::MetricsReport overall;
    std::vector<metrics::MetricsReport> groups;
    std::vector<ScoredRecord> scored;
};

inline EvaluationResult evaluate_scored(const std::vector<ScoredRecord>& scored, int bins, bool by_group) {
    EvaluationResult res;
    res.scored = scored;
    std::vector<double> s;
    std::vector<int> y;
    for (const auto& r : scored) {
        s.push_back(r.calibrated_prob);
        y.push_back(r.label);
    }
    res.overall = metrics::evaluate(s, y, bins);
    if (by_group) {
        std::map<std::string, std::pair<std::vector<double>, std::vector<int>>> groups;
        for (const auto& r : scored) {
            auto& g = groups[r.group.value_or("")];
            g.first.push_back(r.calibrated_prob);
            g.second.push_back(r.label);
        }
        for (const auto& [name, data] : groups) {
            auto rep = metrics::evaluate(data.first, data.second, bins);
            rep.group = name;
            res.groups.push_back(std::move(rep));
        }
    }
    return res;
}

inline std::string file_safe(const std::string& name) {
    std::string out = name.empty() ? "_none" : name;
    for (auto& c : out)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    return out;
}

inline EvaluationResult evaluate_command(const EvaluateOptions& opts) {
    if (opts.group_by && *opts.group_by != "group")
        throw UsageError("records can only be grouped by 'group'");
    const auto records = read_features(opts.input);
    if (records.empty()) throw EmptyInput("feature file has no records");
    std::optional<calibrate::CalibratorModel> model;
    if (opts.model) model = read_model(*opts.model);
    auto res = evaluate_scored(score_records(records, model), opts.bins, opts.group_by.has_value());

    namespace fs = std::filesystem;
    fs::create_directories(opts.output);
    const fs::path dir(opts.output);
    Json report;
    report["input"] = opts.input;
    report["model"] = opts.model ? Json(*opts.model) : Json("uncalibrated");
    report["schema_id"] = records.front().schema_id;
    report["bins"] = opts.bins;
    report["overall"] = to_json(res.overall);
    if (opts.group_by) {
        report["groups"] = Json::array();
        for (const auto& g : res.groups) report["groups"].push_back(to_json(g));
    }
    detail::open_output((dir / "report.json").string()) << report.dump(2) << '\n';
    detail::open_output((dir / "reliability_ece.csv").string()) << reliability_csv(res.overall.bins_ece);
    detail::open_output((dir / "reliability_ace.csv").string()) << reliability_csv(res.overall.bins_ace);
    for (const auto& g : res.groups) {
        const auto tag = file_safe(*g.group);
        detail::open_output((dir / ("reliability_ece." + tag + ".csv")).string()) << reliability_csv(g.bins_ece);
        detail::open_output((dir / ("reliability_ace." + tag + ".csv")).string()) << reliability_csv(g.bins_ace);
    }
    write_scored((dir / "scored.jsonl").string(), res.scored);
    return res;
}

inline std::vector<ScoredRecord> apply_command(const std::string& input, const std::string& model_path,
                                               const std::string& output) {
    const auto scored = score_records(read_features(input), read_model(model_path));
    write_scored(output, scored);
    return scored;
}

// --- compare ---------------------------------------------------------------

inline const std::vector<double> kDefaultFractions = {0.01, 0.05, 0.10, 0.20};

struct CompareResult {
    std::vector<std::string> ids;  // joined order (file a)
    std::vector<metrics::ShiftStratum> strata;
};

inline CompareResult compare_scored(const std::vector<ScoredRecord>& a, const std::vector<ScoredRecord>& b,
                                    const std::vector<double>& fractions) {
    std::map<std::string, const ScoredRecord*> by_id;
    for (const auto& r : b) by_id[r.id] = &r;
    std::map<std::string, bool> in_a;
    for (const auto& r : a) in_a[r.id] = true;
    std::vector<std::string> missing;
    for (const auto& r : a)
        if (!by_id.count(r.id)) missing.push_back(r.id);
    for (const auto& r : b)
        if (!in_a.count(r.id)) missing.push_back(r.id);
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size(); ++i) list += (i ? ", " : "") + missing[i];
        throw IdMismatch("ids present in only one scored file: " + list);
    }
    CompareResult out;
    std::vector<double> sa, sb;
    std::vector<int> y;
    for (const auto& r : a) {
        const auto* other = by_id.at(r.id);
        if (other->label != r.label) throw DataError("record '" + r.id + "' has different labels in the two files");
        out.ids.push_back(r.id);
        sa.push_back(r.calibrated_prob);
        sb.push_back(other->calibrated_prob);
        y.push_back(r.label);
    }
    out.strata = metrics::compare_shift(sa, sb, y, fractions);
    return out;
}

inline CompareResult compare_command(const std::string& input_a, const std::string& input_b,
                                     const std::string& output, const std::vector<double>& fractions) {
    auto res = compare_scored(read_scored(input_a), read_scored(input_b), fractions);
    Json j;
    j["baseline"] = input_a;
    j["candidate"] = input_b;
    j["n"] = res.ids.size();
    j["strata"] = Json::array();
    for (const auto& s : res.strata) {
        Json ids = Json::array();
        for (auto i : s.members) ids.push_back(res.ids[i]);
        j["strata"].push_back(Json{{"side", s.side},
                                   {"fraction", s.fraction},
                                   {"count", s.count},
                                   {"mean_delta", s.mean_delta},
                                   {"mean_baseline", s.mean_a},
                                   {"mean_candidate", s.mean_b},
                                   {"accuracy", s.accuracy},
                                   {"ids", ids}});
    }
    detail::open_output(output) << j.dump(2) << '\n';
    return res;
}

// --- synth -----------------------------------------------------------------

struct SynthOptions {
    std::string mode = "calibrated";  // calibrated | platt | mps-signal | candidates
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    std::string output;
};

inline void synth_command(const SynthOptions& opts) {
    if (opts.n == 0) throw UsageError("n must be at least 1");
    if (opts.mode == "calibrated") {
        write_features(opts.output, synth::calibrated(opts.n, opts.seed));
    } else if (opts.mode == "platt") {
        const synth::PlattTruth truth;
        write_features(opts.output, synth::platt(opts.n, opts.seed, truth));
        detail::open_output(opts.output + ".truth.json")
            << Json{{"mode", "platt"}, {"intercept", truth.intercept}, {"slope", truth.slope}, {"seed", opts.seed}}
                   .dump(2)
            << '\n';
    } else if (opts.mode == "mps-signal") {
        write_features(opts.output, synth::mps_signal(opts.n, opts.seed));
        const auto names = FeatureSchema::parse("mps-nucleus").feature_names();
        detail::open_output(opts.output + ".truth.json")
            << Json{{"mode", "mps-signal"},
                    {"informative_feature", names[synth::kSignalFeature]},
                    {"informative_index", synth::kSignalFeature},
                    {"seed", opts.seed}}
                   .dump(2)
            << '\n';
    } else if (opts.mode == "candidates") {
        auto out = detail::open_output(opts.output);
        for (const auto& rec : synth::candidates(opts.n, opts.seed)) out << rec.dump() << '\n';
    } else {
        throw UsageError("unknown synth mode '" + opts.mode + "'");
    }
}

}  // namespace sqlcal::pipeline
