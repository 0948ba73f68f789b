#pragma once

// Synthetic data with known ground truth. All generators are deterministic
// per seed.
//
//   calibrated  s ~ U(0,1), y ~ Bernoulli(s); "ps" features.
//   platt       logit(s) ~ N(0, 1.5^2), y ~ Bernoulli(sigmoid(w0 + w1 logit(s))).
//   mps-signal  "mps-nucleus" features where nucleus.q1.where carries most of
//               the signal and logit_prob only a little.
//   candidates  candidate-pool JSONL built from a small catalogue of SQL
//               questions with plausible wrong variants.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "sqlcal/features.hpp"
#include "sqlcal/pipeline/records.hpp"
#include "sqlcal/prob.hpp"
#include "sqlcal/sql/canonical.hpp"

namespace sqlcal::pipeline::synth {

using Rng = std::mt19937_64;

struct PlattTruth {
    double intercept = 0.5;
    double slope = 2.0;
};

inline FeatureRecord ps_record(std::size_t i, double score, int label) {
    FeatureRecord r;
    r.id = "syn-" + std::to_string(i);
    r.label = label;
    r.schema_id = "ps";
    r.raw_prob = clip_probability(score);
    r.values = {logit(r.raw_prob)};
    return r;
}

inline std::vector<FeatureRecord> calibrated(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<FeatureRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = unif(rng);
        const int y = unif(rng) < s ? 1 : 0;
        out.push_back(ps_record(i, s, y));
    }
    return out;
}

inline std::vector<FeatureRecord> platt(std::size_t n, std::uint64_t seed, PlattTruth truth = {}) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<FeatureRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = sigmoid(normal(rng));
        const double p = sigmoid(truth.intercept + truth.slope * logit(clip_probability(s)));
        const int y = unif(rng) < p ? 1 : 0;
        out.push_back(ps_record(i, s, y));
    }
    return out;
}

/// Index of the informative feature in mps-signal data (nucleus.q1.where).
inline constexpr std::size_t kSignalFeature = 6;

inline std::vector<FeatureRecord> mps_signal(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal(-0.5, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto schema = FeatureSchema::parse("mps-nucleus");
    std::vector<FeatureRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        FeatureRecord r;
        r.id = "syn-" + std::to_string(i);
        r.schema_id = schema.id();
        r.raw_prob = clip_probability(sigmoid(normal(rng)));
        r.values.assign(schema.size(), 1.0);
        r.values[0] = logit(r.raw_prob);
        r.values[1] = unif(rng) < 0.95 ? 1.0 : 0.0;
        // Clause frequencies are counts out of a pool of ten samples.
        std::binomial_distribution<int> noisy(10, 0.8);
        for (std::size_t c = 2; c <= 10; ++c) r.values[c] = noisy(rng) / 10.0;
        std::binomial_distribution<int> informative(10, unif(rng));
        r.values[kSignalFeature] = informative(rng) / 10.0;
        double product = 1.0;
        for (std::size_t c = 1; c <= scf::kMatchLength; ++c) product *= r.values[c];
        r.values[scf::kMatchLength + 1] = product;
        const double z = -0.3 + 0.5 * r.values[0] + 5.0 * (r.values[kSignalFeature] - 0.5);
        r.label = unif(rng) < sigmoid(z) ? 1 : 0;
        out.push_back(std::move(r));
    }
    return out;
}

// --- candidate pools -------------------------------------------------------

struct QuestionTemplate {
    const char* group;
    const char* gold;                  // "{v}" is replaced by the record's parameter
    std::array<const char*, 4> wrong;  // plausible mistakes
};

inline const std::array<QuestionTemplate, 8>& question_catalogue() {
    static const std::array<QuestionTemplate, 8> catalogue = {{
        {"easy",
         "SELECT name FROM singer WHERE age > {v}",
         {"SELECT name FROM singer WHERE age >= {v}", "SELECT name, age FROM singer WHERE age > {v}",
          "SELECT name FROM singer", "SELECT name FROM singer WHERE age > {v} ORDER BY age"}},
        {"easy",
         "SELECT count(*) FROM concert WHERE year = {v}",
         {"SELECT count(*) FROM concert", "SELECT count(concert_id) FROM concert WHERE year = {v}",
          "SELECT count(*) FROM stadium WHERE year = {v}", "SELEC count(*) FROM concert WHERE year = {v}"}},
        {"easy",
         "SELECT name FROM singer ORDER BY age DESC LIMIT {v}",
         {"SELECT name FROM singer ORDER BY age LIMIT {v}", "SELECT name FROM singer ORDER BY age DESC LIMIT 1",
          "SELECT name, age FROM singer ORDER BY age DESC LIMIT {v}", "SELECT DISTINCT name FROM singer ORDER BY age DESC LIMIT {v}"}},
        {"hard",
         "SELECT T1.name FROM stadium AS T1 JOIN concert AS T2 ON T1.stadium_id = T2.stadium_id WHERE T2.year = {v}",
         {"SELECT T1.name FROM stadium AS T1 JOIN concert AS T2 ON T1.stadium_id = T2.stadium_id",
          "SELECT T2.name FROM stadium AS T1 JOIN concert AS T2 ON T1.stadium_id = T2.stadium_id WHERE T2.year = {v}",
          "SELECT name FROM stadium WHERE year = {v}",
          "SELECT T1.name FROM stadium AS T1 JOIN concert AS T2 ON T1.id = T2.stadium_id WHERE T2.year = {v}"}},
        {"hard",
         "SELECT country, count(*) FROM singer GROUP BY country HAVING count(*) > {v}",
         {"SELECT country FROM singer GROUP BY country HAVING count(*) > {v}",
          "SELECT country, count(*) FROM singer GROUP BY country",
          "SELECT country, count(*) FROM singer WHERE age > {v} GROUP BY country",
          "SELECT country, count(*) FROM singer GROUP BY country HAVING count(*) >= {v}"}},
        {"hard",
         "SELECT pilot_name, age FROM pilotskills WHERE plane_name = 'Piper Cub' AND age > {v} UNION SELECT "
         "pilot_name, age FROM pilotskills WHERE plane_name = 'F-14 Fighter' AND age < 30",
         {"SELECT pilot_name, age FROM pilotskills WHERE plane_name = 'Piper Cub' AND age > {v} OR plane_name = "
          "'F-14 Fighter' AND age < 30",
          "SELECT pilot_name, age FROM pilotskills WHERE plane_name = 'Piper Cub' AND age > {v} INTERSECT SELECT "
          "pilot_name, age FROM pilotskills WHERE plane_name = 'F-14 Fighter' AND age < 30",
          "SELECT pilot_name FROM pilotskills WHERE plane_name = 'Piper Cub' AND age > {v} UNION SELECT pilot_name "
          "FROM pilotskills WHERE plane_name = 'F-14 Fighter' AND age < 30",
          "SELECT pilot_name, age FROM pilotskills WHERE plane_name = 'F-14 Fighter' AND age < 30 UNION SELECT "
          "pilot_name, age FROM pilotskills WHERE plane_name = 'Piper Cub' AND age > {v}"}},
        {"hard",
         "SELECT T1.receiptnumber FROM receipts AS T1 JOIN goods AS T2 ON T1.customerid = T2.id WHERE T2.food = "
         "'Cake' INTERSECT SELECT T1.receiptnumber FROM receipts AS T1 JOIN goods AS T2 ON T1.customerid = T2.id "
         "WHERE T2.food = 'Cookie' LIMIT {v}",
         {"SELECT T1.receiptnumber FROM receipts AS T1 JOIN goods AS T2 ON T1.customerid = T2.id WHERE T2.food = "
          "\"Cake\" INTERSECT SELECT T1.receiptnumber FROM receipts AS T1 JOIN goods AS T2 ON T1.customerid = T2.id "
          "WHERE T2.food = \"Cookie\" LIMIT {v}",
          "SELECT T1.receiptnumber FROM receipts AS T1 JOIN goods AS T2 ON T1.receipt = T2.id WHERE T2.food = "
          "'Cake' AND T2.food = 'Cookie' LIMIT {v}",
          "SELECT receiptnumber FROM receipts WHERE food = 'Cake' INTERSECT SELECT receiptnumber FROM receipts "
          "WHERE food = 'Cookie' LIMIT {v}",
          "SELECT T1.receiptnumber FROM receipts AS T1 JOIN goods AS T2 ON T1.customerid = T2.id WHERE T2.food = "
          "'Cake' UNION SELECT T1.receiptnumber FROM receipts AS T1 JOIN goods AS T2 ON T1.customerid = T2.id "
          "WHERE T2.food = 'Cookie' LIMIT {v}"}},
        {"hard",
         "SELECT DISTINCT name FROM employee WHERE salary > (SELECT avg(salary) FROM employee) AND dept_id = {v} "
         "EXCEPT SELECT name FROM manager",
         {"SELECT name FROM employee WHERE salary > (SELECT avg(salary) FROM employee) AND dept_id = {v} EXCEPT "
          "SELECT name FROM manager",
          "SELECT DISTINCT name FROM employee WHERE salary > (SELECT max(salary) FROM employee) AND dept_id = {v} "
          "EXCEPT SELECT name FROM manager",
          "SELECT DISTINCT name FROM employee WHERE salary > (SELECT avg(salary) FROM employee) AND dept_id = {v}",
          "SELECT DISTINCT name FROM employee WHERE salary > (SELECT avg(salary) FROM employee AND dept_id = {v}"}},
    }};
    return catalogue;
}

namespace detail {

inline std::string fill(std::string text, int v) {
    const std::string token = "{v}";
    for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos))
        text.replace(pos, token.size(), std::to_string(v));
    return text;
}

}  // namespace detail

/// Candidate JSONL records (10 nucleus + 10 beam each). The label is whether
/// the highest-probability parseable candidate matches the gold query.
/// Record 7 is made entirely unparseable to exercise the unusable path.
inline std::vector<Json> candidates(std::size_t n, std::uint64_t seed, std::size_t per_source = 10) {
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> pick_wrong(0, 3);
    std::normal_distribution<double> gold_lp(-2.2, 0.5), wrong_lp(-2.6, 0.7);
    const auto& catalogue = question_catalogue();
    std::vector<Json> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& q = catalogue[i % catalogue.size()];
        const int param = 1 + static_cast<int>(unif(rng) * 40);
        const double p_gold = std::string_view(q.group) == "easy" ? 0.35 + 0.6 * unif(rng) : 0.1 + 0.6 * unif(rng);
        const std::string gold = detail::fill(q.gold, param);
        const std::string gold_canonical = sql::canonicalize(sql::parse_sql(gold));

        Json rec;
        rec["id"] = "q" + std::to_string(i);
        Json cands = Json::array();
        for (const auto* source : {"nucleus", "beam"}) {
            for (std::size_t k = 0; k < per_source; ++k) {
                const bool correct = unif(rng) < p_gold;
                std::string text = correct ? gold : detail::fill(q.wrong[static_cast<std::size_t>(pick_wrong(rng))], param);
                // Confident (easy) questions get higher log-probabilities overall.
                double lp = std::min(-0.01, 2.0 * p_gold + (correct ? gold_lp(rng) : wrong_lp(rng)));
                if (i == 7) text = "SELEC " + text.substr(7);
                // Beam candidates are lowercased to exercise canonical matching.
                const bool has_literal = text.find_first_of("'\"") != std::string::npos;
                if (std::string_view(source) == "beam" && unif(rng) < 0.5 && !has_literal)
                    for (auto& c : text)
                        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
                cands.push_back(Json{{"sql", text}, {"sum_log_prob", lp}, {"source", source}});
            }
        }
        // Label the primary prediction by exact canonical match with the gold query.
        int label = 0;
        double best = -1e300;
        for (const auto& c : cands) {
            try {
                const auto canon = sql::canonicalize(sql::parse_sql(c["sql"].get<std::string>()));
                const double lp = c["sum_log_prob"].get<double>();
                if (lp > best) {
                    best = lp;
                    label = canon == gold_canonical ? 1 : 0;
                }
            } catch (const ParseError&) {
            }
        }
        rec["label"] = label;
        rec["candidates"] = std::move(cands);
        rec["group"] = q.group;
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace sqlcal::pipeline::synth
