#pragma once

// Sub-clause frequency (SCF) scoring.
//
// q_match compares two queries at the second level of their trees: the root
// set operation plus nine clause matches for each of the two sub-queries.
// scf_score averages q_match of one query against a pool of sampled queries.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqlcal/errors.hpp"
#include "sqlcal/sql/clauses.hpp"

namespace sqlcal::scf {

using sql::ClauseKind;
using sql::ClauseMap;
using sql::kClauseCount;
using sql::QueryTree;

inline constexpr std::size_t kMatchLength = 1 + 2 * kClauseCount;  // 19

using ClauseMatches = std::array<std::uint8_t, kClauseCount>;
using MatchVector = std::array<std::uint8_t, kMatchLength>;

/// Query tree with clause maps precomputed at the leaves.
struct PreparedQuery {
    std::optional<sql::SetOp> op;      // set for internal nodes
    ClauseMap clauses;                 // leaves only
    std::vector<PreparedQuery> children;  // empty or exactly two

    bool is_leaf() const { return children.empty(); }
};

inline PreparedQuery prepare(const QueryTree& tree) {
    PreparedQuery p;
    if (tree.is_leaf()) {
        p.clauses = sql::extract_clauses(tree.select());
        return p;
    }
    const auto& node = tree.set_op();
    p.op = node.op;
    p.children.push_back(prepare(*node.left));
    p.children.push_back(prepare(*node.right));
    return p;
}

namespace detail {

inline ClauseMatches all(std::uint8_t v) {
    ClauseMatches m;
    m.fill(v);
    return m;
}

inline int total(const ClauseMatches& m) {
    int s = 0;
    for (auto v : m) s += v;
    return s;
}

}  // namespace detail

/// Clause-wise structural match of two non-NONE (sub)queries, evaluated for
/// all nine clause kinds at once. Node pairs align children by whichever of
/// the two pairings matches the clause on both sides; a leaf never matches
/// an internal node.
inline ClauseMatches traverse_and_match_all(const PreparedQuery& a, const PreparedQuery& b) {
    if (a.is_leaf() && b.is_leaf()) {
        ClauseMatches m{};
        for (std::size_t c = 0; c < kClauseCount; ++c)
            m[c] = a.clauses.entries()[c] == b.clauses.entries()[c] ? 1 : 0;
        return m;
    }
    if (a.is_leaf() != b.is_leaf()) return detail::all(0);
    const auto ll = traverse_and_match_all(a.children[0], b.children[0]);
    const auto rr = traverse_and_match_all(a.children[1], b.children[1]);
    const auto lr = traverse_and_match_all(a.children[0], b.children[1]);
    const auto rl = traverse_and_match_all(a.children[1], b.children[0]);
    ClauseMatches m{};
    for (std::size_t c = 0; c < kClauseCount; ++c) m[c] = ((ll[c] & rr[c]) | (lr[c] & rl[c])) ? 1 : 0;
    return m;
}

inline std::uint8_t traverse_and_match(ClauseKind clause, const QueryTree& q1, const QueryTree& q2) {
    return traverse_and_match_all(prepare(q1), prepare(q2))[static_cast<std::size_t>(clause)];
}

/// Sub-query match; a null pointer is the NONE sub-query.
inline ClauseMatches sq_match(const PreparedQuery* q1, const PreparedQuery* q2) {
    if (!q1 && !q2) return detail::all(1);
    if (!q1 || !q2) return detail::all(0);
    return traverse_and_match_all(*q1, *q2);
}

inline ClauseMatches sq_match(const QueryTree* q1, const QueryTree* q2) {
    std::optional<PreparedQuery> p1, p2;
    if (q1) p1 = prepare(*q1);
    if (q2) p2 = prepare(*q2);
    return sq_match(p1 ? &*p1 : nullptr, p2 ? &*p2 : nullptr);
}

struct PreparedDecomposition {
    std::optional<sql::SetOp> set_op;
    const PreparedQuery* subq1;
    const PreparedQuery* subq2;
};

inline PreparedDecomposition decompose(const PreparedQuery& q) {
    if (q.is_leaf()) return {std::nullopt, &q, nullptr};
    return {q.op, &q.children[0], &q.children[1]};
}

/// Which sub-query pairing q_match selected.
enum class Pairing { Straight, Crossed };

struct QueryMatch {
    MatchVector vector;
    Pairing pairing;
};

inline QueryMatch q_match_detailed(const PreparedQuery& qa, const PreparedQuery& qb) {
    const auto a = decompose(qa);
    const auto b = decompose(qb);
    const ClauseMatches s11 = sq_match(a.subq1, b.subq1);
    const ClauseMatches s22 = sq_match(a.subq2, b.subq2);
    const ClauseMatches s12 = sq_match(a.subq1, b.subq2);
    const ClauseMatches s21 = sq_match(a.subq2, b.subq1);

    QueryMatch out{};
    out.vector[0] = a.set_op == b.set_op ? 1 : 0;
    // Ties keep the straight pairing.
    const bool straight = detail::total(s11) + detail::total(s22) >= detail::total(s12) + detail::total(s21);
    out.pairing = straight ? Pairing::Straight : Pairing::Crossed;
    const auto& first = straight ? s11 : s12;
    const auto& second = straight ? s22 : s21;
    for (std::size_t c = 0; c < kClauseCount; ++c) {
        out.vector[1 + c] = first[c];
        out.vector[1 + kClauseCount + c] = second[c];
    }
    return out;
}

inline MatchVector q_match(const PreparedQuery& qa, const PreparedQuery& qb) { return q_match_detailed(qa, qb).vector; }

inline MatchVector q_match(const QueryTree& qa, const QueryTree& qb) { return q_match(prepare(qa), prepare(qb)); }

struct ScfVector {
    std::array<double, kMatchLength> frequencies{};
    double aggregate = 0.0;  // product of the 19 frequencies
};

inline ScfVector scf_score(const PreparedQuery& q, std::span<const PreparedQuery> pool) {
    if (pool.empty()) throw EmptyPool("sub-clause frequency pool is empty");
    std::array<std::size_t, kMatchLength> counts{};
    for (const auto& other : pool) {
        const auto m = q_match(q, other);
        for (std::size_t i = 0; i < kMatchLength; ++i) counts[i] += m[i];
    }
    ScfVector out;
    out.aggregate = 1.0;
    for (std::size_t i = 0; i < kMatchLength; ++i) {
        out.frequencies[i] = static_cast<double>(counts[i]) / static_cast<double>(pool.size());
        out.aggregate *= out.frequencies[i];
    }
    return out;
}

inline ScfVector scf_score(const QueryTree& q, std::span<const QueryTree> pool) {
    std::vector<PreparedQuery> prepared;
    prepared.reserve(pool.size());
    for (const auto& p : pool) prepared.push_back(prepare(p));
    return scf_score(prepare(q), prepared);
}

/// Names of the 19 match positions, e.g. "set_op", "q1.where", "q2.limit".
inline std::array<std::string, kMatchLength> match_names() {
    std::array<std::string, kMatchLength> names;
    names[0] = "set_op";
    for (std::size_t c = 0; c < kClauseCount; ++c) {
        std::string clause(sql::to_string(sql::kAllClauses[c]));
        for (auto& ch : clause) ch = ch == ' ' ? '_' : static_cast<char>(ch - 'A' + 'a');
        names[1 + c] = "q1." + clause;
        names[1 + kClauseCount + c] = "q2." + clause;
    }
    return names;
}

}  // namespace sqlcal::scf
