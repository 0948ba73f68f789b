#pragma once

// Brute-force reference implementations used to cross-check the library.
// They share no code with the routines they check beyond the
// SQL parser and clause extraction.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqlcal/sql/ast.hpp"
#include "sqlcal/sql/clauses.hpp"

namespace sqlcal::testkit::oracle {

// --- sub-clause matching ---------------------------------------------------

/// Does `clause` match at every aligned node of two (non-NONE) trees?
inline bool clause_matches(sql::ClauseKind clause, const sql::QueryTree& a, const sql::QueryTree& b) {
    if (a.is_leaf() != b.is_leaf()) return false;
    if (a.is_leaf()) {
        const auto ca = sql::extract_clauses(a.select())[clause];
        const auto cb = sql::extract_clauses(b.select())[clause];
        if (!ca && !cb) return true;
        if (!ca || !cb) return false;
        return *ca == *cb;
    }
    const auto& na = a.set_op();
    const auto& nb = b.set_op();
    const bool straight = clause_matches(clause, *na.left, *nb.left) && clause_matches(clause, *na.right, *nb.right);
    const bool crossed = clause_matches(clause, *na.left, *nb.right) && clause_matches(clause, *na.right, *nb.left);
    return straight || crossed;
}

inline std::vector<int> subquery_matches(const sql::QueryTree* a, const sql::QueryTree* b) {
    std::vector<int> out;
    for (auto c : sql::kAllClauses) {
        if (!a && !b) out.push_back(1);
        else if (!a || !b) out.push_back(0);
        else out.push_back(clause_matches(c, *a, *b) ? 1 : 0);
    }
    return out;
}

struct PairingResult {
    std::vector<int> straight;  // 19 entries
    std::vector<int> crossed;   // 19 entries
    std::vector<int> chosen;
    bool chose_straight = true;
};

/// Evaluates both pairings of the root sub-queries in full and keeps the
/// one with more matches (the straight pairing on ties).
inline PairingResult query_match(const sql::QueryTree& a, const sql::QueryTree& b) {
    auto parts = [](const sql::QueryTree& q) {
        std::optional<sql::SetOp> op;
        const sql::QueryTree* s1 = &q;
        const sql::QueryTree* s2 = nullptr;
        if (!q.is_leaf()) {
            op = q.set_op().op;
            s1 = &*q.set_op().left;
            s2 = &*q.set_op().right;
        }
        return std::make_tuple(op, s1, s2);
    };
    const auto [op_a, a1, a2] = parts(a);
    const auto [op_b, b1, b2] = parts(b);
    const int set_op = op_a == op_b ? 1 : 0;

    PairingResult r;
    r.straight = {set_op};
    for (int v : subquery_matches(a1, b1)) r.straight.push_back(v);
    for (int v : subquery_matches(a2, b2)) r.straight.push_back(v);
    r.crossed = {set_op};
    for (int v : subquery_matches(a1, b2)) r.crossed.push_back(v);
    for (int v : subquery_matches(a2, b1)) r.crossed.push_back(v);
    const int ts = std::accumulate(r.straight.begin(), r.straight.end(), 0);
    const int tc = std::accumulate(r.crossed.begin(), r.crossed.end(), 0);
    r.chose_straight = ts >= tc;
    r.chosen = r.chose_straight ? r.straight : r.crossed;
    return r;
}

// --- metrics ---------------------------------------------------------------

/// Probability that a random positive outranks a random negative, ties 1/2.
inline double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
    double wins = 0.0;
    long pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (y[i] != 1) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j] != 0) continue;
            ++pairs;
            if (s[i] > s[j]) wins += 1.0;
            else if (s[i] == s[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

struct OracleBin {
    std::size_t count = 0;
    double mean_score = 0.0;
    double accuracy = 0.0;
};

inline double weighted_error(const std::vector<OracleBin>& bins, std::size_t n) {
    double total = 0.0;
    for (const auto& b : bins)
        if (b.count) total += static_cast<double>(b.count) / static_cast<double>(n) * std::abs(b.accuracy - b.mean_score);
    return total;
}

inline OracleBin summarize(const std::vector<double>& s, const std::vector<int>& y, const std::vector<std::size_t>& idx) {
    OracleBin b;
    b.count = idx.size();
    if (idx.empty()) return b;
    for (auto i : idx) {
        b.mean_score += s[i];
        b.accuracy += y[i];
    }
    b.mean_score /= static_cast<double>(idx.size());
    b.accuracy /= static_cast<double>(idx.size());
    return b;
}

/// Equal-width bins [i/k, (i+1)/k), last bin closed, by direct membership tests.
inline std::vector<OracleBin> width_bins(const std::vector<double>& s, const std::vector<int>& y, int k) {
    std::vector<OracleBin> out;
    for (int b = 0; b < k; ++b) {
        const double lo = static_cast<double>(b) / k;
        const double hi = static_cast<double>(b + 1) / k;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const bool inside = s[i] >= lo && (s[i] < hi || (b == k - 1 && s[i] <= 1.0));
            if (inside) idx.push_back(i);
        }
        out.push_back(summarize(s, y, idx));
    }
    return out;
}

/// Equal-mass bins: points ordered by (score, index); the first n mod k bins
/// take one extra point.
inline std::vector<OracleBin> mass_bins(const std::vector<double>& s, const std::vector<int>& y, int k) {
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < s.size(); ++i) order.emplace_back(s[i], i);
    std::sort(order.begin(), order.end());
    const std::size_t n = s.size();
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(k));
    std::size_t bin = 0, filled = 0;
    for (const auto& [score, i] : order) {
        const std::size_t cap = n / static_cast<std::size_t>(k) + (bin < n % static_cast<std::size_t>(k) ? 1 : 0);
        while (filled == cap) {
            ++bin;
            filled = 0;
        }
        members[bin].push_back(i);
        ++filled;
    }
    std::vector<OracleBin> out;
    for (const auto& m : members) out.push_back(summarize(s, y, m));
    return out;
}

struct OracleStratum {
    std::vector<std::size_t> members;
    double mean_delta = 0.0;
    double accuracy = 0.0;
};

/// Top (largest delta first) or bottom stratum by sorting (delta, index) keys.
inline OracleStratum shift_stratum(const std::vector<double>& a, const std::vector<double>& b,
                                   const std::vector<int>& y, std::size_t size, bool top) {
    std::vector<std::pair<double, std::size_t>> keys;
    for (std::size_t i = 0; i < a.size(); ++i) keys.emplace_back(top ? -(b[i] - a[i]) : (b[i] - a[i]), i);
    std::sort(keys.begin(), keys.end());
    OracleStratum s;
    for (std::size_t r = 0; r < size; ++r) {
        const auto i = keys[r].second;
        s.members.push_back(i);
        s.mean_delta += b[i] - a[i];
        s.accuracy += y[i];
    }
    if (size) {
        s.mean_delta /= static_cast<double>(size);
        s.accuracy /= static_cast<double>(size);
    }
    return s;
}

// --- logistic regression ---------------------------------------------------

/// Ridge-penalized negative log-likelihood, written out term by term.
inline double objective(const std::vector<std::vector<double>>& X, const std::vector<int>& y, double w0,
                        const std::vector<double>& w, double penalty) {
    double total = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        double z = w0;
        for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * X[i][j];
        const double p = 1.0 / (1.0 + std::exp(-z));
        total -= y[i] ? std::log(p) : std::log(1.0 - p);
    }
    double sq = 0.0;
    for (double v : w) sq += v * v;
    return total + sq / (2.0 * penalty);
}

/// Central finite-difference gradient of objective(), intercept first.
inline std::vector<double> numeric_gradient(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                                            double w0, const std::vector<double>& w, double penalty, double h = 1e-6) {
    std::vector<double> g;
    g.push_back((objective(X, y, w0 + h, w, penalty) - objective(X, y, w0 - h, w, penalty)) / (2 * h));
    for (std::size_t j = 0; j < w.size(); ++j) {
        auto up = w, down = w;
        up[j] += h;
        down[j] -= h;
        g.push_back((objective(X, y, w0, up, penalty) - objective(X, y, w0, down, penalty)) / (2 * h));
    }
    return g;
}

/// Analytic gradient of objective(), intercept first.
inline std::vector<double> analytic_gradient(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                                             double w0, const std::vector<double>& w, double penalty) {
    std::vector<double> g(w.size() + 1, 0.0);
    for (std::size_t i = 0; i < X.size(); ++i) {
        double z = w0;
        for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * X[i][j];
        const double r = 1.0 / (1.0 + std::exp(-z)) - y[i];
        g[0] += r;
        for (std::size_t j = 0; j < w.size(); ++j) g[j + 1] += r * X[i][j];
    }
    for (std::size_t j = 0; j < w.size(); ++j) g[j + 1] += w[j] / penalty;
    return g;
}

/// Plain fixed-step gradient descent; slow but obviously correct.
inline std::pair<double, std::vector<double>> gradient_descent(const std::vector<std::vector<double>>& X,
                                                               const std::vector<int>& y, double penalty,
                                                               double step = 0.05, int iterations = 200000) {
    double w0 = 0.0;
    std::vector<double> w(X.empty() ? 0 : X[0].size(), 0.0);
    for (int it = 0; it < iterations; ++it) {
        const auto g = analytic_gradient(X, y, w0, w, penalty);
        w0 -= step * g[0];
        for (std::size_t j = 0; j < w.size(); ++j) w[j] -= step * g[j + 1];
        double norm = 0.0;
        for (double v : g) norm = std::max(norm, std::abs(v));
        if (norm < 1e-12) break;
    }
    return {w0, w};
}

}  // namespace sqlcal::testkit::oracle
