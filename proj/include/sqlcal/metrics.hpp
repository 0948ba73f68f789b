#pragma once

// Calibration and discrimination metrics: Brier score, l1 calibration error
// over equal-width (ECE) and equal-mass (ACE) bins, Mann-Whitney AUC, and the
// probability-shift strata used to compare two calibrators.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqlcal/errors.hpp"

namespace sqlcal::metrics {

inline constexpr int kDefaultBins = 10;

struct BinRow {
    std::size_t bin_index = 0;
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
    double mean_score = 0.0;
    double empirical_accuracy = 0.0;
    double bias = 0.0;  // empirical_accuracy - mean_score
};

enum class Binning { EqualWidth, EqualMass };

namespace detail {

inline void check_inputs(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw LengthMismatch("scores and labels differ in length");
    if (scores.empty()) throw EmptyInput("no scores to evaluate");
}

inline void check_bins(int k) {
    if (k < 1) throw UsageError("bin count must be at least 1");
}

inline void check_scores(std::span<const double> scores) {
    for (double s : scores)
        if (!(s >= 0.0 && s <= 1.0)) throw DataError("scores must lie in [0, 1]");
}

/// Fills count/means/bias for a row from the member indices.
inline void summarize(BinRow& row, std::span<const double> scores, std::span<const int> labels,
                      std::span<const std::size_t> members) {
    row.count = members.size();
    if (members.empty()) return;
    double s = 0.0, y = 0.0;
    for (auto i : members) {
        s += scores[i];
        y += labels[i];
    }
    row.mean_score = s / static_cast<double>(members.size());
    row.empirical_accuracy = y / static_cast<double>(members.size());
    row.bias = row.empirical_accuracy - row.mean_score;
}

}  // namespace detail

/// Sum over rows of (count / n) * |bias|.
inline double calibration_error(std::span<const BinRow> rows) {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.count;
    if (n == 0) return 0.0;
    double ce = 0.0;
    for (const auto& r : rows) ce += static_cast<double>(r.count) / static_cast<double>(n) * std::abs(r.bias);
    return ce;
}

inline double brier(std::span<const double> scores, std::span<const int> labels) {
    detail::check_inputs(scores, labels);
    detail::check_scores(scores);
    double acc = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double d = labels[i] - scores[i];
        acc += d * d;
    }
    return acc / static_cast<double>(scores.size());
}

/// Index of the equal-width bin [i/k, (i+1)/k) holding s; the last bin is closed.
inline std::size_t equal_width_bin(double s, int k) {
    const double kd = k;
    auto idx = static_cast<long>(std::floor(s * kd));
    idx = std::clamp(idx, 0L, static_cast<long>(k - 1));
    // Align with the stored bounds i/k exactly.
    while (idx > 0 && s < static_cast<double>(idx) / kd) --idx;
    while (idx < k - 1 && s >= static_cast<double>(idx + 1) / kd) ++idx;
    return static_cast<std::size_t>(idx);
}

inline std::vector<BinRow> equal_width_bins(std::span<const double> scores, std::span<const int> labels, int k) {
    detail::check_inputs(scores, labels);
    detail::check_bins(k);
    detail::check_scores(scores);
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < scores.size(); ++i) members[equal_width_bin(scores[i], k)].push_back(i);
    std::vector<BinRow> rows(static_cast<std::size_t>(k));
    for (std::size_t b = 0; b < rows.size(); ++b) {
        rows[b].bin_index = b;
        rows[b].lower = static_cast<double>(b) / k;
        rows[b].upper = static_cast<double>(b + 1) / k;
        detail::summarize(rows[b], scores, labels, members[b]);
    }
    return rows;
}

/// k contiguous groups of the score-sorted data (stable, ties by index). The
/// first n mod k groups hold one extra point. Bounds are the min and max
/// score inside each group.
inline std::vector<BinRow> equal_mass_bins(std::span<const double> scores, std::span<const int> labels, int k) {
    detail::check_inputs(scores, labels);
    detail::check_bins(k);
    detail::check_scores(scores);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
    const std::size_t n = scores.size();
    const std::size_t ku = static_cast<std::size_t>(k);
    std::vector<BinRow> rows(ku);
    std::size_t start = 0;
    for (std::size_t b = 0; b < ku; ++b) {
        const std::size_t size = n / ku + (b < n % ku ? 1 : 0);
        std::span<const std::size_t> members(order.data() + start, size);
        rows[b].bin_index = b;
        if (size > 0) {
            rows[b].lower = scores[members.front()];
            rows[b].upper = scores[members.back()];
        }
        detail::summarize(rows[b], scores, labels, members);
        start += size;
    }
    return rows;
}

struct BinnedError {
    double value = 0.0;
    std::vector<BinRow> bins;
};

inline BinnedError ece(std::span<const double> scores, std::span<const int> labels, int k = kDefaultBins) {
    BinnedError out{0.0, equal_width_bins(scores, labels, k)};
    out.value = calibration_error(out.bins);
    return out;
}

inline BinnedError ace(std::span<const double> scores, std::span<const int> labels, int k = kDefaultBins) {
    BinnedError out{0.0, equal_mass_bins(scores, labels, k)};
    out.value = calibration_error(out.bins);
    return out;
}

inline std::vector<BinRow> reliability_curve(std::span<const double> scores, std::span<const int> labels,
                                             Binning binning, int k = kDefaultBins) {
    return binning == Binning::EqualWidth ? equal_width_bins(scores, labels, k) : equal_mass_bins(scores, labels, k);
}

/// P(score+ > score-) + P(score+ == score-) / 2 via average ranks.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
    detail::check_inputs(scores, labels);
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
    double positive_rank_sum = 0.0;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) {
            if (labels[order[t]] == 1) {
                positive_rank_sum += avg_rank;
                ++positives;
            }
        }
        i = j;
    }
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) throw SingleClass("AUC needs both label classes");
    const double np = static_cast<double>(positives);
    const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
    return u / (np * static_cast<double>(negatives));
}

struct MetricsReport {
    std::size_t n = 0;
    double brier = 0.0;
    double ece = 0.0;
    double ace = 0.0;
    std::optional<double> auc;  // absent when only one class is present
    std::vector<BinRow> bins_ece;
    std::vector<BinRow> bins_ace;
    std::optional<std::string> group;
};

inline MetricsReport evaluate(std::span<const double> scores, std::span<const int> labels, int k = kDefaultBins) {
    MetricsReport r;
    r.n = scores.size();
    r.brier = brier(scores, labels);
    auto e = ece(scores, labels, k);
    auto a = ace(scores, labels, k);
    r.ece = e.value;
    r.ace = a.value;
    r.bins_ece = std::move(e.bins);
    r.bins_ace = std::move(a.bins);
    const auto positives = std::count(labels.begin(), labels.end(), 1);
    if (positives > 0 && static_cast<std::size_t>(positives) < labels.size()) r.auc = auc(scores, labels);
    return r;
}

// --- probability shift -----------------------------------------------------

struct ShiftStratum {
    std::string side;  // "top" (largest increase) or "bottom" (largest decrease)
    double fraction = 0.0;
    std::size_t count = 0;
    double mean_delta = 0.0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double accuracy = 0.0;
    std::vector<std::size_t> members;  // input indices, in stratum order
};

/// ceil(f * n) with a small guard so 0.07 * 100 selects 7 points, not 8.
inline std::size_t stratum_size(double fraction, std::size_t n) {
    const double raw = fraction * static_cast<double>(n);
    return std::min(n, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

/// For each fraction, the top and bottom ceil(f * n) examples ordered by
/// delta = scores_b - scores_a (ties by input index).
inline std::vector<ShiftStratum> compare_shift(std::span<const double> scores_a, std::span<const double> scores_b,
                                               std::span<const int> labels, std::span<const double> fractions) {
    if (scores_a.size() != scores_b.size() || scores_a.size() != labels.size())
        throw LengthMismatch("shift comparison inputs differ in length");
    for (double f : fractions)
        if (!(f > 0.0 && f <= 0.5)) throw UsageError("shift fractions must lie in (0, 0.5]");
    const std::size_t n = scores_a.size();
    std::vector<double> delta(n);
    for (std::size_t i = 0; i < n; ++i) delta[i] = scores_b[i] - scores_a[i];

    std::vector<std::size_t> desc(n), asc(n);
    std::iota(desc.begin(), desc.end(), 0);
    std::iota(asc.begin(), asc.end(), 0);
    std::stable_sort(desc.begin(), desc.end(), [&](auto x, auto y) { return delta[x] > delta[y]; });
    std::stable_sort(asc.begin(), asc.end(), [&](auto x, auto y) { return delta[x] < delta[y]; });

    std::vector<ShiftStratum> out;
    for (double f : fractions) {
        const std::size_t size = stratum_size(f, n);
        for (const auto* side : {"top", "bottom"}) {
            const auto& order = std::string_view(side) == "top" ? desc : asc;
            ShiftStratum s;
            s.side = side;
            s.fraction = f;
            s.count = size;
            s.members.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(size));
            for (auto i : s.members) {
                s.mean_delta += delta[i];
                s.mean_a += scores_a[i];
                s.mean_b += scores_b[i];
                s.accuracy += labels[i];
            }
            if (size > 0) {
                const double d = static_cast<double>(size);
                s.mean_delta /= d;
                s.mean_a /= d;
                s.mean_b /= d;
                s.accuracy /= d;
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace sqlcal::metrics
