#pragma once

#include <algorithm>
#include <cmath>

namespace sqlcal {

/// Probabilities are clipped to [kProbEpsilon, 1 - kProbEpsilon] before logit.
inline constexpr double kProbEpsilon = 1e-12;

inline double clip_probability(double p) { return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon); }

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// Sequence probability exp(sum_log_prob), clipped.
inline double probability_from_log(double sum_log_prob) { return clip_probability(std::exp(sum_log_prob)); }

}  // namespace sqlcal
