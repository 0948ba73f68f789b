#pragma once

// Platt scaling and multivariate Platt scaling.
//
// Both are ridge-penalized logistic regression on a held-out calibration
// split. The objective is
//
//   sum_i softplus(z_i) - y_i z_i  +  |w|^2 / (2 C),   z_i = w0 + w . x_i
//
// with C the inverse penalty strength and the intercept w0 unpenalized.
// Features are fit raw; means and standard deviations are kept only to
// report standardized weights.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sqlcal/errors.hpp"
#include "sqlcal/features.hpp"
#include "sqlcal/prob.hpp"

namespace sqlcal::calibrate {

struct LabeledFeatures {
    std::string schema_id;
    std::vector<std::string> feature_names;
    std::vector<std::string> ids;
    Eigen::MatrixXd X;  // n x m
    std::vector<int> y;

    std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(X.cols()); }
};

struct FitOptions {
    double penalty = 1.0;  // inverse penalty strength C
    bool fit_intercept = true;
    double gradient_tolerance = 1e-6;
    int max_iterations = 100;
};

struct FitDiagnostics {
    int iterations = 0;
    double gradient_inf_norm = 0.0;
    double objective = 0.0;
    std::vector<std::string> warnings;
};

struct CalibratorModel {
    std::string schema_id;
    std::vector<std::string> feature_names;
    std::vector<std::size_t> input_indices;  // columns of schema_id vectors fed to the model
    double intercept = 0.0;
    std::vector<double> weights;
    double penalty = 1.0;
    bool fit_intercept = true;
    std::vector<double> feature_means;
    std::vector<double> feature_scales;
    FitDiagnostics diagnostics;

    std::vector<double> standardized_weights() const {
        std::vector<double> out(weights.size());
        for (std::size_t j = 0; j < weights.size(); ++j)
            out[j] = weights[j] * (j < feature_scales.size() ? feature_scales[j] : 1.0);
        return out;
    }

    double linear(std::span<const double> x) const {
        double z = intercept;
        for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * x[j];
        return z;
    }
};

/// Objective and gradient for parameter vector theta = [w0, w1..wm].
/// Exposed so callers (and tests) can audit a fitted model.
inline double penalized_objective(const LabeledFeatures& data, double intercept, const Eigen::VectorXd& w,
                                  double penalty) {
    const Eigen::VectorXd z = (data.X * w).array() + intercept;
    double f = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) f += softplus(z[i]) - data.y[static_cast<std::size_t>(i)] * z[i];
    return f + w.squaredNorm() / (2.0 * penalty);
}

namespace detail {

inline void validate(const LabeledFeatures& data) {
    if (data.rows() == 0) throw EmptyInput("no calibration examples");
    if (data.y.size() != data.rows()) throw LengthMismatch("label count differs from feature rows");
    std::size_t positives = 0;
    for (int v : data.y) {
        if (v != 0 && v != 1) throw DataError("labels must be 0 or 1");
        positives += static_cast<std::size_t>(v);
    }
    if (positives == 0 || positives == data.rows())
        throw SingleClass("calibration labels contain a single class; calibration is undefined");
    if (!data.X.allFinite()) throw NonFinite("feature matrix contains non-finite values");
}

}  // namespace detail

/// Damped Newton from zero initialization. Deterministic for identical inputs.
inline CalibratorModel fit_logistic(const LabeledFeatures& data, const FitOptions& options = {}) {
    detail::validate(data);
    if (!(options.penalty > 0)) throw UsageError("penalty must be positive");

    const auto n = static_cast<Eigen::Index>(data.rows());
    const auto m = static_cast<Eigen::Index>(data.cols());
    const Eigen::Index off = options.fit_intercept ? 1 : 0;
    const Eigen::Index dim = m + off;

    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) yv[i] = data.y[static_cast<std::size_t>(i)];

    CalibratorModel model;
    model.schema_id = data.schema_id;
    model.feature_names = data.feature_names;
    model.penalty = options.penalty;
    model.fit_intercept = options.fit_intercept;
    if (data.rows() < data.cols() + 1)
        model.diagnostics.warnings.push_back("fewer calibration examples than parameters");

    double b = 0.0;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    const double inv_c = 1.0 / options.penalty;

    auto gradient = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& w0) {
        Eigen::VectorXd g(dim);
        const Eigen::VectorXd r = p - yv;
        if (off) g[0] = r.sum();
        g.tail(m) = data.X.transpose() * r + inv_c * w0;
        return g;
    };
    auto probabilities = [&](double b0, const Eigen::VectorXd& w0) {
        Eigen::VectorXd z = (data.X * w0).array() + b0;
        for (Eigen::Index i = 0; i < n; ++i) z[i] = sigmoid(z[i]);
        return z;
    };

    double f = penalized_objective(data, b, w, options.penalty);
    Eigen::VectorXd p = probabilities(b, w);
    Eigen::VectorXd g = gradient(p, w);
    int iter = 0;
    for (; iter < options.max_iterations && g.lpNorm<Eigen::Infinity>() > options.gradient_tolerance; ++iter) {
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
        const Eigen::VectorXd d = (p.array() * (1.0 - p.array())).matrix();
        const Eigen::MatrixXd Xd = data.X.array().colwise() * d.array();
        H.bottomRightCorner(m, m) = data.X.transpose() * Xd;
        H.bottomRightCorner(m, m).diagonal().array() += inv_c;
        if (off) {
            H(0, 0) = d.sum();
            const Eigen::VectorXd cross = Xd.colwise().sum().transpose();
            H.block(1, 0, m, 1) = cross;
            H.block(0, 1, 1, m) = cross.transpose();
        }
        const Eigen::VectorXd step = -H.ldlt().solve(g);

        // Backtracking on the objective; near the optimum the decrease can
        // fall below rounding, in which case the full step is kept when it
        // reduces the gradient.
        double t = 1.0;
        double b_new = b;
        Eigen::VectorXd w_new = w;
        double f_new = f;
        bool accepted = false;
        const double slope = g.dot(step);
        for (int ls = 0; ls < 50; ++ls) {
            b_new = off ? b + t * step[0] : 0.0;
            w_new = w + t * step.tail(m);
            f_new = penalized_objective(data, b_new, w_new, options.penalty);
            if (f_new <= f + 1e-4 * t * slope && f_new < f) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            b_new = off ? b + step[0] : 0.0;
            w_new = w + step.tail(m);
            const Eigen::VectorXd g_new = gradient(probabilities(b_new, w_new), w_new);
            if (g_new.lpNorm<Eigen::Infinity>() >= g.lpNorm<Eigen::Infinity>()) break;
            f_new = penalized_objective(data, b_new, w_new, options.penalty);
        }
        b = b_new;
        w = w_new;
        f = f_new;
        p = probabilities(b, w);
        g = gradient(p, w);
    }

    model.intercept = b;
    model.weights.assign(w.data(), w.data() + m);
    model.diagnostics.iterations = iter;
    model.diagnostics.gradient_inf_norm = g.lpNorm<Eigen::Infinity>();
    model.diagnostics.objective = f;
    if (model.diagnostics.gradient_inf_norm > options.gradient_tolerance)
        model.diagnostics.warnings.push_back("optimizer stopped before reaching the gradient tolerance");
    for (double v : model.weights)
        if (!std::isfinite(v)) throw InvariantViolation("fitted weights are not finite");

    model.feature_means.resize(static_cast<std::size_t>(m));
    model.feature_scales.resize(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) {
        const double mean = data.X.col(j).mean();
        const double var = (data.X.col(j).array() - mean).square().mean();
        model.feature_means[static_cast<std::size_t>(j)] = mean;
        model.feature_scales[static_cast<std::size_t>(j)] = std::sqrt(var);
    }
    model.input_indices.resize(static_cast<std::size_t>(m));
    for (std::size_t j = 0; j < model.input_indices.size(); ++j) model.input_indices[j] = j;
    return model;
}

/// One-column "ps" data from raw probabilities.
inline LabeledFeatures platt_features(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw LengthMismatch("scores and labels differ in length");
    LabeledFeatures data;
    data.schema_id = "ps";
    data.feature_names = {"logit_prob"};
    data.X.resize(static_cast<Eigen::Index>(scores.size()), 1);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) throw DataError("scores must lie in [0, 1]");
        data.X(static_cast<Eigen::Index>(i), 0) = logit(clip_probability(scores[i]));
        data.ids.push_back(std::to_string(i));
    }
    data.y.assign(labels.begin(), labels.end());
    return data;
}

inline void warn_on_non_increasing_slope(CalibratorModel& model) {
    if (!model.weights.empty() && model.weights[0] <= 0)
        model.diagnostics.warnings.push_back("Platt slope is not positive; ranking by calibrated score is reversed");
}

/// sigmoid(w0 + w1 * logit(s)). With fit_intercept = false this is
/// temperature scaling, tau = 1 / w1.
inline CalibratorModel platt_fit(std::span<const double> scores, std::span<const int> labels,
                                 const FitOptions& options = {}) {
    auto model = fit_logistic(platt_features(scores, labels), options);
    warn_on_non_increasing_slope(model);
    return model;
}

inline CalibratorModel mps_fit(const LabeledFeatures& data, const FitOptions& options = {}) {
    return fit_logistic(data, options);
}

/// Calibrated probability for a feature vector laid out under model.schema_id.
inline double apply(const CalibratorModel& model, const FeatureVector& features) {
    if (features.schema_id != model.schema_id)
        throw SchemaMismatch("model expects schema '" + model.schema_id + "', features are '" + features.schema_id +
                             "'");
    double z = model.intercept;
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
        const auto idx = model.input_indices[j];
        if (idx >= features.values.size()) throw SchemaMismatch("feature vector shorter than model inputs");
        z += model.weights[j] * features.values[idx];
    }
    return clip_probability(sigmoid(z));
}

}  // namespace sqlcal::calibrate
