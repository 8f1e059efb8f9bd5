#pragma once

/**
 * @file learning.hpp
 * @brief Ridge regression on signature features, error metrics, grid search and the HAR benchmark.
 */

#include <Eigen/Core>
#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace vsig {

/// Observations by row; column 0 is the level-0 constant.
struct FeatureMatrix {
    Eigen::MatrixXd X;
    std::vector<std::string> labels;
};

/// Word labels for all words of length 0..L over m letters, in flat order; the empty word is "()".
std::vector<std::string> feature_labels(int m, int L);

struct RidgeModel {
    /// Coefficients on standardized columns; entry 0 is the unpenalized intercept.
    Eigen::VectorXd theta;
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;
    double eta = 0.0;

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
    double predict_row(const Eigen::RowVectorXd& x) const;
};

/**
 * Streaming least squares: keeps the triangular factor of [X | y] and running column moments,
 * so the penalized problem can be re-solved for any eta without revisiting the rows.
 */
class RidgeAccumulator {
public:
    explicit RidgeAccumulator(Eigen::Index features);

    void add(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
    void add_row(const Eigen::RowVectorXd& x, double y);

    Eigen::Index features() const { return p_; }
    std::size_t rows() const { return n_; }

    /// Minimizes mean squared error + eta |theta_{1:}|^2 on standardized columns.
    RidgeModel solve(double eta) const { return solve(eta, p_); }

    /// Same problem restricted to the first `prefix` columns (for flat signature features: a lower truncation level).
    RidgeModel solve(double eta, Eigen::Index prefix) const;

private:
    void flush() const;

    Eigen::Index p_;
    std::size_t n_ = 0;
    Eigen::VectorXd mean_, m2_;
    mutable Eigen::MatrixXd R_;        // (p+1) x (p+1) factor of [X | y]
    mutable Eigen::MatrixXd pending_;  // rows not yet folded into R_
    mutable Eigen::Index pending_rows_ = 0;
};

RidgeModel ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double eta);

struct Metrics {
    double mse = 0.0;
    /// Absent when the targets are constant.
    std::optional<double> r2;
};

Metrics metrics(const Eigen::VectorXd& prediction, const Eigen::VectorXd& target);

/// Streaming form of metrics().
class MetricsAccumulator {
public:
    void add(double prediction, double target);
    void add(const Eigen::VectorXd& prediction, const Eigen::VectorXd& target);
    std::size_t count() const { return n_; }
    Metrics result() const;

private:
    std::size_t n_ = 0;
    double sse_ = 0.0, mean_ = 0.0, m2_ = 0.0;
};

struct GridResult {
    std::size_t best = 0;
    /// Validation MSE for every candidate in order.
    std::vector<double> scores;
};

/// Evaluates every candidate (in parallel); lowest score wins, earliest on ties. Non-finite scores never win.
GridResult grid_search(std::size_t candidates, const std::function<double(std::size_t)>& score);

template <class T>
GridResult grid_search(const std::vector<T>& candidates, const std::function<double(const T&)>& score) {
    return grid_search(candidates.size(), [&](std::size_t i) { return score(candidates[i]); });
}

struct HarOptions {
    /// Use v_{n-5}, v_{n-22} instead of the weekly and monthly means.
    bool raw_lags = false;
};

/// First origin index with enough history for the regressors.
constexpr std::size_t har_min_origin = 22;

/// Regressors (1, v_n, weekly, monthly) at origin n.
Eigen::RowVectorXd har_regressors(const Eigen::VectorXd& v, std::size_t n, const HarOptions& opts = {});

struct HarResult {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd predictions;  // one per test origin
};

/// Least squares (minimum norm) of v_{n+q} on the regressors over train origins, predicted at test origins.
HarResult har_fit_predict(const Eigen::VectorXd& v, int q, const std::vector<std::size_t>& train_origins,
                          const std::vector<std::size_t>& test_origins, const HarOptions& opts = {});

nlohmann::json model_to_json(const RidgeModel& model, const std::vector<std::string>& labels);

}  // namespace vsig
