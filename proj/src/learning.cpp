#include "vsig/learning.hpp"

#include "vsig/errors.hpp"
#include "vsig/parallel.hpp"
#include "vsig/tensor.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vsig {

namespace {

constexpr Eigen::Index fold_rows = 256;

}  // namespace

std::vector<std::string> feature_labels(int m, int L) {
    std::vector<std::string> out{"()"};
    for (int n = 1; n <= L; ++n)
        for (std::size_t i = 0; i < ipow(static_cast<std::size_t>(m), n); ++i) out.push_back(Word::from_index(m, n, i).str());
    return out;
}

Eigen::VectorXd RidgeModel::predict(const Eigen::MatrixXd& X) const {
    if (X.cols() != theta.size()) throw std::invalid_argument("feature count does not match model");
    Eigen::VectorXd beta = theta.cwiseQuotient(scale);
    beta(0) = theta(0) - beta.tail(beta.size() - 1).dot(mean.tail(mean.size() - 1));
    return X * beta;
}

double RidgeModel::predict_row(const Eigen::RowVectorXd& x) const { return predict(x)(0); }

RidgeAccumulator::RidgeAccumulator(Eigen::Index features) : p_(features) {
    if (features < 1) throw std::invalid_argument("need at least the constant feature");
    mean_ = Eigen::VectorXd::Zero(p_);
    m2_ = Eigen::VectorXd::Zero(p_);
    R_ = Eigen::MatrixXd::Zero(p_ + 1, p_ + 1);
    pending_.resize(fold_rows, p_ + 1);
}

void RidgeAccumulator::add_row(const Eigen::RowVectorXd& x, double y) {
    if (x.size() != p_) throw std::invalid_argument("feature count does not match accumulator");
    if (x(0) != 1.0) throw std::invalid_argument("first feature must be the constant 1");
    if (!x.allFinite() || !std::isfinite(y)) throw DataError("non-finite feature or target");
    ++n_;
    const Eigen::VectorXd delta = x.transpose() - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta.cwiseProduct(x.transpose() - mean_);
    pending_.row(pending_rows_) << x, y;
    if (++pending_rows_ == fold_rows) flush();
}

void RidgeAccumulator::add(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw std::invalid_argument("row count does not match target count");
    for (Eigen::Index i = 0; i < X.rows(); ++i) add_row(X.row(i), y(i));
}

void RidgeAccumulator::flush() const {
    if (pending_rows_ == 0) return;
    Eigen::MatrixXd stacked(p_ + 1 + pending_rows_, p_ + 1);
    stacked << R_, pending_.topRows(pending_rows_);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(stacked);
    R_ = qr.matrixQR().topRows(p_ + 1).triangularView<Eigen::Upper>();
    pending_rows_ = 0;
}

RidgeModel RidgeAccumulator::solve(double eta, Eigen::Index k) const {
    if (n_ == 0) throw DataError("ridge fit on empty data");
    if (!(eta >= 0.0)) throw std::invalid_argument("eta must be non-negative");
    if (k < 1 || k > p_) throw std::invalid_argument("column prefix out of range");
    flush();
    const double n = static_cast<double>(n_);
    RidgeModel model;
    model.eta = eta;
    model.mean = mean_.head(k);
    model.mean(0) = 0.0;
    model.scale = Eigen::VectorXd::Ones(k);
    for (Eigen::Index j = 1; j < k; ++j) {
        const double sd = std::sqrt(m2_(j) / n);
        if (sd > 1e-12 * (1.0 + std::abs(mean_(j)))) model.scale(j) = sd;
    }
    // [1 X_std] = [1 X] T with T upper triangular, so the factor of the standardized design is R T.
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
    T(0, 0) = 1.0;
    for (Eigen::Index j = 1; j < k; ++j) {
        T(0, j) = -model.mean(j) / model.scale(j);
        T(j, j) = 1.0 / model.scale(j);
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * k - 1, k);
    A.topRows(k) = R_.topLeftCorner(k, k).triangularView<Eigen::Upper>() * T;
    A.bottomRightCorner(k - 1, k - 1).diagonal().setConstant(std::sqrt(n * eta));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * k - 1);
    b.head(k) = R_.block(0, p_, k, 1);
    model.theta = A.completeOrthogonalDecomposition().solve(b);
    return model;
}

RidgeModel ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double eta) {
    if (X.rows() == 0) throw DataError("ridge fit on empty data");
    RidgeAccumulator acc(X.cols());
    acc.add(X, y);
    return acc.solve(eta);
}

void MetricsAccumulator::add(double prediction, double target) {
    ++n_;
    const double e = prediction - target;
    sse_ += e * e;
    const double delta = target - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (target - mean_);
}

void MetricsAccumulator::add(const Eigen::VectorXd& prediction, const Eigen::VectorXd& target) {
    if (prediction.size() != target.size()) throw std::invalid_argument("prediction and target lengths differ");
    for (Eigen::Index i = 0; i < target.size(); ++i) add(prediction(i), target(i));
}

Metrics MetricsAccumulator::result() const {
    if (n_ < 2) throw std::invalid_argument("metrics need at least two observations");
    Metrics m;
    m.mse = sse_ / static_cast<double>(n_);
    if (m2_ > 0.0) m.r2 = 1.0 - sse_ / m2_;
    return m;
}

Metrics metrics(const Eigen::VectorXd& prediction, const Eigen::VectorXd& target) {
    MetricsAccumulator acc;
    acc.add(prediction, target);
    return acc.result();
}

GridResult grid_search(std::size_t candidates, const std::function<double(std::size_t)>& score) {
    if (candidates == 0) throw std::invalid_argument("grid search needs at least one candidate");
    GridResult out;
    out.scores.assign(candidates, std::numeric_limits<double>::quiet_NaN());
    parallel_for(candidates, [&](std::size_t i) { out.scores[i] = score(i); });
    bool found = false;
    for (std::size_t i = 0; i < candidates; ++i) {
        if (!std::isfinite(out.scores[i])) continue;
        if (!found || out.scores[i] < out.scores[out.best]) {
            out.best = i;
            found = true;
        }
    }
    if (!found) throw std::runtime_error("no grid candidate produced a finite score");
    return out;
}

Eigen::RowVectorXd har_regressors(const Eigen::VectorXd& v, std::size_t n, const HarOptions& opts) {
    if (n < har_min_origin) throw DataError("insufficient history for HAR regressors at origin " + std::to_string(n));
    if (n >= static_cast<std::size_t>(v.size())) throw std::out_of_range("HAR origin beyond series");
    const auto i = static_cast<Eigen::Index>(n);
    Eigen::RowVectorXd r(4);
    if (opts.raw_lags)
        r << 1.0, v(i), v(i - 5), v(i - 22);
    else
        r << 1.0, v(i), v.segment(i - 4, 5).mean(), v.segment(i - 21, 22).mean();
    return r;
}

HarResult har_fit_predict(const Eigen::VectorXd& v, int q, const std::vector<std::size_t>& train_origins,
                          const std::vector<std::size_t>& test_origins, const HarOptions& opts) {
    if (q < 1) throw std::invalid_argument("horizon must be positive");
    if (train_origins.empty()) throw DataError("HAR needs training rows");
    Eigen::MatrixXd X(static_cast<Eigen::Index>(train_origins.size()), 4);
    Eigen::VectorXd y(X.rows());
    for (std::size_t r = 0; r < train_origins.size(); ++r) {
        const std::size_t n = train_origins[r];
        if (n + static_cast<std::size_t>(q) >= static_cast<std::size_t>(v.size())) throw DataError("HAR training target beyond series");
        X.row(static_cast<Eigen::Index>(r)) = har_regressors(v, n, opts);
        y(static_cast<Eigen::Index>(r)) = v(static_cast<Eigen::Index>(n) + q);
    }
    HarResult out;
    out.coefficients = X.completeOrthogonalDecomposition().solve(y);
    out.predictions.resize(static_cast<Eigen::Index>(test_origins.size()));
    for (std::size_t r = 0; r < test_origins.size(); ++r)
        out.predictions(static_cast<Eigen::Index>(r)) = har_regressors(v, test_origins[r], opts).dot(out.coefficients);
    return out;
}

nlohmann::json model_to_json(const RidgeModel& model, const std::vector<std::string>& labels) {
    if (labels.size() != static_cast<std::size_t>(model.theta.size())) throw std::invalid_argument("label count does not match model");
    nlohmann::json coeffs = nlohmann::json::array();
    for (std::size_t j = 0; j < labels.size(); ++j) {
        const auto J = static_cast<Eigen::Index>(j);
        coeffs.push_back({{"word", labels[j]}, {"theta", model.theta(J)}, {"mean", model.mean(J)}, {"scale", model.scale(J)}});
    }
    return {{"eta", model.eta}, {"coefficients", coeffs}};
}

}  // namespace vsig
