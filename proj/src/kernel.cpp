#include "vsig/kernel.hpp"

#include "vsig/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vsig {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double gl_nodes[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                                0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr double gl_weights[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                                  0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

/// (1 - exp(-x)) / x, stable near zero.
double one_minus_exp_over(double x) { return std::abs(x) < 1e-12 ? 1.0 - 0.5 * x : -std::expm1(-x) / x; }

std::complex<double> one_minus_exp_over(std::complex<double> x) {
    if (std::abs(x) < 1e-6) return 1.0 - 0.5 * x + x * x / 6.0;
    return (1.0 - std::exp(-x)) / x;
}

void check_lag(double t, double s) {
    if (s > t + 1e-12 * std::max(1.0, std::abs(t))) throw std::invalid_argument("kernel evaluated with s > t");
}

}  // namespace

Kernel::Kernel(KernelSpec spec) : spec_(std::move(spec)) { build(); }

void Kernel::build() {
    std::visit(overloaded{
                   [&](const ConstantKernel& k) {
                       if (k.A.size() == 0) throw std::invalid_argument("constant kernel needs a non-empty matrix");
                       mats_ = {k.A};
                   },
                   [&](const FractionalKernel& k) {
                       if (!(k.beta > 0)) throw std::invalid_argument("fractional kernel requires beta > 0");
                       if (k.A.size() == 0) throw std::invalid_argument("fractional kernel needs a non-empty matrix");
                       mats_ = {k.A};
                   },
                   [&](const ScalarExpKernel& k) {
                       if (k.lambda < 0) throw std::invalid_argument("exponential rate must be non-negative");
                       if (k.d < 1) throw std::invalid_argument("kernel dimension must be positive");
                       mats_ = {Eigen::MatrixXd::Identity(k.d, k.d)};
                   },
                   [&](const DiagSumExpKernel& k) {
                       if (k.alpha.empty() || k.alpha.size() != k.lambda.size())
                           throw std::invalid_argument("sum-of-exponentials needs matching non-empty alpha and lambda");
                       for (double l : k.lambda)
                           if (l < 0) throw std::invalid_argument("exponential rate must be non-negative");
                       if (k.d < 1) throw std::invalid_argument("kernel dimension must be positive");
                       mats_ = {Eigen::MatrixXd::Identity(k.d, k.d)};
                   },
                   [&](const StateSpaceKernel& k) {
                       const auto R = k.Lambda.rows();
                       if (R < 1 || k.Lambda.cols() != R) throw std::invalid_argument("Lambda must be square and non-empty");
                       if (k.b.empty() || k.b.size() != k.A.size()) throw std::invalid_argument("state-space kernel needs matching b and A lists");
                       for (std::size_t r = 0; r < k.b.size(); ++r) {
                           if (k.b[r].size() != R) throw std::invalid_argument("b_r must have length R");
                           if (k.A[r].rows() != k.A[0].rows() || k.A[r].cols() != k.A[0].cols() || k.A[r].size() == 0)
                               throw std::invalid_argument("all A_r must share one non-empty shape");
                       }
                       mats_ = k.A;
                       Eigen::EigenSolver<Eigen::MatrixXd> es(k.Lambda);
                       if (es.info() == Eigen::Success) {
                           const Eigen::MatrixXcd V = es.eigenvectors();
                           Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
                           const auto sv = svd.singularValues();
                           if (sv(sv.size() - 1) > 1e-8 * sv(0)) {
                               const Eigen::MatrixXcd Vinv = V.inverse();
                               const Eigen::RowVectorXcd left = Eigen::RowVectorXcd::Ones(R) * V;
                               mu_ = es.eigenvalues();
                               coef_.resize(static_cast<Eigen::Index>(k.b.size()), R);
                               for (std::size_t r = 0; r < k.b.size(); ++r) {
                                   const Eigen::VectorXcd right = Vinv * k.b[r].cast<std::complex<double>>();
                                   coef_.row(static_cast<Eigen::Index>(r)) = left.cwiseProduct(right.transpose());
                               }
                               spectral_ = true;
                           }
                       }
                   },
                   [&](const TabulatedKernel& k) {
                       if (k.lags.size() < 2 || k.lags.size() != k.values.size())
                           throw std::invalid_argument("tabulated kernel needs at least two matching lags and values");
                       if (k.lags.front() != 0.0) throw std::invalid_argument("tabulated lags must start at 0");
                       for (std::size_t i = 1; i < k.lags.size(); ++i) {
                           if (!(k.lags[i] > k.lags[i - 1])) throw std::invalid_argument("tabulated lags must increase");
                           if (k.values[i].rows() != k.values[0].rows() || k.values[i].cols() != k.values[0].cols())
                               throw std::invalid_argument("tabulated values must share one shape");
                       }
                       const auto m = k.values[0].rows(), d = k.values[0].cols();
                       mats_.clear();
                       for (Eigen::Index j = 0; j < d; ++j)
                           for (Eigen::Index i = 0; i < m; ++i) {
                               Eigen::MatrixXd E = Eigen::MatrixXd::Zero(m, d);
                               E(i, j) = 1.0;
                               mats_.push_back(E);
                           }
                   },
                   [&](const TimeChangedKernel& k) {
                       if (!k.base || !k.map) throw std::invalid_argument("time-changed kernel needs a base kernel and a map");
                       mats_ = k.base->term_matrices();
                       stationary_ = false;
                   },
               },
               spec_);
    m_ = static_cast<int>(mats_.front().rows());
    d_ = static_cast<int>(mats_.front().cols());
}

std::string Kernel::type_name() const {
    return std::visit(overloaded{
                          [](const ConstantKernel&) { return std::string("constant"); },
                          [](const FractionalKernel&) { return std::string("fractional"); },
                          [](const ScalarExpKernel&) { return std::string("scalar_exp"); },
                          [](const DiagSumExpKernel&) { return std::string("diag_sum_exp"); },
                          [](const StateSpaceKernel&) { return std::string("state_space"); },
                          [](const TabulatedKernel&) { return std::string("tabulated"); },
                          [](const TimeChangedKernel&) { return std::string("time_changed"); },
                      },
                      spec_);
}

bool Kernel::singular() const {
    if (auto f = std::get_if<FractionalKernel>(&spec_)) return f->beta < 1.0;
    if (auto tc = std::get_if<TimeChangedKernel>(&spec_)) return tc->base->singular();
    return false;
}

void Kernel::phi(double t, double s, double* out) const {
    check_lag(t, s);
    const double h = std::max(0.0, t - s);
    std::visit(overloaded{
                   [&](const ConstantKernel&) { out[0] = 1.0; },
                   [&](const FractionalKernel& k) {
                       if (h == 0.0) {
                           if (k.beta < 1.0) throw std::domain_error("singular point: fractional kernel on the diagonal");
                           out[0] = k.beta == 1.0 ? 1.0 : 0.0;
                       } else {
                           out[0] = std::pow(h, k.beta - 1.0) / std::tgamma(k.beta);
                       }
                   },
                   [&](const ScalarExpKernel& k) { out[0] = k.alpha * std::exp(-k.lambda * h); },
                   [&](const DiagSumExpKernel& k) {
                       double v = 0.0;
                       for (std::size_t l = 0; l < k.alpha.size(); ++l) v += k.alpha[l] * std::exp(-k.lambda[l] * h);
                       out[0] = v;
                   },
                   [&](const StateSpaceKernel& k) {
                       if (spectral_) {
                           const Eigen::VectorXcd e = (-mu_ * h).array().exp();
                           for (Eigen::Index r = 0; r < coef_.rows(); ++r) out[r] = (coef_.row(r) * e)(0).real();
                       } else {
                           const Eigen::MatrixXd E = (-k.Lambda * h).exp();
                           const Eigen::RowVectorXd left = Eigen::RowVectorXd::Ones(E.rows()) * E;
                           for (std::size_t r = 0; r < k.b.size(); ++r) out[r] = left.dot(k.b[r]);
                       }
                   },
                   [&](const TabulatedKernel& k) {
                       if (h > k.lags.back() * (1.0 + 1e-12)) throw std::out_of_range("lag beyond tabulated range");
                       auto it = std::upper_bound(k.lags.begin(), k.lags.end(), h);
                       std::size_t j = it == k.lags.end() ? k.lags.size() - 2 : static_cast<std::size_t>(it - k.lags.begin()) - 1;
                       j = std::min(j, k.lags.size() - 2);
                       const double w = std::clamp((h - k.lags[j]) / (k.lags[j + 1] - k.lags[j]), 0.0, 1.0);
                       const Eigen::MatrixXd v = (1.0 - w) * k.values[j] + w * k.values[j + 1];
                       std::size_t r = 0;
                       for (Eigen::Index c = 0; c < v.cols(); ++c)
                           for (Eigen::Index i = 0; i < v.rows(); ++i) out[r++] = v(i, c);
                   },
                   [&](const TimeChangedKernel& k) { k.base->phi(k.map(t), k.map(s), out); },
               },
               spec_);
}

void Kernel::phi_integral(double tau, double a, double b, double* out) const {
    if (b < a) throw std::invalid_argument("integration bounds reversed");
    check_lag(tau, b);
    const double len = b - a;
    const double lb = std::max(0.0, tau - b);
    auto quadrature = [&] {
        const std::size_t T = terms();
        std::vector<double> buf(T);
        std::fill(out, out + T, 0.0);
        for (int q = 0; q < 8; ++q) {
            const double u = a + 0.5 * len * (gl_nodes[q] + 1.0);
            phi(tau, u, buf.data());
            for (std::size_t r = 0; r < T; ++r) out[r] += 0.5 * len * gl_weights[q] * buf[r];
        }
    };
    std::visit(overloaded{
                   [&](const ConstantKernel&) { out[0] = len; },
                   [&](const FractionalKernel& k) {
                       out[0] = (std::pow(tau - a, k.beta) - std::pow(lb, k.beta)) / std::tgamma(k.beta + 1.0);
                   },
                   [&](const ScalarExpKernel& k) {
                       out[0] = k.alpha * std::exp(-k.lambda * lb) * len * one_minus_exp_over(k.lambda * len);
                   },
                   [&](const DiagSumExpKernel& k) {
                       double v = 0.0;
                       for (std::size_t l = 0; l < k.alpha.size(); ++l)
                           v += k.alpha[l] * std::exp(-k.lambda[l] * lb) * len * one_minus_exp_over(k.lambda[l] * len);
                       out[0] = v;
                   },
                   [&](const StateSpaceKernel&) {
                       if (!spectral_) return quadrature();
                       Eigen::VectorXcd e(mu_.size());
                       for (Eigen::Index j = 0; j < mu_.size(); ++j)
                           e(j) = std::exp(-mu_(j) * lb) * len * one_minus_exp_over(mu_(j) * len);
                       for (Eigen::Index r = 0; r < coef_.rows(); ++r) out[r] = (coef_.row(r) * e)(0).real();
                   },
                   [&](const TabulatedKernel&) { quadrature(); },
                   [&](const TimeChangedKernel& k) {
                       if (k.base->singular()) throw std::domain_error("product integration of a time-changed singular kernel");
                       quadrature();
                   },
               },
               spec_);
}

Eigen::MatrixXd Kernel::eval(double t, double s) const {
    std::vector<double> w(terms());
    phi(t, s, w.data());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m_, d_);
    for (std::size_t r = 0; r < w.size(); ++r) K += w[r] * mats_[r];
    return K;
}

std::optional<StateSpaceKernel> Kernel::state_space() const {
    return std::visit(overloaded{
                          [](const ConstantKernel& k) -> std::optional<StateSpaceKernel> {
                              return StateSpaceKernel{Eigen::MatrixXd::Zero(1, 1), {Eigen::VectorXd::Ones(1)}, {k.A}};
                          },
                          [](const ScalarExpKernel& k) -> std::optional<StateSpaceKernel> {
                              return StateSpaceKernel{Eigen::MatrixXd::Constant(1, 1, k.lambda),
                                                      {Eigen::VectorXd::Constant(1, k.alpha)},
                                                      {Eigen::MatrixXd::Identity(k.d, k.d)}};
                          },
                          [](const DiagSumExpKernel& k) -> std::optional<StateSpaceKernel> {
                              const auto R = static_cast<Eigen::Index>(k.alpha.size());
                              return StateSpaceKernel{Eigen::VectorXd::Map(k.lambda.data(), R).asDiagonal(),
                                                      {Eigen::VectorXd::Map(k.alpha.data(), R)},
                                                      {Eigen::MatrixXd::Identity(k.d, k.d)}};
                          },
                          [](const StateSpaceKernel& k) -> std::optional<StateSpaceKernel> { return k; },
                          [](const auto&) -> std::optional<StateSpaceKernel> { return std::nullopt; },
                      },
                      spec_);
}

double linf_p_norm(const Kernel& k, double T, double p, int resolution) {
    if (p < 1.0) throw std::invalid_argument("p must be at least 1");
    if (!(T > 0)) throw std::invalid_argument("horizon must be positive");
    if (auto f = std::get_if<FractionalKernel>(&k.spec())) {
        const double e = p * (f->beta - 1.0);
        if (e <= -1.0) throw std::domain_error("divergent integral: p(1-beta) >= 1");
        return f->A.norm() / std::tgamma(f->beta) * std::pow(std::pow(T, 1.0 + e) / (1.0 + e), 1.0 / p);
    }
    const int n = std::max(2, resolution + resolution % 2);
    auto integral_to = [&](double t, int steps) {
        steps += steps % 2;
        const double h = t / steps;
        double acc = 0.0;
        for (int i = 0; i <= steps; ++i) {
            const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += w * std::pow(k.eval(t, t - i * h).norm(), p);
        }
        return acc * h / 3.0;
    };
    if (k.stationary()) return std::pow(integral_to(T, n), 1.0 / p);
    const int outer = std::min(n, 400);
    double best = 0.0;
    for (int j = 1; j <= outer; ++j) best = std::max(best, integral_to(T * j / outer, std::max(2, 2 * j)));
    return std::pow(best, 1.0 / p);
}

namespace {

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("matrix must be a non-empty array of rows");
    if (!j[0].is_array()) {
        Eigen::MatrixXd M(1, static_cast<Eigen::Index>(j.size()));
        for (std::size_t c = 0; c < j.size(); ++c) M(0, static_cast<Eigen::Index>(c)) = j[c].get<double>();
        return M;
    }
    const std::size_t rows = j.size(), cols = j[0].size();
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (j[r].size() != cols) throw ConfigError("ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c) M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
    return M;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

Eigen::MatrixXd coefficient_matrix(const nlohmann::json& j, std::optional<int> d_default) {
    if (j.contains("A")) return matrix_from_json(j.at("A"));
    const double scale = j.value("scale", 1.0);
    int d = j.contains("d") ? j.at("d").get<int>() : d_default.value_or(0);
    if (d < 1) throw ConfigError("kernel needs either \"A\" or a dimension \"d\"");
    return scale * Eigen::MatrixXd::Identity(d, d);
}

int dim_field(const nlohmann::json& j, std::optional<int> d_default) {
    int d = j.contains("d") ? j.at("d").get<int>() : d_default.value_or(0);
    if (d < 1) throw ConfigError("kernel needs a dimension \"d\"");
    return d;
}

}  // namespace

Kernel kernel_from_json(const nlohmann::json& j, std::optional<int> d_default) {
    try {
        const std::string type = j.at("type").get<std::string>();
        if (type == "constant") return Kernel(ConstantKernel{coefficient_matrix(j, d_default)});
        if (type == "fractional")
            return Kernel(FractionalKernel{j.at("beta").get<double>(), coefficient_matrix(j, d_default)});
        if (type == "scalar_exp")
            return Kernel(ScalarExpKernel{j.value("alpha", 1.0), j.at("lambda").get<double>(), dim_field(j, d_default)});
        if (type == "diag_sum_exp")
            return Kernel(DiagSumExpKernel{j.at("alpha").get<std::vector<double>>(), j.at("lambda").get<std::vector<double>>(),
                                           dim_field(j, d_default)});
        if (type == "state_space") {
            StateSpaceKernel k;
            k.Lambda = matrix_from_json(j.at("Lambda"));
            for (const auto& b : j.at("b")) {
                const auto v = b.get<std::vector<double>>();
                k.b.push_back(Eigen::VectorXd::Map(v.data(), static_cast<Eigen::Index>(v.size())));
            }
            for (const auto& a : j.at("A")) k.A.push_back(matrix_from_json(a));
            return Kernel(std::move(k));
        }
        if (type == "tabulated") {
            TabulatedKernel k;
            k.lags = j.at("lags").get<std::vector<double>>();
            for (const auto& v : j.at("values")) k.values.push_back(v.is_number() ? Eigen::MatrixXd::Constant(1, 1, v.get<double>()) : matrix_from_json(v));
            return Kernel(std::move(k));
        }
        throw ConfigError("unknown kernel type \"" + type + "\"");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid kernel block: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid kernel block: ") + e.what());
    }
}

nlohmann::json kernel_to_json(const Kernel& k) {
    return std::visit(overloaded{
                          [](const ConstantKernel& s) -> nlohmann::json { return {{"type", "constant"}, {"A", matrix_to_json(s.A)}}; },
                          [](const FractionalKernel& s) -> nlohmann::json {
                              return {{"type", "fractional"}, {"beta", s.beta}, {"A", matrix_to_json(s.A)}};
                          },
                          [](const ScalarExpKernel& s) -> nlohmann::json {
                              return {{"type", "scalar_exp"}, {"alpha", s.alpha}, {"lambda", s.lambda}, {"d", s.d}};
                          },
                          [](const DiagSumExpKernel& s) -> nlohmann::json {
                              return {{"type", "diag_sum_exp"}, {"alpha", s.alpha}, {"lambda", s.lambda}, {"d", s.d}};
                          },
                          [](const StateSpaceKernel& s) -> nlohmann::json {
                              nlohmann::json b = nlohmann::json::array(), A = nlohmann::json::array();
                              for (const auto& v : s.b) b.push_back(std::vector<double>(v.data(), v.data() + v.size()));
                              for (const auto& a : s.A) A.push_back(matrix_to_json(a));
                              return {{"type", "state_space"}, {"Lambda", matrix_to_json(s.Lambda)}, {"b", b}, {"A", A}};
                          },
                          [](const TabulatedKernel& s) -> nlohmann::json {
                              nlohmann::json v = nlohmann::json::array();
                              for (const auto& m : s.values) v.push_back(matrix_to_json(m));
                              return {{"type", "tabulated"}, {"lags", s.lags}, {"values", v}};
                          },
                          [](const TimeChangedKernel& s) -> nlohmann::json {
                              return {{"type", "time_changed"}, {"base", kernel_to_json(*s.base)}};
                          },
                      },
                      k.spec());
}

}  // namespace vsig
