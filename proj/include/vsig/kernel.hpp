#pragma once

/**
 * @file kernel.hpp
 * @brief Memory kernels K(t,s), matrices from R^d to R^m.
 *
 * Every kernel is held in the separable form K(t,s) = sum_r phi_r(t,s) M_r,
 * which is what the engines consume: a few scalar weight functions and
 * fixed matrices.
 */

#include <Eigen/Core>

#include <json.hpp>

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace vsig {

class Kernel;

struct ConstantKernel {
    Eigen::MatrixXd A;
};

/// (t-s)^(beta-1) / Gamma(beta) * A
struct FractionalKernel {
    double beta;
    Eigen::MatrixXd A;
};

/// alpha * exp(-lambda (t-s)) * I_d
struct ScalarExpKernel {
    double alpha;
    double lambda;
    int d;
};

/// sum_l alpha_l * exp(-lambda_l (t-s)) * I_d
struct DiagSumExpKernel {
    std::vector<double> alpha;
    std::vector<double> lambda;
    int d;
};

/// sum_r (1^T exp(-Lambda (t-s)) b_r) A_r
struct StateSpaceKernel {
    Eigen::MatrixXd Lambda;
    std::vector<Eigen::VectorXd> b;
    std::vector<Eigen::MatrixXd> A;
};

/// Matrix values sampled at increasing lags (first lag 0), linearly interpolated in t-s.
struct TabulatedKernel {
    std::vector<double> lags;
    std::vector<Eigen::MatrixXd> values;
};

/// K(t,s) = base(map(t), map(s)) for an increasing time change map.
struct TimeChangedKernel {
    std::shared_ptr<const Kernel> base;
    std::function<double(double)> map;
};

using KernelSpec = std::variant<ConstantKernel, FractionalKernel, ScalarExpKernel, DiagSumExpKernel, StateSpaceKernel,
                                TabulatedKernel, TimeChangedKernel>;

class Kernel {
public:
    Kernel(KernelSpec spec);

    const KernelSpec& spec() const { return spec_; }
    std::string type_name() const;

    int rows() const { return m_; }
    int cols() const { return d_; }

    /// Matrix value K(t,s), s <= t.
    Eigen::MatrixXd eval(double t, double s) const;

    /// True when K(t,s) depends on t-s only.
    bool stationary() const { return stationary_; }

    /// True when K blows up on the diagonal (fractional with beta < 1).
    bool singular() const;

    std::size_t terms() const { return mats_.size(); }
    const std::vector<Eigen::MatrixXd>& term_matrices() const { return mats_; }

    /// Writes phi_r(t,s) for every term r into out.
    void phi(double t, double s, double* out) const;

    /// Writes the integral of phi_r(tau,u) over u in [a,b] for every term r, b <= tau.
    void phi_integral(double tau, double a, double b, double* out) const;

    /// Finite-state-space form when one exists (constant, scalar and sum-of-exponential kernels included).
    std::optional<StateSpaceKernel> state_space() const;

private:
    void build();

    KernelSpec spec_;
    int m_ = 0;
    int d_ = 0;
    bool stationary_ = true;
    std::vector<Eigen::MatrixXd> mats_;
    // Spectral form of a state-space kernel: phi_r(h) = Re sum_j coef(r,j) exp(-mu_j h).
    Eigen::VectorXcd mu_;
    Eigen::MatrixXcd coef_;
    bool spectral_ = false;
};

/// sup_t ( int_0^t |K(t,s)|_F^p ds )^(1/p) over [0,T].
double linf_p_norm(const Kernel& k, double T, double p, int resolution = 2000);

/// Parses {"type": "...", ...}; d_default fills in "d" for identity-shaped kernels when absent.
Kernel kernel_from_json(const nlohmann::json& j, std::optional<int> d_default = std::nullopt);

nlohmann::json kernel_to_json(const Kernel& k);

}  // namespace vsig
