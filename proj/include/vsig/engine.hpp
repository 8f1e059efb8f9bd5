#pragma once

/**
 * @file engine.hpp
 * @brief Volterra signatures for general kernels.
 *
 * Level n+1 of the diagonal field at node t integrates
 * u -> D^(n)[u] (x) K(t,u) dx_u over [0,t]. With piecewise-constant
 * derivatives every such integral is a weighted sum over grid nodes, so one
 * level of the whole field is a lower-triangular matrix product.
 */

#include "vsig/kernel.hpp"
#include "vsig/path.hpp"
#include "vsig/tensor.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <vector>

namespace vsig {

enum class QuadratureRule { left, trapezoid, product_integration };

struct QuadratureConfig {
    QuadratureRule rule = QuadratureRule::trapezoid;
    /// Each segment is split into this many equal pieces before integrating; results stay on the original nodes.
    int refinement = 1;
};

/// VSig^{t_i}_{0,t_i} for every node t_i, stored level by level as (nodes x m^n) matrices.
class DiagonalSignatureField {
public:
    DiagonalSignatureField(TimeGrid grid, int m, std::vector<Eigen::MatrixXd> levels);

    const TimeGrid& grid() const { return grid_; }
    int alphabet() const { return m_; }
    int depth() const { return static_cast<int>(levels_.size()) - 1; }
    std::size_t nodes() const { return grid_.nodes(); }

    const Eigen::MatrixXd& level(int n) const { return levels_.at(static_cast<std::size_t>(n)); }
    TensorSeries at(std::size_t i) const;
    TensorSeries terminal() const { return at(nodes() - 1); }

    /// One row per node holding all coefficients of levels 0..L in word order.
    Eigen::MatrixXd features() const;

private:
    TimeGrid grid_;
    int m_;
    std::vector<Eigen::MatrixXd> levels_;
};

DiagonalSignatureField diagonal_signature(const Path& path, const Kernel& kernel, int L, const QuadratureConfig& quad = {});

/// VSig^tau_{s,t}; s and t must be grid nodes, tau >= t.
TensorSeries signature_at(const Path& path, const Kernel& kernel, int L, double s, double t, double tau,
                          const QuadratureConfig& quad = {});

/// Exact truncated signature at every node via segment exponentials and Chen's product.
std::vector<TensorSeries> classical_signature(const Path& path, int L);

/// [y * z]^{w,tau}_{s,t}; the empty word gives y(tau).
double convolution(const std::function<double(double)>& y, const Path& path, const Kernel& kernel, const Word& w, double s,
                   double t, double tau, const QuadratureConfig& quad = {});

/// Largest coordinate gap in the convolutional Chen identity over all words of length <= L.
double chen_residual(const Path& path, const Kernel& kernel, int L, double s, double u, double t, double tau,
                     const QuadratureConfig& quad = {});

/// Inserts factor-1 equally spaced nodes into every segment.
Path refine(const Path& path, int factor);

/// Node weights for integrals of f(u) K(tau,u) dx_u over [t_lo, t_hi].
class WeightBuilder {
public:
    WeightBuilder(const Path& path, const Kernel& kernel, QuadratureRule rule, std::size_t lo, std::size_t hi);

    std::size_t lo() const { return lo_; }
    std::size_t hi() const { return hi_; }
    int alphabet() const { return m_; }

    /// Row k - lo of the result weights f(t_k); integration runs over [t_lo, t_end], tau defaults to t_end.
    Eigen::MatrixXd row(std::size_t end, std::optional<double> tau = std::nullopt) const;

    /// One lower-triangular (n x n) matrix per letter; row i integrates over [t_lo, t_{lo+i}] with tau = t_{lo+i}.
    std::vector<Eigen::MatrixXd> diagonal_matrices() const;

private:
    void fill_row(std::size_t end, double tau, bool on_diagonal, double* const* dst) const;

    const Path& path_;
    const Kernel& kernel_;
    QuadratureRule rule_;
    std::size_t lo_, hi_;
    int m_;
    std::size_t terms_;
    bool lag_table_ = false;
    double h_ = 0.0;
    std::vector<std::vector<double>> table_;  // [lag][term]: phi or its segment integral at uniform lags
    std::vector<Eigen::MatrixXd> interior_;   // [term]: (n x m) trapezoid or segment vectors attached to each node
    std::vector<Eigen::MatrixXd> endpoint_;   // [term]: (n x m) half segment ending at each node
};

/// Convolution tower on [t_lo, t_hi]: C^(0) = Y0 (n x P), C^(j+1)[:, c*m + a] = W_a C^(j)[:, c].
std::vector<Eigen::MatrixXd> volterra_tower(const WeightBuilder& wb, const Eigen::MatrixXd& Y0, int depth);

/// Applies one final integration with target tau: flat level j+1 coefficients from tower level j.
Eigen::VectorXd target_level(const WeightBuilder& wb, const Eigen::MatrixXd& tower_level, std::size_t end, double tau);

}  // namespace vsig
