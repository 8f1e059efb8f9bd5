#pragma once

/**
 * @file statespace.hpp
 * @brief Linear-time Volterra signatures for finite-state-space kernels.
 *
 * For K(t,s) = sum_r (1^T exp(-Lambda (t-s)) b_r) A_r the components
 * Z_l solve dZ = -Lambda.Z dt + (1 + sum_i Z_i) (x) d(B.x), and the diagonal
 * signature is 1 + sum_l Z_l.
 */

#include "vsig/engine.hpp"
#include "vsig/kernel.hpp"
#include "vsig/path.hpp"
#include "vsig/tensor.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace vsig {

enum class StepRule {
    /// exp(-Lambda h) applied exactly, forcing linear in time over the segment.
    exponential,
    /// Explicit Euler; only stable for small Lambda h.
    explicit_euler,
};

class StateSpaceLift {
public:
    StateSpaceLift(TimeGrid grid, Eigen::MatrixXd Lambda, int m, std::vector<std::vector<Eigen::MatrixXd>> components);

    const TimeGrid& grid() const { return grid_; }
    int alphabet() const { return m_; }
    int depth() const { return static_cast<int>(comp_.front().size()) - 1; }
    std::size_t states() const { return comp_.size(); }

    /// Z_l at node i; its level 0 is zero.
    TensorSeries component(std::size_t l, std::size_t i) const;

    /// 1 + sum_l Z_l at every node.
    DiagonalSignatureField diagonal() const;

    /// VSig^tau_{0,t_i} = 1 + 1^T exp(-Lambda (tau - t_i)) Z(t_i).
    TensorSeries at_target(std::size_t i, double tau) const;

private:
    TimeGrid grid_;
    Eigen::MatrixXd Lambda_;
    int m_;
    std::vector<std::vector<Eigen::MatrixXd>> comp_;  // [state][level]: nodes x m^n
};

StateSpaceLift lift_solve(const Path& path, const Kernel& kernel, int L, StepRule rule = StepRule::exponential);

/// VSig^{t_hi}_{t_lo,t_hi} without storing intermediate nodes.
TensorSeries lift_terminal(const Path& path, const Kernel& kernel, int L, std::size_t lo, std::size_t hi,
                           StepRule rule = StepRule::exponential);

/// Terminal signatures of many windows sharing one kernel: row w holds the flat coefficients for windows[w] = (lo, hi).
Eigen::MatrixXd lift_window_features(const Path& path, const Kernel& kernel, int L,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& windows,
                                     StepRule rule = StepRule::exponential);

/// Scalar-exponential kernel alpha exp(-lambda (t-s)) I from classical signatures of alpha x:
/// 1 + e^{-lambda(tau-s)} (Sig_{s,t} - 1) + lambda int_s^t e^{-lambda(tau-u)} (Sig_{u,t} - 1) du.
TensorSeries scalar_exp_convert(std::span<const TensorSeries> classical, const TimeGrid& grid, double lambda, double s,
                                double t, double tau);

}  // namespace vsig
