#pragma once

/**
 * @file volterra.hpp
 * @brief Linear controlled Volterra equations and the linear Volterra SDE simulator.
 *
 * The equation y_t = xi + int_{t0}^t A(K(t,u) dx_u) y_u is solved either by
 * applying the lifted map A~(v_1 (x) ... (x) v_n) = A(v_n)...A(v_1) to the
 * Volterra signature, or by a direct left-point scheme.
 */

#include "vsig/engine.hpp"
#include "vsig/kernel.hpp"
#include "vsig/path.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace vsig {

struct LinearVolterraProblem {
    Eigen::VectorXd xi;
    /// A(e_a) for each output coordinate a of the kernel; all k x k.
    std::vector<Eigen::MatrixXd> A;
    Path path;
    Kernel kernel;
};

/// y at every grid node, one row per node.
struct Trajectory {
    TimeGrid grid;
    Eigen::MatrixXd values;
};

struct ResolventOptions {
    QuadratureConfig quad{};
    /// Admissible bound on the neglected levels, relative to |xi|.
    double tail_tolerance = 1e-4;
    /// Integrability exponent for the kernel norm; 0 picks 2, or a smaller admissible value for singular kernels.
    double p = 0.0;
};

/// Upper bound sum_{n > L} z^n / (n!)^{1/q} on the truncated part of the expansion.
double resolvent_tail_bound(const LinearVolterraProblem& problem, int L, double p);

/// Thrown when the tail bound exceeds the tolerance; carries the smallest level that satisfies it.
struct TailBoundError : std::runtime_error {
    TailBoundError(const std::string& what, int required) : std::runtime_error(what), required_level(required) {}
    int required_level;
};

Trajectory resolvent_solve(const LinearVolterraProblem& problem, int L, const ResolventOptions& opts = {});

/// y_{n+1} = xi + sum_{j<=n} A(K(t_{n+1}, t_j) xdot_j) y_j dt_j.
Trajectory euler_volterra(const LinearVolterraProblem& problem);

struct VsdeParams {
    double y0 = 1.0;
    double b0 = 0.0;
    double b1 = -1.0;
    double sigma0 = 1.0;
    double sigma1 = 0.5;
    Kernel kernel = Kernel(FractionalKernel{1.05, Eigen::MatrixXd::Ones(1, 1)});
    TimeGrid grid = TimeGrid::uniform(0.0, 2.0, 1000);
    std::size_t samples = 1000;
    std::uint64_t seed = 0;
};

struct VsdeSample {
    Eigen::VectorXd dB;  // one increment per segment
    Eigen::VectorXd B;   // B at every node, B_0 = 0
    Eigen::VectorXd Y;   // Y at every node
};

/// Standard normal from a (seed, stream, counter) triple; identical across runs and platforms.
double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// Euler-Maruyama with full-history kernel weights for one sample; sample index selects the random stream.
VsdeSample simulate_vsde_sample(const VsdeParams& p, std::size_t sample);

std::vector<VsdeSample> simulate_linear_vsde(const VsdeParams& p);

}  // namespace vsig
