#pragma once

/**
 * @file sig_kernel.hpp
 * @brief Inner products of Volterra signatures without explicit truncation.
 */

#include "vsig/engine.hpp"
#include "vsig/kernel.hpp"
#include "vsig/path.hpp"
#include "vsig/tensor.hpp"

#include <Eigen/Core>

#include <vector>

namespace vsig {

/// kappa(s_i, t_j) on the product of two grids.
class GramField {
public:
    GramField(TimeGrid s, TimeGrid t, Eigen::MatrixXd values);

    const TimeGrid& s_grid() const { return s_; }
    const TimeGrid& t_grid() const { return t_; }
    const Eigen::MatrixXd& values() const { return kappa_; }
    double operator()(std::size_t i, std::size_t j) const { return kappa_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }
    double terminal() const { return kappa_(kappa_.rows() - 1, kappa_.cols() - 1); }

private:
    TimeGrid s_, t_;
    Eigen::MatrixXd kappa_;
};

double gram_entry_truncated(const TensorSeries& a, const TensorSeries& b);

/// Solves kappa_{s,t} = 1 + int_0^s int_0^t kappa_{u,v} <K_z(s,u) dz_u, K_y(t,v) dy_v> node by node.
GramField gram_entry_integral(const Path& z, const Path& y, const Kernel& kz, const Kernel& ky, const QuadratureConfig& quad = {});

/// Marches the coupled (K, Psi, Phi) system of a finite-state-space kernel; kappa = 1 + 1^T K 1.
GramField gram_entry_pde_exp(const Path& x, const Path& w, const Kernel& k);

enum class GramEngine { integral, pde, truncated };

/// Terminal kernel values for every pair of paths; level is used by the truncated engine only.
Eigen::MatrixXd gram_matrix(const std::vector<Path>& paths, const Kernel& kernel, GramEngine engine, int level = 6,
                            const QuadratureConfig& quad = {});

/// Smallest eigenvalue of a symmetric matrix divided by its trace.
double psd_margin(const Eigen::MatrixXd& G);

}  // namespace vsig
