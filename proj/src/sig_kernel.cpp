#include "vsig/sig_kernel.hpp"

#include "vsig/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <stdexcept>

namespace vsig {

GramField::GramField(TimeGrid s, TimeGrid t, Eigen::MatrixXd values) : s_(std::move(s)), t_(std::move(t)), kappa_(std::move(values)) {
    if (static_cast<std::size_t>(kappa_.rows()) != s_.nodes() || static_cast<std::size_t>(kappa_.cols()) != t_.nodes())
        throw std::invalid_argument("gram field shape does not match grids");
}

double gram_entry_truncated(const TensorSeries& a, const TensorSeries& b) { return inner_product(a, b); }

GramField gram_entry_integral(const Path& z, const Path& y, const Kernel& kz, const Kernel& ky, const QuadratureConfig& quad) {
    if (kz.rows() != ky.rows()) throw std::invalid_argument("kernels must share the output dimension");
    if (quad.refinement != 1) throw std::invalid_argument("refinement is not supported by the integral solver");
    const auto nz = static_cast<Eigen::Index>(z.nodes()), ny = static_cast<Eigen::Index>(y.nodes());
    WeightBuilder wz(z, kz, quad.rule, 0, z.nodes() - 1), wy(y, ky, quad.rule, 0, y.nodes() - 1);
    std::vector<Eigen::MatrixXd> Vz(static_cast<std::size_t>(nz)), Vy(static_cast<std::size_t>(ny));
    for (Eigen::Index i = 0; i < nz; ++i) Vz[static_cast<std::size_t>(i)] = wz.row(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < ny; ++j) Vy[static_cast<std::size_t>(j)] = wy.row(static_cast<std::size_t>(j));

    const Eigen::Index m = kz.rows();
    Eigen::MatrixXd kappa = Eigen::MatrixXd::Ones(nz, ny);
    Eigen::MatrixXd T(nz, m);  // T(k,a) = sum_{l<=j} kappa(k,l) Vy[j](l,a)
    for (Eigen::Index j = 1; j < ny; ++j) {
        const Eigen::MatrixXd& vy = Vy[static_cast<std::size_t>(j)];
        T.row(0) = kappa.row(0).head(j + 1) * vy;
        for (Eigen::Index i = 1; i < nz; ++i) {
            const Eigen::MatrixXd& vz = Vz[static_cast<std::size_t>(i)];
            const Eigen::RowVectorXd partial = kappa.row(i).head(j) * vy.topRows(j);
            double known = (vz.topRows(i).array() * T.topRows(i).array()).sum() + vz.row(i).dot(partial);
            const double corner = vz.row(i).dot(vy.row(j));
            const double value = (1.0 + known) / (1.0 - corner);
            kappa(i, j) = value;
            T.row(i) = partial + value * vy.row(j);
        }
    }
    return GramField(z.grid(), y.grid(), std::move(kappa));
}

GramField gram_entry_pde_exp(const Path& x, const Path& w, const Kernel& k) {
    const auto ss = k.state_space();
    if (!ss) throw std::invalid_argument("kernel has no finite-state-space form: " + k.type_name());
    if (k.cols() != x.dim() || k.cols() != w.dim()) throw std::invalid_argument("kernel input dimension does not match paths");
    const Eigen::MatrixXd& Lam = ss->Lambda;
    const Eigen::Index R = Lam.rows(), m = k.rows();
    const auto ns = static_cast<Eigen::Index>(x.nodes()), nt = static_cast<Eigen::Index>(w.nodes());

    auto forcing = [&](const Path& p) {
        std::vector<Eigen::MatrixXd> out;
        for (std::size_t i = 0; i < p.segments(); ++i) {
            Eigen::MatrixXd a = Eigen::MatrixXd::Zero(R, m);
            const Eigen::VectorXd v = p.slope(i);
            for (std::size_t r = 0; r < ss->b.size(); ++r) a += ss->b[r] * (ss->A[r] * v).transpose();
            out.push_back(std::move(a));
        }
        return out;
    };
    const auto alpha = forcing(x), beta = forcing(w);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(R, R);
    constexpr int corrector_sweeps = 3;

    // Two columns of state (t_j and t_{j+1}) indexed by the s node.
    std::vector<Eigen::MatrixXd> Kp(static_cast<std::size_t>(ns), Eigen::MatrixXd::Zero(R, R)), Kc = Kp;
    std::vector<Eigen::MatrixXd> Pp(static_cast<std::size_t>(ns), Eigen::MatrixXd::Zero(R, m)), Pc = Pp;
    std::vector<Eigen::MatrixXd> Fp(static_cast<std::size_t>(ns), Eigen::MatrixXd::Zero(m, R)), Fc = Fp;
    Eigen::MatrixXd kappa = Eigen::MatrixXd::Ones(ns, nt);

    // t = 0 column: K = Phi = 0, kappa = 1, Psi follows its s-equation.
    for (Eigen::Index i = 0; i + 1 < ns; ++i) {
        const double hs = x.grid().dt(static_cast<std::size_t>(i));
        Pp[static_cast<std::size_t>(i) + 1] = (I + 0.5 * hs * Lam).lu().solve((I - 0.5 * hs * Lam) * Pp[static_cast<std::size_t>(i)] + hs * alpha[static_cast<std::size_t>(i)]);
    }
    for (Eigen::Index j = 0; j + 1 < nt; ++j) {
        const double ht = w.grid().dt(static_cast<std::size_t>(j));
        const Eigen::MatrixXd& bj = beta[static_cast<std::size_t>(j)];
        const Eigen::MatrixXd Lt_minus = I - 0.5 * ht * Lam.transpose();
        const Eigen::PartialPivLU<Eigen::MatrixXd> Lt_plus((I + 0.5 * ht * Lam.transpose()).transpose());
        auto solve_right = [&](const Eigen::MatrixXd& rhs) -> Eigen::MatrixXd {
            // X (I + ht/2 Lambda^T) = rhs
            return Lt_plus.solve(rhs.transpose()).transpose();
        };
        // s = 0 row: K = Psi = 0, kappa = 1, Phi follows its t-equation.
        Kc[0].setZero();
        Pc[0].setZero();
        Fc[0] = solve_right(Fp[0] * Lt_minus + ht * bj.transpose());
        for (Eigen::Index i = 0; i + 1 < ns; ++i) {
            const auto u = static_cast<std::size_t>(i);
            const double hs = x.grid().dt(u);
            const Eigen::MatrixXd& ai = alpha[u];
            const Eigen::MatrixXd Ps_minus = I - 0.5 * hs * Lam;
            const Eigen::PartialPivLU<Eigen::MatrixXd> Ps_solver(I + 0.5 * hs * Lam);
            auto drive = [&](const Eigen::MatrixXd& K, const Eigen::MatrixXd& P, const Eigen::MatrixXd& F) -> Eigen::MatrixXd {
                return (1.0 + K.sum()) * ai * bj.transpose() + Lam * K * Lam.transpose() - Lam * P * bj.transpose() -
                       ai * F * Lam.transpose();
            };
            const Eigen::MatrixXd known = drive(Kp[u], Pp[u], Fp[u]) + drive(Kp[u + 1], Pp[u + 1], Fp[u + 1]) + drive(Kc[u], Pc[u], Fc[u]);
            const double k_s_prev = 1.0 + Kc[u].sum();      // kappa(s_i, t_{j+1})
            const double k_t_prev = 1.0 + Kp[u + 1].sum();  // kappa(s_{i+1}, t_j)
            // Predictor from the cell-centre estimate, then trapezoid corrector sweeps over the four corners.
            const Eigen::MatrixXd Kbase = Kp[u + 1] + Kc[u] - Kp[u];
            Eigen::MatrixXd Knew = Kbase + hs * ht * drive(0.5 * (Kp[u + 1] + Kc[u]), 0.5 * (Pp[u + 1] + Pc[u]), 0.5 * (Fp[u + 1] + Fc[u]));
            Eigen::MatrixXd Pnew, Fnew;
            double knew = 0.0;
            for (int sweep = 0; sweep <= corrector_sweeps; ++sweep) {
                knew = 1.0 + Knew.sum();
                Pnew = Ps_solver.solve(Ps_minus * Pc[u] + 0.5 * hs * (k_s_prev + knew) * ai);
                Fnew = solve_right(Fp[u + 1] * Lt_minus + 0.5 * ht * (k_t_prev + knew) * bj.transpose());
                if (sweep == corrector_sweeps) break;
                Knew = Kbase + 0.25 * hs * ht * (known + drive(Knew, Pnew, Fnew));
            }
            Kc[u + 1] = Knew;
            Pc[u + 1] = Pnew;
            Fc[u + 1] = Fnew;
            kappa(i + 1, j + 1) = knew;
        }
        std::swap(Kp, Kc);
        std::swap(Pp, Pc);
        std::swap(Fp, Fc);
    }
    return GramField(x.grid(), w.grid(), std::move(kappa));
}

Eigen::MatrixXd gram_matrix(const std::vector<Path>& paths, const Kernel& kernel, GramEngine engine, int level,
                            const QuadratureConfig& quad) {
    if (paths.empty()) throw std::invalid_argument("gram matrix needs at least one path");
    for (const auto& p : paths)
        if (p.dim() != paths.front().dim()) throw std::invalid_argument("all paths must share one dimension");
    const std::size_t n = paths.size();
    std::vector<TensorSeries> sigs;
    if (engine == GramEngine::truncated) {
        sigs.resize(n);
        parallel_for(n, [&](std::size_t i) { sigs[i] = diagonal_signature(paths[i], kernel, level, quad).terminal(); });
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) pairs.emplace_back(i, j);
    std::vector<double> vals(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t q) {
        const auto [i, j] = pairs[q];
        switch (engine) {
            case GramEngine::truncated: vals[q] = gram_entry_truncated(sigs[i], sigs[j]); break;
            case GramEngine::integral: vals[q] = gram_entry_integral(paths[i], paths[j], kernel, kernel, quad).terminal(); break;
            case GramEngine::pde: vals[q] = gram_entry_pde_exp(paths[i], paths[j], kernel).terminal(); break;
        }
    });
    Eigen::MatrixXd G(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t q = 0; q < pairs.size(); ++q) {
        const auto [i, j] = pairs[q];
        G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vals[q];
        G(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = vals[q];
    }
    return G;
}

double psd_margin(const Eigen::MatrixXd& G) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() / G.trace();
}

}  // namespace vsig
