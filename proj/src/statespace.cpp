#include "vsig/statespace.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <map>
#include <stdexcept>

namespace vsig {

namespace {

struct SegmentOperators {
    Eigen::MatrixXd E;     // exp(-Lambda h)
    Eigen::MatrixXd G0;    // weight of the forcing at the segment start
    Eigen::MatrixXd G1;    // weight of the forcing at the segment end
};

class LiftStepper {
public:
    LiftStepper(const StateSpaceKernel& k, int L, StepRule rule) : k_(k), L_(L), rule_(rule) {
        R_ = k.Lambda.rows();
        m_ = k.A.front().rows();
        Z_.resize(static_cast<std::size_t>(L) + 1);
        for (int n = 0; n <= L; ++n) Z_[static_cast<std::size_t>(n)] = Eigen::MatrixXd::Zero(R_, static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(m_), n)));
    }

    void reset() {
        for (auto& z : Z_) z.setZero();
    }

    const std::vector<Eigen::MatrixXd>& state() const { return Z_; }
    int alphabet() const { return static_cast<int>(m_); }

    void step(const Eigen::VectorXd& dx, double h) {
        // Rows of C are c_l = sum_r b_r^l A_r dx / h.
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(R_, m_);
        for (std::size_t r = 0; r < k_.b.size(); ++r) C += k_.b[r] * (k_.A[r] * dx).transpose() / h;
        const SegmentOperators& ops = operators(h);
        const Eigen::MatrixXd W0 = ops.G0 * C, W1 = ops.G1 * C;

        // Level n-1 of S = 1 + sum Z at the segment start, kept before overwriting.
        std::vector<Eigen::RowVectorXd> S_start(static_cast<std::size_t>(L_) + 1);
        S_start[0] = Eigen::RowVectorXd::Ones(1);
        for (int n = 1; n <= L_; ++n) S_start[static_cast<std::size_t>(n)] = Z_[static_cast<std::size_t>(n)].colwise().sum();

        Eigen::RowVectorXd S_end = Eigen::RowVectorXd::Ones(1);
        for (int n = 1; n <= L_; ++n) {
            auto& Z = Z_[static_cast<std::size_t>(n)];
            const auto& S0 = S_start[static_cast<std::size_t>(n - 1)];
            Eigen::MatrixXd next = ops.E * Z;
            for (Eigen::Index w = 0; w < S0.size(); ++w) {
                next.middleCols(w * m_, m_) += S0(w) * W0;
                if (rule_ == StepRule::exponential) next.middleCols(w * m_, m_) += S_end(w) * W1;
            }
            Z = std::move(next);
            S_end = Z.colwise().sum();
        }
    }

private:
    const SegmentOperators& operators(double h) {
        auto it = cache_.find(h);
        if (it != cache_.end()) return it->second;
        SegmentOperators ops;
        const auto R = R_;
        if (rule_ == StepRule::exponential) {
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(3 * R, 3 * R);
            M.topLeftCorner(R, R) = -k_.Lambda * h;
            M.block(0, R, R, R) = Eigen::MatrixXd::Identity(R, R) * h;
            M.block(R, 2 * R, R, R) = Eigen::MatrixXd::Identity(R, R) * h;
            const Eigen::MatrixXd X = M.exp();
            const Eigen::MatrixXd phi1 = X.block(0, R, R, R);
            const Eigen::MatrixXd phi2 = X.block(0, 2 * R, R, R) / h;
            ops.E = X.topLeftCorner(R, R);
            ops.G0 = phi1 - phi2;
            ops.G1 = phi2;
        } else {
            ops.E = Eigen::MatrixXd::Identity(R, R) - h * k_.Lambda;
            ops.G0 = Eigen::MatrixXd::Identity(R, R) * h;
            ops.G1 = Eigen::MatrixXd::Zero(R, R);
        }
        if (cache_.size() > 4096) cache_.clear();
        return cache_.emplace(h, std::move(ops)).first->second;
    }

    const StateSpaceKernel& k_;
    int L_;
    StepRule rule_;
    Eigen::Index R_, m_;
    std::vector<Eigen::MatrixXd> Z_;
    std::map<double, SegmentOperators> cache_;
};

StateSpaceKernel require_state_space(const Kernel& kernel, const Path& path) {
    auto ss = kernel.state_space();
    if (!ss) throw std::invalid_argument("kernel has no finite-state-space form: " + kernel.type_name());
    if (kernel.cols() != path.dim()) throw std::invalid_argument("kernel input dimension does not match path dimension");
    return *ss;
}

}  // namespace

StateSpaceLift::StateSpaceLift(TimeGrid grid, Eigen::MatrixXd Lambda, int m, std::vector<std::vector<Eigen::MatrixXd>> components)
    : grid_(std::move(grid)), Lambda_(std::move(Lambda)), m_(m), comp_(std::move(components)) {
    if (comp_.empty() || static_cast<Eigen::Index>(comp_.size()) != Lambda_.rows())
        throw std::invalid_argument("one component per state required");
}

TensorSeries StateSpaceLift::component(std::size_t l, std::size_t i) const {
    TensorSeries s(m_, depth());
    for (int n = 0; n <= depth(); ++n) s.level(n) = comp_.at(l)[static_cast<std::size_t>(n)].row(static_cast<Eigen::Index>(i)).transpose();
    return s;
}

DiagonalSignatureField StateSpaceLift::diagonal() const {
    std::vector<Eigen::MatrixXd> levels;
    for (int n = 0; n <= depth(); ++n) {
        Eigen::MatrixXd lv = comp_[0][static_cast<std::size_t>(n)];
        for (std::size_t l = 1; l < comp_.size(); ++l) lv += comp_[l][static_cast<std::size_t>(n)];
        if (n == 0) lv.setOnes();
        levels.push_back(std::move(lv));
    }
    return DiagonalSignatureField(grid_, m_, std::move(levels));
}

TensorSeries StateSpaceLift::at_target(std::size_t i, double tau) const {
    if (tau < grid_[i]) throw std::invalid_argument("target before evaluation node");
    const Eigen::MatrixXd E = (-Lambda_ * (tau - grid_[i])).exp();
    const Eigen::RowVectorXd w = Eigen::RowVectorXd::Ones(E.rows()) * E;
    auto out = TensorSeries::unit(m_, depth());
    for (int n = 1; n <= depth(); ++n)
        for (std::size_t l = 0; l < comp_.size(); ++l)
            out.level(n) += w(static_cast<Eigen::Index>(l)) * comp_[l][static_cast<std::size_t>(n)].row(static_cast<Eigen::Index>(i)).transpose();
    return out;
}

StateSpaceLift lift_solve(const Path& path, const Kernel& kernel, int L, StepRule rule) {
    if (L < 0) throw std::invalid_argument("truncation level must be non-negative");
    const StateSpaceKernel ss = require_state_space(kernel, path);
    LiftStepper stepper(ss, L, rule);
    const auto R = static_cast<std::size_t>(ss.Lambda.rows());
    const int m = kernel.rows();
    const auto nodes = static_cast<Eigen::Index>(path.nodes());
    std::vector<std::vector<Eigen::MatrixXd>> comp(R);
    for (auto& c : comp)
        for (int n = 0; n <= L; ++n) c.push_back(Eigen::MatrixXd::Zero(nodes, static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(m), n))));
    for (std::size_t i = 0; i < path.segments(); ++i) {
        stepper.step(path.increment(i), path.grid().dt(i));
        for (int n = 1; n <= L; ++n)
            for (std::size_t l = 0; l < R; ++l)
                comp[l][static_cast<std::size_t>(n)].row(static_cast<Eigen::Index>(i) + 1) =
                    stepper.state()[static_cast<std::size_t>(n)].row(static_cast<Eigen::Index>(l));
    }
    return StateSpaceLift(path.grid(), ss.Lambda, m, std::move(comp));
}

TensorSeries lift_terminal(const Path& path, const Kernel& kernel, int L, std::size_t lo, std::size_t hi, StepRule rule) {
    const Eigen::MatrixXd row = lift_window_features(path, kernel, L, {{lo, hi}}, rule);
    return TensorSeries::from_flat(kernel.rows(), L, row.row(0).transpose());
}

Eigen::MatrixXd lift_window_features(const Path& path, const Kernel& kernel, int L,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& windows, StepRule rule) {
    if (L < 0) throw std::invalid_argument("truncation level must be non-negative");
    const StateSpaceKernel ss = require_state_space(kernel, path);
    LiftStepper stepper(ss, L, rule);
    const int m = kernel.rows();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(windows.size()), static_cast<Eigen::Index>(series_size(static_cast<std::size_t>(m), L)));
    const Eigen::MatrixXd dx = path.increments();
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const auto [lo, hi] = windows[w];
        if (lo > hi || hi >= path.nodes()) throw std::out_of_range("window outside the path");
        stepper.reset();
        for (std::size_t i = lo; i < hi; ++i) stepper.step(dx.row(static_cast<Eigen::Index>(i)).transpose(), path.grid().dt(i));
        const auto W = static_cast<Eigen::Index>(w);
        out(W, 0) = 1.0;
        Eigen::Index off = 1;
        for (int n = 1; n <= L; ++n) {
            const Eigen::RowVectorXd lv = stepper.state()[static_cast<std::size_t>(n)].colwise().sum();
            out.block(W, off, 1, lv.size()) = lv;
            off += lv.size();
        }
    }
    return out;
}

TensorSeries scalar_exp_convert(std::span<const TensorSeries> classical, const TimeGrid& grid, double lambda, double s,
                                double t, double tau) {
    if (lambda < 0) throw std::invalid_argument("lambda must be non-negative");
    if (!(s <= t)) throw std::invalid_argument("ordering violation: need s <= t");
    if (tau < t) throw std::invalid_argument("tau must not precede t");
    if (classical.size() != grid.nodes()) throw std::invalid_argument("classical signatures missing for some grid nodes");
    const std::size_t is = grid.index_of(s), it = grid.index_of(t);
    const int m = classical[it].alphabet(), L = classical[it].depth();
    const TensorSeries one = TensorSeries::unit(m, L);

    auto sig_from = [&](std::size_t u) { return tensor_mul(grouplike_inverse(classical[u]), classical[it], L) - one; };

    TensorSeries out = one + std::exp(-lambda * (tau - s)) * sig_from(is);
    if (lambda == 0.0 || is == it) return out;
    TensorSeries integral(m, L);
    TensorSeries prev = sig_from(is);
    double fprev = std::exp(-lambda * (tau - grid[is]));
    for (std::size_t u = is + 1; u <= it; ++u) {
        TensorSeries cur = sig_from(u);
        const double fcur = std::exp(-lambda * (tau - grid[u]));
        integral += (0.5 * grid.dt(u - 1)) * ((fprev * prev) + (fcur * cur));
        prev = std::move(cur);
        fprev = fcur;
    }
    out += lambda * integral;
    return out;
}

}  // namespace vsig
