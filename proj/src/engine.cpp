#include "vsig/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vsig {

DiagonalSignatureField::DiagonalSignatureField(TimeGrid grid, int m, std::vector<Eigen::MatrixXd> levels)
    : grid_(std::move(grid)), m_(m), levels_(std::move(levels)) {
    if (levels_.empty()) throw std::invalid_argument("field needs level 0");
    for (std::size_t n = 0; n < levels_.size(); ++n)
        if (static_cast<std::size_t>(levels_[n].rows()) != grid_.nodes() ||
            static_cast<std::size_t>(levels_[n].cols()) != ipow(static_cast<std::size_t>(m_), static_cast<int>(n)))
            throw std::invalid_argument("field level has wrong shape");
}

TensorSeries DiagonalSignatureField::at(std::size_t i) const {
    TensorSeries s(m_, depth());
    for (int n = 0; n <= depth(); ++n) s.level(n) = levels_[static_cast<std::size_t>(n)].row(static_cast<Eigen::Index>(i)).transpose();
    return s;
}

Eigen::MatrixXd DiagonalSignatureField::features() const {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(nodes()), static_cast<Eigen::Index>(series_size(static_cast<std::size_t>(m_), depth())));
    Eigen::Index off = 0;
    for (const auto& lv : levels_) {
        X.middleCols(off, lv.cols()) = lv;
        off += lv.cols();
    }
    return X;
}

Path refine(const Path& path, int factor) {
    if (factor < 1) throw std::invalid_argument("refinement factor must be positive");
    if (factor == 1) return path;
    const std::size_t S = path.segments();
    std::vector<double> t(S * static_cast<std::size_t>(factor) + 1);
    Eigen::MatrixXd v(static_cast<Eigen::Index>(t.size()), path.dim());
    const auto& g = path.grid();
    for (std::size_t i = 0; i < S; ++i)
        for (int j = 0; j < factor; ++j) {
            const double w = static_cast<double>(j) / factor;
            const std::size_t k = i * static_cast<std::size_t>(factor) + static_cast<std::size_t>(j);
            t[k] = g[i] + w * g.dt(i);
            v.row(static_cast<Eigen::Index>(k)) = (1.0 - w) * path.values().row(static_cast<Eigen::Index>(i)) +
                                                  w * path.values().row(static_cast<Eigen::Index>(i) + 1);
        }
    t.back() = g.back();
    v.row(v.rows() - 1) = path.values().row(path.values().rows() - 1);
    return Path(TimeGrid(std::move(t)), std::move(v));
}

WeightBuilder::WeightBuilder(const Path& path, const Kernel& kernel, QuadratureRule rule, std::size_t lo, std::size_t hi)
    : path_(path), kernel_(kernel), rule_(rule), lo_(lo), hi_(hi), m_(kernel.rows()), terms_(kernel.terms()) {
    if (kernel.cols() != path.dim()) throw std::invalid_argument("kernel input dimension does not match path dimension");
    if (lo > hi || hi >= path.nodes()) throw std::out_of_range("integration range outside the grid");
    if (kernel.singular() && rule != QuadratureRule::product_integration)
        throw std::invalid_argument("singular kernel requires product_integration quadrature");

    const std::size_t n = hi - lo + 1;
    const auto& mats = kernel.term_matrices();
    const Eigen::MatrixXd dx = path.increments();
    const auto& g = path.grid();
    interior_.assign(terms_, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), m_));
    if (rule == QuadratureRule::trapezoid) endpoint_.assign(terms_, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), m_));
    for (std::size_t k = lo; k < hi + 1; ++k) {
        const auto kk = static_cast<Eigen::Index>(k - lo);
        Eigen::VectorXd seg = Eigen::VectorXd::Zero(path.dim());
        Eigen::VectorXd prev = Eigen::VectorXd::Zero(path.dim());
        if (k < hi) seg = dx.row(static_cast<Eigen::Index>(k)).transpose();
        if (k > lo) prev = dx.row(static_cast<Eigen::Index>(k) - 1).transpose();
        for (std::size_t r = 0; r < terms_; ++r) {
            switch (rule) {
                case QuadratureRule::trapezoid:
                    interior_[r].row(kk) = (mats[r] * (0.5 * (seg + prev))).transpose();
                    endpoint_[r].row(kk) = (mats[r] * (0.5 * prev)).transpose();
                    break;
                case QuadratureRule::left:
                    interior_[r].row(kk) = (mats[r] * seg).transpose();
                    break;
                case QuadratureRule::product_integration:
                    if (k < hi) interior_[r].row(kk) = (mats[r] * (seg / g.dt(k))).transpose();
                    break;
            }
        }
    }

    if (kernel.stationary() && n >= 2 && path.slice(lo, hi).grid().is_uniform(1e-9)) {
        lag_table_ = true;
        h_ = (g[hi] - g[lo]) / static_cast<double>(n - 1);
        table_.assign(terms_, std::vector<double>(n, 0.0));
        std::vector<double> buf(terms_);
        for (std::size_t j = 0; j < n; ++j) {
            if (rule == QuadratureRule::product_integration) {
                if (j == 0) continue;
                kernel.phi_integral(static_cast<double>(j) * h_, 0.0, h_, buf.data());
            } else {
                if (j == 0 && kernel.singular()) continue;
                kernel.phi(static_cast<double>(j) * h_, 0.0, buf.data());
            }
            for (std::size_t r = 0; r < terms_; ++r) table_[r][j] = buf[r];
        }
    }
}

Eigen::MatrixXd WeightBuilder::row(std::size_t end, std::optional<double> tau) const {
    if (end < lo_ || end > hi_) throw std::out_of_range("integration end outside the builder range");
    const auto& g = path_.grid();
    const double target = tau.value_or(g[end]);
    if (target < g[end] - 1e-12 * std::max(1.0, std::abs(g[end]))) throw std::invalid_argument("target time before integration end");
    const bool on_diag = !tau.has_value() || target == g[end];
    const std::size_t cnt = end - lo_;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cnt + 1), m_);
    const auto c = static_cast<Eigen::Index>(cnt);

    if (on_diag && lag_table_) {
        for (std::size_t r = 0; r < terms_; ++r) {
            const Eigen::Map<const Eigen::VectorXd> tab(table_[r].data(), static_cast<Eigen::Index>(table_[r].size()));
            if (cnt > 0) out.topRows(c) += tab.segment(1, c).reverse().asDiagonal() * interior_[r].topRows(c);
            if (rule_ == QuadratureRule::trapezoid && cnt > 0) out.row(c) += tab(0) * endpoint_[r].row(c);
        }
        return out;
    }

    std::vector<double> buf(terms_);
    for (std::size_t k = lo_; k < end; ++k) {
        if (rule_ == QuadratureRule::product_integration)
            kernel_.phi_integral(target, g[k], g[k + 1], buf.data());
        else
            kernel_.phi(target, g[k], buf.data());
        for (std::size_t r = 0; r < terms_; ++r) out.row(static_cast<Eigen::Index>(k - lo_)) += buf[r] * interior_[r].row(static_cast<Eigen::Index>(k - lo_));
    }
    if (rule_ == QuadratureRule::trapezoid && cnt > 0) {
        kernel_.phi(target, g[end], buf.data());
        for (std::size_t r = 0; r < terms_; ++r) out.row(c) += buf[r] * endpoint_[r].row(c);
    }
    return out;
}

std::vector<Eigen::MatrixXd> WeightBuilder::diagonal_matrices() const {
    const auto n = static_cast<Eigen::Index>(hi_ - lo_ + 1);
    std::vector<Eigen::MatrixXd> W(static_cast<std::size_t>(m_), Eigen::MatrixXd::Zero(n, n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::MatrixXd r = row(lo_ + static_cast<std::size_t>(i));
        for (int a = 0; a < m_; ++a) W[static_cast<std::size_t>(a)].row(i).head(i + 1) = r.col(a).transpose();
    }
    return W;
}

std::vector<Eigen::MatrixXd> volterra_tower(const WeightBuilder& wb, const Eigen::MatrixXd& Y0, int depth) {
    const auto n = static_cast<Eigen::Index>(wb.hi() - wb.lo() + 1);
    if (Y0.rows() != n) throw std::invalid_argument("tower seed must have one row per node");
    const int m = wb.alphabet();
    std::vector<Eigen::MatrixXd> C{Y0};
    if (depth <= 0) return C;
    const auto W = wb.diagonal_matrices();
    for (int j = 0; j < depth; ++j) {
        const Eigen::MatrixXd& cur = C.back();
        const Eigen::Index cols = cur.cols();
        Eigen::MatrixXd next(n, cols * m);
        for (int a = 0; a < m; ++a) {
            Eigen::MatrixXd tmp = W[static_cast<std::size_t>(a)].triangularView<Eigen::Lower>() * cur;
            Eigen::Map<Eigen::MatrixXd, 0, Eigen::OuterStride<>> dst(next.data() + a * n, n, cols, Eigen::OuterStride<>(m * n));
            dst = tmp;
        }
        C.push_back(std::move(next));
    }
    return C;
}

Eigen::VectorXd target_level(const WeightBuilder& wb, const Eigen::MatrixXd& tower_level, std::size_t end, double tau) {
    const Eigen::MatrixXd w = wb.row(end, tau);
    const Eigen::MatrixXd G = tower_level.topRows(w.rows()).transpose() * w;  // (cols x m)
    const Eigen::MatrixXd Gt = G.transpose();
    return Eigen::Map<const Eigen::VectorXd>(Gt.data(), Gt.size());
}

namespace {

struct Prepared {
    Path path;
    std::size_t factor;
};

Prepared prepare(const Path& path, const QuadratureConfig& quad) {
    if (path.segments() < 1) throw std::invalid_argument("path needs at least one segment");
    return {refine(path, quad.refinement), static_cast<std::size_t>(quad.refinement)};
}

void check_order(double s, double t, double tau) {
    if (!(s <= t && t <= tau)) throw std::invalid_argument("ordering violation: need s <= t <= tau");
}

}  // namespace

DiagonalSignatureField diagonal_signature(const Path& path, const Kernel& kernel, int L, const QuadratureConfig& quad) {
    if (L < 0) throw std::invalid_argument("truncation level must be non-negative");
    const auto prep = prepare(path, quad);
    const Path& p = prep.path;
    WeightBuilder wb(p, kernel, quad.rule, 0, p.nodes() - 1);
    auto C = volterra_tower(wb, Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(p.nodes()), 1), L);
    if (prep.factor > 1) {
        const auto nodes = static_cast<Eigen::Index>(path.nodes());
        for (auto& lv : C) {
            Eigen::MatrixXd sub(nodes, lv.cols());
            for (Eigen::Index i = 0; i < nodes; ++i) sub.row(i) = lv.row(i * static_cast<Eigen::Index>(prep.factor));
            lv = std::move(sub);
        }
    }
    return DiagonalSignatureField(path.grid(), kernel.rows(), std::move(C));
}

TensorSeries signature_at(const Path& path, const Kernel& kernel, int L, double s, double t, double tau,
                          const QuadratureConfig& quad) {
    check_order(s, t, tau);
    const std::size_t lo0 = path.grid().index_of(s), hi0 = path.grid().index_of(t);
    const auto prep = prepare(path, quad);
    const std::size_t lo = lo0 * prep.factor, hi = hi0 * prep.factor;
    WeightBuilder wb(prep.path, kernel, quad.rule, lo, hi);
    const int m = kernel.rows();
    auto out = TensorSeries::unit(m, L);
    if (L == 0) return out;
    const auto C = volterra_tower(wb, Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(hi - lo + 1), 1), L - 1);
    for (int j = 0; j < L; ++j) out.level(j + 1) = target_level(wb, C[static_cast<std::size_t>(j)], hi, tau);
    return out;
}

std::vector<TensorSeries> classical_signature(const Path& path, int L) {
    if (L < 0) throw std::invalid_argument("truncation level must be non-negative");
    const int m = path.dim();
    std::vector<TensorSeries> out;
    out.reserve(path.nodes());
    out.push_back(TensorSeries::unit(m, L));
    for (std::size_t i = 0; i < path.segments(); ++i) out.push_back(tensor_mul(out.back(), tensor_exp<double>(path.increment(i), L), L));
    return out;
}

double convolution(const std::function<double(double)>& y, const Path& path, const Kernel& kernel, const Word& w, double s,
                   double t, double tau, const QuadratureConfig& quad) {
    check_order(s, t, tau);
    if (w.alphabet() != kernel.rows()) throw std::out_of_range("word letters out of range for the kernel output dimension");
    if (w.empty()) return y(tau);
    const std::size_t lo0 = path.grid().index_of(s), hi0 = path.grid().index_of(t);
    const auto prep = prepare(path, quad);
    const std::size_t lo = lo0 * prep.factor, hi = hi0 * prep.factor;
    WeightBuilder wb(prep.path, kernel, quad.rule, lo, hi);
    Eigen::MatrixXd Y0(static_cast<Eigen::Index>(hi - lo + 1), 1);
    for (std::size_t k = lo; k <= hi; ++k) Y0(static_cast<Eigen::Index>(k - lo), 0) = y(prep.path.grid()[k]);
    const int n = w.length();
    const auto C = volterra_tower(wb, Y0, n - 1);
    const Eigen::VectorXd last = target_level(wb, C.back(), hi, tau);
    return last(static_cast<Eigen::Index>(w.index()));
}

double chen_residual(const Path& path, const Kernel& kernel, int L, double s, double u, double t, double tau,
                     const QuadratureConfig& quad) {
    if (!(s <= u && u <= t && t <= tau)) throw std::invalid_argument("ordering violation: need s <= u <= t <= tau");
    const TensorSeries lhs = signature_at(path, kernel, L, s, t, tau, quad);
    const auto prep = prepare(path, quad);
    const Path& p = prep.path;
    const std::size_t is = path.grid().index_of(s) * prep.factor;
    const std::size_t iu = path.grid().index_of(u) * prep.factor;
    const std::size_t it = path.grid().index_of(t) * prep.factor;
    const int m = kernel.rows();
    const auto nut = static_cast<Eigen::Index>(it - iu + 1);

    WeightBuilder first(p, kernel, quad.rule, is, iu);
    const auto D = volterra_tower(first, Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(iu - is + 1), 1), std::max(0, L - 1));
    WeightBuilder second(p, kernel, quad.rule, iu, it);

    TensorSeries rhs(m, L);
    for (int k = 0; k <= L; ++k) {
        // Prefix values r -> VSig^{p,r}_{s,u} on the nodes of [u,t], plus the value at tau.
        const auto P = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(m), k));
        Eigen::MatrixXd Y(nut, P);
        Eigen::VectorXd at_tau(P);
        if (k == 0) {
            Y.setOnes();
            at_tau.setOnes();
        } else {
            const auto& Dk = D[static_cast<std::size_t>(k - 1)];
            for (Eigen::Index r = 0; r < nut; ++r) Y.row(r) = target_level(first, Dk, iu, p.grid()[iu + static_cast<std::size_t>(r)]).transpose();
            at_tau = target_level(first, Dk, iu, tau);
        }
        rhs.level(k) += at_tau;
        if (k == L) continue;
        const auto C = volterra_tower(second, Y, L - k - 1);
        for (int j = 1; j + k <= L; ++j) rhs.level(k + j) += target_level(second, C[static_cast<std::size_t>(j - 1)], it, tau);
    }
    return (lhs - rhs).max_abs();
}

}  // namespace vsig
