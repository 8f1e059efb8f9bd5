#include "vsig/volterra.hpp"

#include "vsig/parallel.hpp"

#include <Eigen/SVD>
#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <stdexcept>

namespace vsig {

namespace {

void validate(const LinearVolterraProblem& p) {
    const auto k = p.xi.size();
    if (k < 1) throw std::invalid_argument("initial value must be non-empty");
    if (static_cast<int>(p.A.size()) != p.kernel.rows()) throw std::invalid_argument("need one matrix A(e_a) per kernel output coordinate");
    for (const auto& a : p.A)
        if (a.rows() != k || a.cols() != k) throw std::invalid_argument("A(e_a) must be k x k");
    if (p.kernel.cols() != p.path.dim()) throw std::invalid_argument("kernel input dimension does not match path dimension");
}

double default_exponent(const Kernel& k) {
    if (auto f = std::get_if<FractionalKernel>(&k.spec()); f && f->beta < 1.0) return std::min(2.0, 0.5 * (1.0 + 1.0 / (1.0 - f->beta)));
    return 2.0;
}

double tail_sum(double z, int L, double q) {
    if (z == 0.0) return 0.0;
    double sum = 0.0, log_fact = std::lgamma(static_cast<double>(L) + 2.0);
    for (int n = L + 1; n < L + 5000; ++n) {
        if (n > L + 1) log_fact += std::log(static_cast<double>(n));
        const double term = std::exp(n * std::log(z) - log_fact / q);
        sum += term;
        if (term < 1e-18 * sum && n > 2 * z * z + L) break;
    }
    return sum;
}

std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

double resolvent_tail_bound(const LinearVolterraProblem& problem, int L, double p) {
    validate(problem);
    if (p <= 1.0) throw std::invalid_argument("tail bound needs p > 1");
    const double q = p / (p - 1.0);
    double a2 = 0.0;
    for (const auto& a : problem.A) {
        const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
        a2 += s * s;
    }
    double slope = 0.0;
    for (std::size_t i = 0; i < problem.path.segments(); ++i) slope = std::max(slope, problem.path.slope(i).norm());
    const double T = problem.path.grid().back() - problem.path.grid().front();
    const double z = std::sqrt(a2) * slope * linf_p_norm(problem.kernel, T, p) * std::pow(T, 1.0 / q);
    return tail_sum(z, L, q);
}

Trajectory resolvent_solve(const LinearVolterraProblem& problem, int L, const ResolventOptions& opts) {
    validate(problem);
    if (L < 0) throw std::invalid_argument("truncation level must be non-negative");
    const double p = opts.p > 0 ? opts.p : default_exponent(problem.kernel);
    if (resolvent_tail_bound(problem, L, p) > opts.tail_tolerance) {
        int need = L;
        while (need < L + 500 && resolvent_tail_bound(problem, need, p) > opts.tail_tolerance) ++need;
        throw TailBoundError("tail bound not satisfiable at level " + std::to_string(L) + "; required level " + std::to_string(need), need);
    }
    const auto field = diagonal_signature(problem.path, problem.kernel, L, opts.quad);
    const int m = problem.kernel.rows();
    const auto k = problem.xi.size();
    Eigen::MatrixXd V = problem.xi;  // k x m^n, column w holds A~(e_w) xi
    Eigen::MatrixXd Y = field.level(0) * V.transpose();
    for (int n = 1; n <= L; ++n) {
        Eigen::MatrixXd next(k, V.cols() * m);
        for (Eigen::Index w = 0; w < V.cols(); ++w)
            for (int a = 0; a < m; ++a) next.col(w * m + a) = problem.A[static_cast<std::size_t>(a)] * V.col(w);
        V = std::move(next);
        Y += field.level(n) * V.transpose();
    }
    return {problem.path.grid(), std::move(Y)};
}

Trajectory euler_volterra(const LinearVolterraProblem& problem) {
    validate(problem);
    const auto& g = problem.path.grid();
    const auto n = static_cast<Eigen::Index>(g.nodes());
    const auto k = problem.xi.size();
    const Eigen::MatrixXd dx = problem.path.increments();
    Eigen::MatrixXd Y(n, k);
    Y.row(0) = problem.xi.transpose();
    for (Eigen::Index i = 1; i < n; ++i) {
        Eigen::VectorXd y = problem.xi;
        for (Eigen::Index j = 0; j < i; ++j) {
            const Eigen::VectorXd v = problem.kernel.eval(g[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(j)]) * dx.row(j).transpose();
            Eigen::MatrixXd Av = Eigen::MatrixXd::Zero(k, k);
            for (Eigen::Index a = 0; a < v.size(); ++a) Av += v(a) * problem.A[static_cast<std::size_t>(a)];
            y += Av * Y.row(j).transpose();
        }
        Y.row(i) = y.transpose();
    }
    return {g, std::move(Y)};
}

double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    const std::uint64_t bits = mix(mix(mix(seed) ^ stream) ^ mix(counter ^ 0x632be59bd9b4e019ULL));
    const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

VsdeSample simulate_vsde_sample(const VsdeParams& p, std::size_t sample) {
    const auto& g = p.grid;
    if (g.segments() < 1 || !g.is_uniform(1e-9)) throw std::invalid_argument("simulation grid must be uniform with at least one segment");
    if (p.kernel.rows() != 1 || p.kernel.cols() != 1) throw std::invalid_argument("simulation kernel must be scalar");
    const auto N = static_cast<Eigen::Index>(g.segments());
    const double h = (g.back() - g.front()) / static_cast<double>(N);
    // rk(t) = k((N - t) h), so a contiguous segment of rk dotted with the history gives the weighted sum.
    Eigen::VectorXd rk(N + 1);
    for (Eigen::Index lag = 1; lag <= N; ++lag) rk(N - lag) = p.kernel.eval(static_cast<double>(lag) * h, 0.0)(0, 0);
    rk(N) = 0.0;

    VsdeSample s;
    s.dB.resize(N);
    s.B.resize(N + 1);
    s.Y.resize(N + 1);
    const double sq = std::sqrt(h);
    s.B(0) = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
        s.dB(j) = sq * counter_normal(p.seed, sample, static_cast<std::uint64_t>(j));
        s.B(j + 1) = s.B(j) + s.dB(j);
    }
    Eigen::VectorXd a(N);
    s.Y(0) = p.y0;
    for (Eigen::Index n = 0; n < N; ++n) {
        a(n) = (p.b0 + p.b1 * s.Y(n)) * h + (p.sigma0 + p.sigma1 * s.Y(n)) * s.dB(n);
        s.Y(n + 1) = p.y0 + a.head(n + 1).dot(rk.segment(N - n - 1, n + 1));
    }
    return s;
}

std::vector<VsdeSample> simulate_linear_vsde(const VsdeParams& p) {
    if (p.samples < 1) throw std::invalid_argument("need at least one sample");
    std::vector<VsdeSample> out(p.samples);
    parallel_for(p.samples, [&](std::size_t i) { out[i] = simulate_vsde_sample(p, i); });
    return out;
}

}  // namespace vsig
