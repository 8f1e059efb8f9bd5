#include "vsig/volterra.hpp"

#include <doctest.h>

#include <cmath>

using namespace vsig;

namespace {

Path line(int N, double T = 1.0) {
    const auto g = TimeGrid::uniform(0.0, T, static_cast<std::size_t>(N));
    Eigen::MatrixXd v(N + 1, 1);
    for (int i = 0; i <= N; ++i) v(i, 0) = g[static_cast<std::size_t>(i)];
    return Path(g, v);
}

LinearVolterraProblem decay(const Kernel& k, int N = 1000) {
    return {Eigen::VectorXd::Ones(1), {-Eigen::MatrixXd::Ones(1, 1)}, line(N), k};
}

}  // namespace

TEST_CASE("zero drift returns the initial value") {
    LinearVolterraProblem p = decay(Kernel(ConstantKernel{Eigen::MatrixXd::Ones(1, 1)}), 50);
    p.A = {Eigen::MatrixXd::Zero(1, 1)};
    const auto r = resolvent_solve(p, 4);
    CHECK((r.values.array() - 1.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("constant kernel reproduces exponential decay") {
    const auto r = resolvent_solve(decay(Kernel(ConstantKernel{Eigen::MatrixXd::Ones(1, 1)})), 12);
    CHECK(r.values(r.values.rows() - 1, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
    CHECK(r.values(500, 0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-6));
}

TEST_CASE("fractional resolvent agrees with the euler oracle") {
    const auto p = decay(Kernel(FractionalKernel{1.05, Eigen::MatrixXd::Ones(1, 1)}));
    const auto r = resolvent_solve(p, 12, {{QuadratureRule::product_integration, 1}});
    const auto e = euler_volterra(p);
    CHECK((r.values - e.values).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("tail bound rejects a level that is too low") {
    const auto p = decay(Kernel(ConstantKernel{Eigen::MatrixXd::Ones(1, 1)}));
    CHECK(resolvent_tail_bound(p, 12, 2.0) < 1e-4);
    CHECK(resolvent_tail_bound(p, 2, 2.0) > resolvent_tail_bound(p, 6, 2.0));
    try {
        resolvent_solve(p, 1);
        FAIL("expected a tail bound error");
    } catch (const TailBoundError& e) {
        CHECK(e.required_level > 1);
    }
}

TEST_CASE("counter based normals are deterministic with unit moments") {
    CHECK(counter_normal(1, 2, 3) == counter_normal(1, 2, 3));
    CHECK(counter_normal(1, 2, 3) != counter_normal(1, 2, 4));
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = counter_normal(9, 0, static_cast<std::uint64_t>(i));
        s += z;
        s2 += z * z;
    }
    CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("zero volatility simulation follows the deterministic equation") {
    VsdeParams p;
    p.sigma0 = 0.0;
    p.sigma1 = 0.0;
    p.grid = TimeGrid::uniform(0.0, 1.0, 400);
    const auto s = simulate_vsde_sample(p, 0);
    LinearVolterraProblem prob{Eigen::VectorXd::Constant(1, p.y0), {Eigen::MatrixXd::Constant(1, 1, p.b1)}, line(400), p.kernel};
    const auto e = euler_volterra(prob);
    CHECK((s.Y - e.values.col(0)).cwiseAbs().maxCoeff() < 1e-3);
    CHECK(s.B(0) == 0.0);
}

TEST_CASE("simulation is reproducible and matches the mean equation") {
    VsdeParams p;
    p.samples = 400;
    p.grid = TimeGrid::uniform(0.0, 1.0, 200);
    const auto a = simulate_linear_vsde(p), b = simulate_linear_vsde(p);
    CHECK(a[17].Y == b[17].Y);
    CHECK(simulate_vsde_sample(p, 17).Y == a[17].Y);

    // E[Y] solves the deterministic equation with drift b0 + b1 y.
    p.sigma0 = p.sigma1 = 0.0;
    const auto det = simulate_vsde_sample(p, 0).Y;
    double m = 0, m2 = 0;
    for (const auto& s : a) {
        m += s.Y(200);
        m2 += s.Y(200) * s.Y(200);
    }
    m /= a.size();
    const double se = std::sqrt((m2 / a.size() - m * m) / a.size());
    CHECK(std::abs(m - det(200)) < 3.0 * se);
}
