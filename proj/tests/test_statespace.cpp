#include "vsig/engine.hpp"
#include "vsig/statespace.hpp"

#include <doctest.h>

#include <cmath>

using namespace vsig;

namespace {

Path curve(int N) {
    const auto g = TimeGrid::uniform(0.0, 1.0, static_cast<std::size_t>(N));
    Eigen::MatrixXd v(N + 1, 2);
    for (int i = 0; i <= N; ++i) {
        const double t = g[static_cast<std::size_t>(i)];
        v(i, 0) = std::sin(3 * t);
        v(i, 1) = t;
    }
    return Path(g, v);
}

}  // namespace

TEST_CASE("lift agrees with the general engine") {
    const Path x = curve(1000);
    const Kernel k(DiagSumExpKernel{{1.0, 0.5}, {0.5, 3.0}, 2});
    const auto a = lift_solve(x, k, 3).diagonal().terminal();
    const auto b = diagonal_signature(x, k, 3).terminal();
    CHECK((a - b).max_abs() < 1e-4);
}

TEST_CASE("explicit euler stepping is first order and still close") {
    const Path x = curve(2000);
    const Kernel k(ScalarExpKernel{1.0, 2.0, 2});
    const auto e = lift_solve(x, k, 2, StepRule::explicit_euler).diagonal().terminal();
    const auto x2 = lift_solve(x, k, 2).diagonal().terminal();
    CHECK((e - x2).max_abs() < 5e-3);
}

TEST_CASE("conversion from the classical signature matches the lift off the diagonal") {
    const Path x = curve(1000);
    const Kernel k(ScalarExpKernel{1.0, 1.5, 2});
    const auto lift = lift_solve(x, k, 3);
    const auto conv = scalar_exp_convert(classical_signature(x, 3), x.grid(), 1.5, 0.0, 0.5, 0.9);
    CHECK((conv - lift.at_target(500, 0.9)).max_abs() < 1e-5);
}

TEST_CASE("window features equal terminal lifts of slices") {
    const Path x = curve(200);
    const Kernel k(ScalarExpKernel{1.0, 1.0, 2});
    const auto F = lift_window_features(x, k, 2, {{0, 50}, {120, 200}});
    REQUIRE(F.rows() == 2);
    const auto t = lift_terminal(x, k, 2, 120, 200);
    CHECK((F.row(1).transpose() - t.flat()).norm() < 1e-12);
}

TEST_CASE("non state-space kernels are rejected by the lift") {
    CHECK_THROWS(lift_solve(curve(10), Kernel(FractionalKernel{0.7, Eigen::MatrixXd::Identity(2, 2)}), 2));
}
