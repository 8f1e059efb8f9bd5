#include "vsig/engine.hpp"

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

Path wiggle(int N) {
    const auto g = TimeGrid::uniform(0.0, 1.0, static_cast<std::size_t>(N));
    Eigen::MatrixXd v(N + 1, 2);
    for (int i = 0; i <= N; ++i) {
        const double t = g[static_cast<std::size_t>(i)];
        v(i, 0) = std::sin(5 * t);
        v(i, 1) = t * t - std::cos(2 * t);
    }
    return Path(g, v);
}

const Kernel one(ConstantKernel{Eigen::MatrixXd::Ones(1, 1)});

}  // namespace

TEST_CASE("x_t = t with a constant kernel gives 1/n!") {
    const auto s = diagonal_signature(line(1000), one, 5).terminal();
    double fact = 1;
    for (int n = 1; n <= 5; ++n) {
        fact *= n;
        CHECK(s.level(n)(0) == doctest::Approx(1.0 / fact).epsilon(1e-6));
    }
}

TEST_CASE("exponential kernel level one matches the antiderivative") {
    const Kernel se(ScalarExpKernel{1.0, 1.0, 1});
    const auto d = diagonal_signature(line(1000), se, 2).terminal();
    CHECK(d.level(1)(0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-6));
    const auto off = signature_at(line(1000), se, 2, 0.0, 1.0, 2.0);
    CHECK(off.level(1)(0) == doctest::Approx(std::exp(-1.0) - std::exp(-2.0)).epsilon(1e-6));
}

TEST_CASE("identity kernel reduces to the classical signature") {
    const Path x = wiggle(400);
    const auto field = diagonal_signature(x, Kernel(ConstantKernel{Eigen::MatrixXd::Identity(2, 2)}), 3);
    const auto exact = classical_signature(x, 3);
    CHECK((field.terminal() - exact.back()).max_abs() < 1e-3);
    // classical_signature is exact: it satisfies Chen across any split.
    CHECK((exact.back() - tensor_mul(exact[200], tensor_mul(grouplike_inverse(exact[200]), exact.back()))).max_abs() < 1e-12);
}

TEST_CASE("quadrature rules converge to the same fractional signature") {
    const Kernel fr(FractionalKernel{1.5, Eigen::MatrixXd::Ones(1, 1)});
    const double ref = diagonal_signature(line(2000), fr, 2, {QuadratureRule::product_integration, 1}).terminal().level(2)(0);
    for (auto rule : {QuadratureRule::left, QuadratureRule::trapezoid})
        CHECK(diagonal_signature(line(2000), fr, 2, {rule, 1}).terminal().level(2)(0) == doctest::Approx(ref).epsilon(5e-3));
    // Level one of K(t,s) = (t-s)^{1/2}/Gamma(3/2) against x_t = t is t^{3/2}/Gamma(5/2).
    CHECK(diagonal_signature(line(1000), fr, 1, {QuadratureRule::product_integration, 1}).terminal().level(1)(0) ==
          doctest::Approx(1.0 / std::tgamma(2.5)).epsilon(1e-8));
}

TEST_CASE("features flatten every node") {
    const auto f = diagonal_signature(wiggle(10), Kernel(ScalarExpKernel{1, 1, 2}), 2);
    const auto F = f.features();
    CHECK(F.rows() == 11);
    CHECK(F.cols() == 7);
    CHECK((F.col(0).array() == 1.0).all());
    CHECK(F.row(0).tail(6).isZero());
}

TEST_CASE("chen residual is small for exponential kernels") {
    const Path x = wiggle(600);
    CHECK(chen_residual(x, Kernel(ScalarExpKernel{1, 1, 2}), 3, 0.0, 0.3, 0.6, 1.0) < 1e-6);
}

TEST_CASE("refinement inserts linear nodes") {
    const Path r = refine(line(3), 4);
    CHECK(r.nodes() == 13);
    CHECK(r.values()(5, 0) == doctest::Approx(5.0 / 12));
}
