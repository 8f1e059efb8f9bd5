#include "vsig/engine.hpp"
#include "vsig/sig_kernel.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <doctest.h>

#include <random>

using namespace vsig;

namespace {

Path line(int N) {
    const auto g = TimeGrid::uniform(0.0, 1.0, static_cast<std::size_t>(N));
    Eigen::MatrixXd v(N + 1, 1);
    for (int i = 0; i <= N; ++i) v(i, 0) = g[static_cast<std::size_t>(i)];
    return Path(g, v);
}

Path walk(unsigned seed, int N) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd(0.0, 0.06);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(N + 1, 2);
    for (int i = 1; i <= N; ++i) v.row(i) = v.row(i - 1) + Eigen::RowVector2d(nd(rng), nd(rng));
    return Path(TimeGrid::uniform(0.0, 1.0, static_cast<std::size_t>(N)), v);
}

}  // namespace

TEST_CASE("constant kernel on x_t = t gives I0(2)") {
    const Kernel one(ConstantKernel{Eigen::MatrixXd::Ones(1, 1)});
    const double exact = boost::math::cyl_bessel_i(0, 2.0);
    CHECK(gram_entry_integral(line(200), line(200), one, one).terminal() == doctest::Approx(exact).epsilon(1e-3));
    const auto s = diagonal_signature(line(500), one, 12).terminal();
    CHECK(gram_entry_truncated(s, s) == doctest::Approx(exact).epsilon(1e-4));
}

TEST_CASE("pde, integral and truncated engines agree for exponential kernels") {
    const Kernel k(ScalarExpKernel{1.0, 1.0, 2});
    const Path a = walk(1, 150), b = walk(2, 150);
    const double integral = gram_entry_integral(a, b, k, k).terminal();
    CHECK(gram_entry_pde_exp(a, b, k).terminal() == doctest::Approx(integral).epsilon(1e-3));
    const double trunc = gram_entry_truncated(diagonal_signature(a, k, 8).terminal(), diagonal_signature(b, k, 8).terminal());
    CHECK(trunc == doctest::Approx(integral).epsilon(1e-3));
}

TEST_CASE("gram matrices are symmetric and positive semidefinite") {
    std::vector<Path> paths;
    for (unsigned i = 0; i < 6; ++i) paths.push_back(walk(10 + i, 60));
    const Kernel k(DiagSumExpKernel{{1.0, 0.5}, {0.5, 3.0}, 2});
    const auto G = gram_matrix(paths, k, GramEngine::integral);
    CHECK((G - G.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(psd_margin(G) > -1e-6);
}
