#include "vsig/tensor.hpp"
#include "vsig/tensor_io.hpp"

#include <doctest.h>

using namespace vsig;

TEST_CASE("word indexing round-trips in base-m order") {
    const Word w(3, {2, 1, 3});
    CHECK(w.index() == 1 * 9 + 0 * 3 + 2);
    CHECK(Word::from_index(3, 3, w.index()) == w);
    CHECK(w.str() == "2,1,3");
    CHECK(parse_word(3, "2,1,3") == w);
    CHECK(w.prefix(1).concat(w.suffix(1)) == w);
    CHECK_THROWS_AS(Word(2, {3}), std::out_of_range);
    CHECK(series_size(2, 3) == 15);
}

TEST_CASE("tensor exponential of a sum factorizes and inverts") {
    Eigen::VectorXd a(2), b(2);
    a << 0.3, -0.7;
    b << 1.1, 0.4;
    const int L = 5;
    const auto ea = tensor_exp(a, L), eb = tensor_exp(b, L);
    const auto prod = tensor_mul(ea, eb);
    // Level 1 adds, level 2 picks up the area between the two increments.
    CHECK((prod.level(1) - (a + b)).norm() < 1e-14);
    CHECK(prod[Word(2, {1, 2})] == doctest::Approx(a(0) * a(1) / 2 + b(0) * b(1) / 2 + a(0) * b(1)));
    const auto id = tensor_mul(ea, grouplike_inverse(ea));
    CHECK((id - TensorSeries::unit(2, L)).max_abs() < 1e-14);
    CHECK(ea[Word(2, {1, 1, 1})] == doctest::Approx(std::pow(0.3, 3) / 6));
}

TEST_CASE("flat layout, truncation and json round trip") {
    TensorSeries s(2, 2);
    s[Word(2, {})] = 1;
    s[Word(2, {2})] = 3;
    s[Word(2, {2, 1})] = 5;
    const auto flat = s.flat();
    CHECK(flat.size() == 7);
    CHECK(flat(2) == 3);
    CHECK(flat(3 + 2) == 5);
    CHECK((TensorSeries::from_flat(2, 2, flat) - s).max_abs() == 0);
    CHECK(s.truncated(1).size() == 3);
    CHECK((tensor_from_json(to_json(s)) - s).max_abs() == 0);
    CHECK_THROWS(s.truncated(3));
    CHECK_THROWS(s + TensorSeries(3, 2));

    LinearFunctional l(2);
    l.set(Word(2, {2}), 2.0);
    l.set(Word(2, {2, 1}), -1.0);
    CHECK(apply_functional(l, s) == doctest::Approx(1.0));
    CHECK(inner_product(s, s) == doctest::Approx(1 + 9 + 25));
}
