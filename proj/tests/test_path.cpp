#include "vsig/errors.hpp"
#include "vsig/path.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace vsig;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << body;
    return p.string();
}

}  // namespace

TEST_CASE("time grid lookup") {
    const auto g = TimeGrid::uniform(0.0, 2.0, 4);
    CHECK(g.nodes() == 5);
    CHECK(g.dt(0) == doctest::Approx(0.5));
    CHECK(g.is_uniform());
    CHECK(g.find(1.0) == std::optional<std::size_t>(2));
    CHECK_FALSE(g.find(0.9).has_value());
    CHECK(g.index_of(1.5) == 3);
    CHECK_THROWS(g.index_of(0.9));
    CHECK_THROWS(TimeGrid({0.0, 1.0, 0.5}));
}

TEST_CASE("augmentation appends cumulative variation and time") {
    Eigen::MatrixXd v(4, 1);
    v << 0, 1, -1, 0;
    const Path p(TimeGrid::uniform(0, 3, 3), v);
    const Path a = augment(p, {true, true});
    REQUIRE(a.dim() == 3);
    CHECK(a.values()(3, 1) == doctest::Approx(4.0));
    CHECK(a.values()(2, 2) == doctest::Approx(2.0));
    CHECK(p.slice(1, 3).nodes() == 3);
    CHECK(p.increment(1)(0) == -2);
}

TEST_CASE("reparameterization keeps values and moves nodes") {
    Eigen::MatrixXd v(3, 1);
    v << 0, 1, 4;
    const Path p(TimeGrid::uniform(0, 2, 2), v);
    const Path q = reparameterize(p, [](double t) { return t * t / 2; });
    CHECK(q.values() == p.values());
    CHECK(q.grid()[1] == doctest::Approx(0.5));
    CHECK_THROWS(reparameterize(p, [](double t) { return t / 2; }));
}

TEST_CASE("csv reader reports problems as data errors") {
    const auto ok = read_path_csv(write_temp("vsig_ok.csv", "t,x,y\n0,0,1\n0.5,1,1\n1,2,0\n"));
    CHECK(ok.dim() == 2);
    CHECK(ok.nodes() == 3);
    CHECK_THROWS_AS(read_path_csv(write_temp("vsig_bad1.csv", "t,x\n0,0\n0.5,abc\n")), DataError);
    CHECK_THROWS_AS(read_path_csv(write_temp("vsig_bad2.csv", "t,x\n0,0\n0,1\n")), DataError);
    CHECK_THROWS_AS(read_path_csv("/nonexistent/vsig.csv"), DataError);
}
