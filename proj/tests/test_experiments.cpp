#include "vsig/errors.hpp"
#include "vsig/experiments.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vsig;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    const auto p = fs::temp_directory_path() / name;
    std::ofstream(p) << body;
    return p.string();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("realized volatility ingestion") {
    const auto f = write_temp("vsig_rv_ok.csv",
                              ",Symbol,close_price,medrv\n"
                              "2001-01-03 00:00:00+00:00,.SPX,100,0.0004\n"
                              "2001-01-03 00:00:00+00:00,.FTSE,50,0.0009\n"
                              "2001-01-04 00:00:00+00:00,.SPX,110,0.0001\n"
                              "2001-01-05 00:00:00+00:00,.SPX,121,0.0009\n");
    const auto r = ingest_rv_csv(f);
    REQUIRE(r.series.x.size() == 3);
    CHECK(r.warnings.empty());
    CHECK(r.series.v(0) == doctest::Approx(0.02));
    CHECK(r.series.x(2) - r.series.x(0) == doctest::Approx(2 * std::log(1.1)));

    const auto shuffled = ingest_rv_csv(write_temp("vsig_rv_shuf.csv", ",Symbol,close_price,medrv\n2001-01-05,.SPX,1,1\n2001-01-03,.SPX,1,4\n2001-01-04,.SPX,1,9\n"));
    CHECK(shuffled.warnings.size() == 1);
    CHECK(shuffled.series.v(0) == doctest::Approx(2.0));
    CHECK(shuffled.series.dates.front() == "2001-01-03");
}

TEST_CASE("ingestion errors name the offending line") {
    try {
        ingest_rv_csv(write_temp("vsig_rv_empty.csv", ",Symbol,close_price,medrv\n2001-01-03,.SPX,1,1\n2001-01-04,.SPX,1,\n"));
        FAIL("expected a data error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
    try {
        ingest_rv_csv(write_temp("vsig_rv_dup.csv", ",Symbol,close_price,medrv\n2001-01-03,.SPX,1,1\n2001-01-03,.SPX,1,2\n"));
        FAIL("expected a data error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("lines 2 and 3") != std::string::npos);
    }
    CHECK_THROWS_AS(ingest_rv_csv(write_temp("vsig_rv_cols.csv", "date,price\n2001-01-03,1\n")), DataError);
}

TEST_CASE("synthetic series round-trips through the csv layout") {
    SyntheticRvParams p;
    p.days = 300;
    const auto s = synthetic_rv_series(p);
    CHECK(s.v.minCoeff() > 0.0);
    CHECK(s.dates[0] == "2000-01-03");
    CHECK(s.dates[5] == "2000-01-10");
    const auto f = (fs::temp_directory_path() / "vsig_syn.csv").string();
    write_rv_csv(s, f);
    const auto back = ingest_rv_csv(f).series;
    CHECK((back.v - s.v).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((back.x - s.x).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(synthetic_rv_series(p).v == s.v);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(parse_sde_config({{"experiment", "sde"}, {"lamda_grid", {1}}}), ConfigError);
    CHECK_THROWS_AS(parse_sde_config({{"experiment", "sde"}, {"lambda_grid", nlohmann::json::array()}}), ConfigError);
    CHECK_THROWS_AS(parse_sde_config({{"experiment", "sde"}, {"train_fraction", 1.5}}), ConfigError);
    CHECK_THROWS_AS(parse_vol_config({{"experiment", "volforecast"}, {"windows", {0}}, {"synthetic", true}}), ConfigError);
    CHECK_THROWS_AS(load_config_file("/nonexistent/config.json"), ConfigError);
    const auto c = parse_sde_config({{"experiment", "sde"}, {"samples", 50}, {"seed", 3}});
    CHECK(c.sim.samples == 50);
    CHECK(parse_sde_config(to_json(c)).sim.seed == 3);
    const auto shipped = parse_vol_config(load_config_file(VSIG_SOURCE_DIR "/configs/volforecast_synthetic.json"));
    CHECK(shipped.synthetic);
    CHECK(parse_sde_config(load_config_file(VSIG_SOURCE_DIR "/configs/sde.json")).L == 5);
    CHECK(parse_vol_config(load_config_file(VSIG_SOURCE_DIR "/configs/volforecast_omi.json")).windows.back() == 240);
}

TEST_CASE("two exponential candidates drop redundant pairs") {
    const auto c = two_exp_candidates({1, 5}, {1, 2}, 3);
    // Two singles plus one lambda pair times alpha ratios {1/2, 1, 2}.
    CHECK(c.size() == 5);
}

TEST_CASE("report emission with empty results") {
    const auto dir = fs::temp_directory_path() / "vsig_report_test";
    fs::remove_all(dir);
    Report r{"demo", {{"a", 1}}, nlohmann::json::object(), {{"x", "y"}, {{"1", "a,b"}}}, {{"t"}, {}}};
    emit_report(r, dir.string(), "");
    const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(j.at("experiment") == "demo");
    CHECK_FALSE(j.contains("timestamp"));
    CHECK(slurp(dir / "table.csv") == "x,y\n1,\"a,b\"\n");
    CHECK(slurp(dir / "predictions.csv") == "t\n");
    fs::remove_all(dir);
}

TEST_CASE("small sde study runs end to end") {
    auto cfg = parse_sde_config({{"experiment", "sde"}, {"samples", 60}, {"N", 100}, {"L", 3}, {"lambda_grid", {0, 2}}, {"eta_grid", {1e-6}}});
    const auto rep = run_sde_experiment(cfg);
    CHECK(rep.table.rows.size() == 3);
    CHECK(rep.predictions.header.size() == 6);
    CHECK(rep.predictions.rows.size() == 6 * 101);
    for (const auto& m : rep.results.at("methods")) CHECK(m.at("test").at("r2_fit_interval").get<double>() > 0.5);
}

TEST_CASE("format_number is shortest round-trip") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1e-10) == "1e-10");
    CHECK(format_number(std::nan("")) == "nan");
}
