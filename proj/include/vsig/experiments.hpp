#pragma once

/**
 * @file experiments.hpp
 * @brief Configuration, data ingestion, the two experiment drivers and report emission.
 */

#include "vsig/engine.hpp"
#include "vsig/kernel.hpp"
#include "vsig/learning.hpp"
#include "vsig/volterra.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace vsig {

/// A CSV-shaped table with a fixed column order.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct Report {
    std::string experiment;
    nlohmann::json config;
    nlohmann::json results;
    Table table;
    Table predictions;
};

/// Shortest round-trip decimal form; "nan" for NaN.
std::string format_number(double v);

/// Build identifier baked in at configure time.
const char* build_describe();

/// Writes report.json, table.csv and predictions.csv; timestamp may be empty to omit the field.
void emit_report(const Report& report, const std::string& dir, const std::string& timestamp);

/// Current UTC time in ISO-8601.
std::string utc_timestamp();

// ---------------------------------------------------------------- SDE study

enum class DatasetDump { none, wide, per_sample };

struct SdeConfig {
    VsdeParams sim;
    int L = 5;
    std::vector<double> lambda_grid{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<double> eta_grid{0.0, 1e-10, 1e-8, 1e-6, 1e-4};
    double train_fraction = 0.9;
    /// Share of the training samples held out for hyperparameter selection.
    double validation_fraction = 0.1;
    /// Fitting uses grid nodes in [0, fit_horizon].
    double fit_horizon = 1.0;
    /// Left-point weights reproduce the non-anticipative sums of the simulator.
    QuadratureRule rule = QuadratureRule::left;
    DatasetDump dump = DatasetDump::none;
    std::string output_dir = "sde_out";
};

/// Validates and fills an SDE config from a flat JSON object; throws ConfigError.
SdeConfig parse_sde_config(const nlohmann::json& j);
nlohmann::json to_json(const SdeConfig& c);

/// Time-augmented Brownian path (t, B) of one sample.
Path sde_input_path(const TimeGrid& grid, const VsdeSample& s);

Report run_sde_experiment(const SdeConfig& cfg, const std::vector<VsdeSample>& data);
Report run_sde_experiment(const SdeConfig& cfg);

void write_sde_dataset(const std::vector<VsdeSample>& data, const TimeGrid& grid, const std::string& dir, DatasetDump mode);

// ---------------------------------------------------------- volatility study

struct RvColumns {
    /// Empty name selects a column with an empty header cell.
    std::string date = "";
    std::string price = "close_price";
    std::string vol = "medrv";
    /// Rows are filtered to symbol when both are non-empty and the column exists.
    std::string symbol_column = "Symbol";
    std::string symbol = ".SPX";
    /// "log" or "none".
    std::string price_transform = "log";
    /// "sqrt" or "none".
    std::string vol_transform = "sqrt";
};

struct RvSeries {
    std::vector<std::string> dates;
    Eigen::VectorXd x;  // log-price
    Eigen::VectorXd v;  // realized volatility
};

struct RvIngest {
    RvSeries series;
    std::vector<std::string> warnings;
};

RvIngest ingest_rv_csv(const std::string& file, const RvColumns& cols = {});

struct SyntheticRvParams {
    std::size_t days = 1500;
    std::vector<double> lambda{50.0, 5.0};
    std::vector<double> alpha{1.0, 0.2};
    double base = 0.015;
    /// Fraction of the stationary level driven by past absolute returns.
    double feedback = 0.9;
    double noise = 0.05;
    double time_unit = 252.0;
    std::uint64_t seed = 0;
};

/// Volatility driven by a two-exponential Volterra functional of past absolute log-returns.
RvSeries synthetic_rv_series(const SyntheticRvParams& p);

/// Writes a series in the default column layout understood by ingest_rv_csv.
void write_rv_csv(const RvSeries& s, const std::string& file);

struct VolConfig {
    std::string data;
    RvColumns columns;
    bool synthetic = false;
    SyntheticRvParams synthetic_params;
    std::vector<int> windows{20, 60, 110, 150, 200, 240};
    std::vector<int> horizons{1, 3, 5};
    /// Window used to tune the kernel; 0 means the largest.
    int reference_window = 0;
    double train_fraction = 0.8;
    double validation_fraction = 0.2;
    double time_unit = 252.0;
    std::vector<double> lambda_grid{0.05, 0.1, 0.25, 0.5, 1, 2, 5, 10, 25, 50};
    std::vector<double> alpha_grid{0.1, 0.5, 1, 2, 5, 10, 20};
    std::vector<int> L_grid{2, 3, 4};
    std::vector<double> eta_grid;  // default: 13 log-spaced points in [1e-8, 1e2]
    bool har_raw_lags = false;
    std::uint64_t seed = 0;
    std::string output_dir = "volforecast_out";
};

VolConfig parse_vol_config(const nlohmann::json& j);
nlohmann::json to_json(const VolConfig& c);

/// The two-exponential kernel family with duplicates removed: (lambda_1 < lambda_2, alpha ratio) plus single exponentials.
std::vector<Kernel> two_exp_candidates(const std::vector<double>& lambdas, const std::vector<double>& alphas, int d);

Report run_vol_forecast(const VolConfig& cfg, const RvSeries& series);
Report run_vol_forecast(const VolConfig& cfg);

/// Loads a config file, throwing ConfigError on unreadable or malformed JSON.
nlohmann::json load_config_file(const std::string& file);

}  // namespace vsig
