#include "vsig/errors.hpp"
#include "vsig/experiments.hpp"

#include <cmath>
#include <set>

namespace vsig {

namespace {

/// Reads fields from a flat JSON object and rejects keys nobody asked for.
class Fields {
public:
    Fields(const nlohmann::json& j, std::string what) : j_(j), what_(std::move(what)) {
        if (!j.is_object()) throw ConfigError(what_ + " must be a JSON object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(what_ + ": field \"" + key + "\" has the wrong type (" + e.what() + ")");
        }
    }

    const nlohmann::json* raw(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError(what_ + ": unknown field \"" + k + "\"");
    }

private:
    const nlohmann::json& j_;
    std::string what_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

void require_fraction(double f, const char* name) { require(f > 0.0 && f < 1.0, std::string(name) + " must lie in (0,1)"); }

template <class T>
void require_grid(const std::vector<T>& g, const char* name, bool allow_zero) {
    require(!g.empty(), std::string("empty hyperparameter grid: ") + name);
    for (T v : g) require(std::isfinite(static_cast<double>(v)) && (allow_zero ? v >= 0 : v > 0), std::string(name) + " entries must be " + (allow_zero ? "non-negative" : "positive"));
}

void check_experiment(Fields& f, const char* expected) {
    std::string e = expected;
    f.get("experiment", e);
    require(e == expected, std::string("config is for experiment \"") + e + "\", expected \"" + expected + "\"");
}

QuadratureRule parse_rule(const std::string& s) {
    if (s == "left") return QuadratureRule::left;
    if (s == "trapezoid") return QuadratureRule::trapezoid;
    if (s == "product_integration") return QuadratureRule::product_integration;
    throw ConfigError("unknown quadrature rule \"" + s + "\"");
}

std::string rule_name(QuadratureRule r) {
    switch (r) {
        case QuadratureRule::left: return "left";
        case QuadratureRule::trapezoid: return "trapezoid";
        case QuadratureRule::product_integration: return "product_integration";
    }
    return "?";
}

std::string dump_name(DatasetDump d) {
    switch (d) {
        case DatasetDump::none: return "none";
        case DatasetDump::wide: return "wide";
        case DatasetDump::per_sample: return "per_sample";
    }
    return "?";
}

}  // namespace

SdeConfig parse_sde_config(const nlohmann::json& j) {
    Fields f(j, "sde config");
    check_experiment(f, "sde");
    SdeConfig c;
    auto& s = c.sim;
    f.get("seed", s.seed);
    f.get("output_dir", c.output_dir);
    f.get("Y0", s.y0);
    f.get("b0", s.b0);
    f.get("b1", s.b1);
    f.get("sigma0", s.sigma0);
    f.get("sigma1", s.sigma1);
    if (const auto* k = f.raw("kernel")) s.kernel = kernel_from_json(*k, 1);
    double T = 2.0;
    std::size_t N = 1000;
    f.get("T", T);
    f.get("N", N);
    f.get("samples", s.samples);
    f.get("L", c.L);
    f.get("lambda_grid", c.lambda_grid);
    f.get("eta_grid", c.eta_grid);
    f.get("train_fraction", c.train_fraction);
    f.get("validation_fraction", c.validation_fraction);
    f.get("fit_horizon", c.fit_horizon);
    std::string rule = rule_name(c.rule), dump = dump_name(c.dump);
    f.get("quadrature", rule);
    f.get("dump_dataset", dump);
    f.finish();

    c.rule = parse_rule(rule);
    if (dump == "none") c.dump = DatasetDump::none;
    else if (dump == "wide") c.dump = DatasetDump::wide;
    else if (dump == "per_sample") c.dump = DatasetDump::per_sample;
    else throw ConfigError("dump_dataset must be none, wide or per_sample");

    require(s.kernel.rows() == 1 && s.kernel.cols() == 1, "the SDE kernel must be scalar");
    require(T > 0.0 && std::isfinite(T), "T must be positive");
    require(N >= 2, "N must be at least 2");
    require(s.samples >= 1, "samples must be at least 1");
    require(c.L >= 1 && c.L <= 8, "L must lie in [1,8]");
    require_fraction(c.train_fraction, "train_fraction");
    require_fraction(c.validation_fraction, "validation_fraction");
    require_grid(c.lambda_grid, "lambda_grid", true);
    require_grid(c.eta_grid, "eta_grid", true);
    s.grid = TimeGrid::uniform(0.0, T, N);
    require(c.fit_horizon > 0.0 && c.fit_horizon <= T, "fit_horizon must lie in (0,T]");
    try {
        (void)s.grid.index_of(c.fit_horizon);
    } catch (const std::exception&) {
        throw ConfigError("fit_horizon is not a grid node");
    }
    const auto train = static_cast<std::size_t>(std::floor(c.train_fraction * static_cast<double>(s.samples)));
    const auto val = static_cast<std::size_t>(std::floor(c.validation_fraction * static_cast<double>(train)));
    require(val >= 1 && train - val >= 2 && s.samples - train >= 2, "too few samples for the train/validation/test split");
    return c;
}

nlohmann::json to_json(const SdeConfig& c) {
    const auto& s = c.sim;
    return {{"experiment", "sde"},
            {"seed", s.seed},
            {"output_dir", c.output_dir},
            {"Y0", s.y0},
            {"b0", s.b0},
            {"b1", s.b1},
            {"sigma0", s.sigma0},
            {"sigma1", s.sigma1},
            {"kernel", kernel_to_json(s.kernel)},
            {"T", s.grid.back() - s.grid.front()},
            {"N", s.grid.segments()},
            {"samples", s.samples},
            {"L", c.L},
            {"lambda_grid", c.lambda_grid},
            {"eta_grid", c.eta_grid},
            {"train_fraction", c.train_fraction},
            {"validation_fraction", c.validation_fraction},
            {"fit_horizon", c.fit_horizon},
            {"quadrature", rule_name(c.rule)},
            {"dump_dataset", dump_name(c.dump)}};
}

VolConfig parse_vol_config(const nlohmann::json& j) {
    Fields f(j, "volforecast config");
    check_experiment(f, "volforecast");
    VolConfig c;
    f.get("seed", c.seed);
    f.get("output_dir", c.output_dir);
    f.get("data", c.data);
    f.get("date_column", c.columns.date);
    f.get("price_column", c.columns.price);
    f.get("vol_column", c.columns.vol);
    f.get("symbol_column", c.columns.symbol_column);
    f.get("symbol", c.columns.symbol);
    f.get("price_transform", c.columns.price_transform);
    f.get("vol_transform", c.columns.vol_transform);
    if (const auto* syn = f.raw("synthetic")) {
        if (syn->is_boolean()) {
            c.synthetic = syn->get<bool>();
        } else {
            c.synthetic = true;
            Fields g(*syn, "synthetic block");
            auto& p = c.synthetic_params;
            g.get("days", p.days);
            g.get("lambda", p.lambda);
            g.get("alpha", p.alpha);
            g.get("base", p.base);
            g.get("feedback", p.feedback);
            g.get("noise", p.noise);
            g.finish();
        }
    }
    f.get("windows", c.windows);
    f.get("horizons", c.horizons);
    f.get("reference_window", c.reference_window);
    f.get("train_fraction", c.train_fraction);
    f.get("validation_fraction", c.validation_fraction);
    f.get("time_unit", c.time_unit);
    f.get("lambda_grid", c.lambda_grid);
    f.get("alpha_grid", c.alpha_grid);
    f.get("L_grid", c.L_grid);
    f.get("eta_grid", c.eta_grid);
    f.get("har_raw_lags", c.har_raw_lags);
    f.finish();

    if (c.eta_grid.empty() && !j.contains("eta_grid"))
        for (int k = 0; k < 13; ++k) c.eta_grid.push_back(std::pow(10.0, -8.0 + 10.0 * k / 12.0));
    c.synthetic_params.seed = c.seed;
    c.synthetic_params.time_unit = c.time_unit;

    require(c.columns.price_transform == "log" || c.columns.price_transform == "none", "price_transform must be log or none");
    require(c.columns.vol_transform == "sqrt" || c.columns.vol_transform == "none", "vol_transform must be sqrt or none");
    require_grid(c.windows, "windows", false);
    require_grid(c.horizons, "horizons", false);
    require_grid(c.lambda_grid, "lambda_grid", true);
    require_grid(c.alpha_grid, "alpha_grid", false);
    require_grid(c.L_grid, "L_grid", false);
    require_grid(c.eta_grid, "eta_grid", true);
    for (int L : c.L_grid) require(L <= 6, "L_grid entries must not exceed 6");
    require_fraction(c.train_fraction, "train_fraction");
    require_fraction(c.validation_fraction, "validation_fraction");
    require(c.time_unit > 0.0, "time_unit must be positive");
    require(c.reference_window >= 0, "reference_window must be non-negative");
    const auto& sp = c.synthetic_params;
    require(sp.lambda.size() == sp.alpha.size() && !sp.lambda.empty(), "synthetic lambda and alpha must have equal non-zero length");
    require(sp.days >= 100 && sp.feedback >= 0.0 && sp.feedback < 1.0 && sp.noise >= 0.0 && sp.base > 0.0, "invalid synthetic parameters");
    return c;
}

nlohmann::json to_json(const VolConfig& c) {
    const auto& sp = c.synthetic_params;
    nlohmann::json j = {{"experiment", "volforecast"},
                        {"seed", c.seed},
                        {"output_dir", c.output_dir},
                        {"data", c.data},
                        {"date_column", c.columns.date},
                        {"price_column", c.columns.price},
                        {"vol_column", c.columns.vol},
                        {"symbol_column", c.columns.symbol_column},
                        {"symbol", c.columns.symbol},
                        {"price_transform", c.columns.price_transform},
                        {"vol_transform", c.columns.vol_transform},
                        {"windows", c.windows},
                        {"horizons", c.horizons},
                        {"reference_window", c.reference_window},
                        {"train_fraction", c.train_fraction},
                        {"validation_fraction", c.validation_fraction},
                        {"time_unit", c.time_unit},
                        {"lambda_grid", c.lambda_grid},
                        {"alpha_grid", c.alpha_grid},
                        {"L_grid", c.L_grid},
                        {"eta_grid", c.eta_grid},
                        {"har_raw_lags", c.har_raw_lags}};
    if (c.synthetic)
        j["synthetic"] = {{"days", sp.days}, {"lambda", sp.lambda}, {"alpha", sp.alpha}, {"base", sp.base}, {"feedback", sp.feedback}, {"noise", sp.noise}};
    else
        j["synthetic"] = false;
    return j;
}

}  // namespace vsig
