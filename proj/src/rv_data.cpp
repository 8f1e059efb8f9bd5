#include "csv.hpp"
#include "vsig/errors.hpp"
#include "vsig/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

namespace vsig {

namespace {

/// Days since 1970-01-01 from the leading YYYY-MM-DD of a cell.
bool date_key(const std::string& cell, long& key) {
    if (cell.size() < 10 || cell[4] != '-' || cell[7] != '-') return false;
    int y = 0, m = 0, d = 0;
    try {
        std::size_t used = 0;
        y = std::stoi(cell.substr(0, 4), &used);
        if (used != 4) return false;
        m = std::stoi(cell.substr(5, 2), &used);
        if (used != 2) return false;
        d = std::stoi(cell.substr(8, 2), &used);
        if (used != 2) return false;
    } catch (const std::exception&) {
        return false;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)}, std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return false;
    key = std::chrono::sys_days(ymd).time_since_epoch().count();
    return true;
}

std::size_t column(const detail::CsvTable& t, const std::string& name, const std::string& file, const char* role) {
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) throw DataError(file + ": missing " + role + " column \"" + name + "\"");
    return static_cast<std::size_t>(it - t.header.begin());
}

}  // namespace

RvIngest ingest_rv_csv(const std::string& file, const RvColumns& cols) {
    const auto table = detail::read_csv(file);
    const std::size_t di = column(table, cols.date, file, "date");
    const std::size_t pi = column(table, cols.price, file, "price");
    const std::size_t vi = column(table, cols.vol, file, "volatility");
    std::optional<std::size_t> si;
    if (!cols.symbol_column.empty() && !cols.symbol.empty()) {
        const auto it = std::find(table.header.begin(), table.header.end(), cols.symbol_column);
        if (it != table.header.end()) si = static_cast<std::size_t>(it - table.header.begin());
    }

    struct Row {
        long key;
        std::size_t line;
        std::string date;
        double x, v;
    };
    std::vector<Row> rows;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        const std::string where = file + ":" + std::to_string(table.line_numbers[r]);
        if (cells.size() != table.header.size()) throw DataError(where + ": expected " + std::to_string(table.header.size()) + " cells, found " + std::to_string(cells.size()));
        if (si && cells[*si] != cols.symbol) continue;
        Row row{0, table.line_numbers[r], cells[di], 0.0, 0.0};
        if (!date_key(row.date, row.key)) throw DataError(where + ": unparseable date '" + row.date + "'");
        if (cells[pi].empty()) throw DataError(where + ": empty price cell");
        if (cells[vi].empty()) throw DataError(where + ": empty volatility cell");
        if (!detail::parse_double(cells[pi], row.x) || !std::isfinite(row.x)) throw DataError(where + ": invalid price '" + cells[pi] + "'");
        if (!detail::parse_double(cells[vi], row.v) || !std::isfinite(row.v)) throw DataError(where + ": invalid volatility '" + cells[vi] + "'");
        if (cols.price_transform == "log") {
            if (!(row.x > 0.0)) throw DataError(where + ": price must be positive for the log transform");
            row.x = std::log(row.x);
        }
        if (cols.vol_transform == "sqrt") {
            if (row.v < 0.0) throw DataError(where + ": negative volatility for the sqrt transform");
            row.v = std::sqrt(row.v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw DataError(file + ": fewer than two usable rows");

    RvIngest out;
    if (!std::is_sorted(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.key < b.key; })) {
        std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.key < b.key; });
        out.warnings.push_back(file + ": rows were not in date order and have been sorted");
    }
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].key == rows[i - 1].key)
            throw DataError(file + ": duplicate date " + rows[i].date + " on lines " + std::to_string(rows[i - 1].line) + " and " + std::to_string(rows[i].line));

    auto& s = out.series;
    s.x.resize(static_cast<Eigen::Index>(rows.size()));
    s.v.resize(s.x.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        s.dates.push_back(rows[i].date);
        s.x(static_cast<Eigen::Index>(i)) = rows[i].x;
        s.v(static_cast<Eigen::Index>(i)) = rows[i].v;
    }
    return out;
}

RvSeries synthetic_rv_series(const SyntheticRvParams& p) {
    if (p.lambda.size() != p.alpha.size() || p.lambda.empty()) throw std::invalid_argument("lambda and alpha must have equal non-zero length");
    const double dt = 1.0 / p.time_unit, sq = std::sqrt(dt);
    const double mean_abs = std::sqrt(2.0 / std::acos(-1.0)) * sq;
    double S = 0.0;
    std::vector<double> decay;
    for (std::size_t r = 0; r < p.lambda.size(); ++r) {
        decay.push_back(std::exp(-p.lambda[r] * dt));
        S += p.alpha[r] / (1.0 - decay.back());
    }
    const double gain = p.feedback / (S * mean_abs);
    const double level = p.base / (1.0 - p.feedback);

    RvSeries s;
    const auto n = static_cast<Eigen::Index>(p.days);
    s.x.resize(n);
    s.v.resize(n);
    std::vector<double> h(p.lambda.size());
    // Start the memory at its stationary mean.
    for (std::size_t r = 0; r < h.size(); ++r) h[r] = p.alpha[r] / (1.0 - decay[r]) * level * mean_abs;
    s.x(0) = std::log(1000.0);
    auto day = std::chrono::sys_days(std::chrono::year{2000} / std::chrono::January / 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        while (std::chrono::weekday(day) == std::chrono::Saturday || std::chrono::weekday(day) == std::chrono::Sunday) day += std::chrono::days(1);
        const std::chrono::year_month_day ymd(day);
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        s.dates.emplace_back(buf);
        day += std::chrono::days(1);

        const auto u = static_cast<std::uint64_t>(i);
        double drive = 0.0;
        for (double hr : h) drive += hr;
        const double z = counter_normal(p.seed, 1, u);
        s.v(i) = (p.base + gain * drive) * std::exp(p.noise * z - 0.5 * p.noise * p.noise);
        if (i + 1 < n) {
            const double dx = s.v(i) * sq * counter_normal(p.seed, 0, u);
            s.x(i + 1) = s.x(i) + dx;
            for (std::size_t r = 0; r < h.size(); ++r) h[r] = decay[r] * h[r] + p.alpha[r] * std::abs(dx);
        }
    }
    return s;
}

void write_rv_csv(const RvSeries& s, const std::string& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file);
    out << ",Symbol,close_price,medrv\n";
    for (std::size_t i = 0; i < s.dates.size(); ++i) {
        const auto I = static_cast<Eigen::Index>(i);
        out << s.dates[i] << ",.SPX," << format_number(std::exp(s.x(I))) << ',' << format_number(s.v(I) * s.v(I)) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + file);
}

}  // namespace vsig
