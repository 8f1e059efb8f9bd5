#include "vsig/errors.hpp"
#include "vsig/experiments.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef VSIG_BUILD_DESCRIBE
#define VSIG_BUILD_DESCRIBE "unknown"
#endif

namespace vsig {

namespace fs = std::filesystem;

namespace {

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_table(const Table& t, const fs::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_cell(cells[i]);
        out << '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) {
        if (r.size() != t.header.size()) throw std::logic_error("table row width differs from header in " + file.string());
        line(r);
    }
    if (!out) throw std::runtime_error("write failed: " + file.string());
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

const char* build_describe() { return VSIG_BUILD_DESCRIBE; }

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void emit_report(const Report& report, const std::string& dir, const std::string& timestamp) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
    nlohmann::json j;
    j["experiment"] = report.experiment;
    j["build"] = build_describe();
    if (!timestamp.empty()) j["timestamp"] = timestamp;
    j["config"] = report.config;
    j["results"] = report.results.is_null() ? nlohmann::json::object() : report.results;
    const fs::path base(dir);
    {
        std::ofstream out(base / "report.json", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (base / "report.json").string());
        out << j.dump(2) << '\n';
    }
    write_table(report.table, base / "table.csv");
    write_table(report.predictions, base / "predictions.csv");
}

nlohmann::json load_config_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file " + file);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(file + ": " + e.what());
    }
}

}  // namespace vsig
