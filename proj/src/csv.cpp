#include "csv.hpp"

#include "vsig/errors.hpp"

#include <charconv>
#include <fstream>

namespace vsig::detail {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    for (auto& s : cells) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
    }
    return cells;
}

CsvTable read_csv(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file);
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = split_csv_line(line);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
            continue;
        }
        t.rows.push_back(std::move(cells));
        t.line_numbers.push_back(lineno);
    }
    if (!have_header) throw DataError(file + ": missing header row");
    return t;
}

bool parse_double(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* b = cell.data();
    const char* e = b + cell.size();
    if (*b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e;
}

}  // namespace vsig::detail
