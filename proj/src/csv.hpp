#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace vsig::detail {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

/// Minimal RFC-4180 style reader: comma separated, optional double quotes, blank lines skipped.
CsvTable read_csv(const std::string& file);

std::vector<std::string> split_csv_line(const std::string& line);

/// Parses a full numeric cell; returns false on empty or trailing garbage.
bool parse_double(const std::string& cell, double& out);

}  // namespace vsig::detail
