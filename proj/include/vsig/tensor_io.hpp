#pragma once

/// JSON form {"m":..,"L":..,"levels":[[..],..]} of a truncated series.

#include "vsig/tensor.hpp"

#include <json.hpp>

namespace vsig {

inline nlohmann::json to_json(const TensorSeries& s) {
    nlohmann::json levels = nlohmann::json::array();
    for (int n = 0; n <= s.depth(); ++n) {
        const auto& lv = s.level(n);
        levels.push_back(std::vector<double>(lv.data(), lv.data() + lv.size()));
    }
    return {{"m", s.alphabet()}, {"L", s.depth()}, {"levels", levels}};
}

inline TensorSeries tensor_from_json(const nlohmann::json& j) {
    const int m = j.at("m").get<int>();
    const int L = j.at("L").get<int>();
    const auto& levels = j.at("levels");
    if (!levels.is_array() || static_cast<int>(levels.size()) != L + 1)
        throw std::invalid_argument("levels array must have L+1 entries");
    TensorSeries s(m, L);
    for (int n = 0; n <= L; ++n) {
        const auto vals = levels[static_cast<std::size_t>(n)].get<std::vector<double>>();
        if (vals.size() != ipow(static_cast<std::size_t>(m), n)) throw std::invalid_argument("level has wrong size");
        for (std::size_t i = 0; i < vals.size(); ++i) s.level(n)(static_cast<Eigen::Index>(i)) = vals[i];
    }
    return s;
}

}  // namespace vsig
