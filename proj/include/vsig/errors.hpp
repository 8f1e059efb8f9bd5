#pragma once

#include <stdexcept>
#include <string>

namespace vsig {

/// Invalid or inconsistent configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or insufficient input data (CLI exit code 3).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace vsig
