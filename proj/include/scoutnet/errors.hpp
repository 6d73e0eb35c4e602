#pragma once

#include <stdexcept>
#include <string>

namespace scoutnet {

// Error taxonomy mirrored by the CLI exit codes: config/usage -> 1,
// data/schema -> 2, numerical failure -> 3.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace scoutnet
