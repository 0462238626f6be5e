#pragma once

#include <stdexcept>
#include <string>

namespace bgsched {

// Bad user-supplied configuration (flags, config file, parameter ranges).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unusable input data (unreadable trace, too many malformed rows, short history).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A runtime invariant breach; indicates a bug, not bad input.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace bgsched
