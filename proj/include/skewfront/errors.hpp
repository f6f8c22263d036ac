#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skewfront {

/// Bad user-supplied configuration (names the offending field).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Loaded data violates a structural invariant.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// The materialized environment is too short for a certified truncation.
struct InsufficientHorizonError : std::runtime_error {
    std::size_t required_horizon;
    InsufficientHorizonError(const std::string& what, std::size_t required)
        : std::runtime_error(what + " (required horizon ~" + std::to_string(required) + ")"),
          required_horizon(required) {}
};

/// PDE front reached the boundary before t_max.
struct DomainTooSmallError : std::runtime_error {
    double suggested_half_width;
    DomainTooSmallError(const std::string& what, double suggested)
        : std::runtime_error(what + " (suggested half width " + std::to_string(suggested) + ")"),
          suggested_half_width(suggested) {}
};

/// Numerical blow-up in a time stepper.
struct StabilityError : std::runtime_error {
    explicit StabilityError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace skewfront
