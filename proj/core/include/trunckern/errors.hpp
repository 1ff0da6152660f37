#pragma once

#include <stdexcept>
#include <string>

namespace trunckern {

/// Raised for invalid configurations: bad parameter ranges, malformed config
/// files, unknown keys. Maps to CLI exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for numerical failures: non-finite values, quadrature
/// non-convergence, iteration limits, violated theorem hypotheses.
/// Maps to CLI exit code 3.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace trunckern
