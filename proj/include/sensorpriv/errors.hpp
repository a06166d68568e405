#pragma once

#include <stdexcept>
#include <string>

namespace sensorpriv {

/// Bad argument values (non-positive sigma, empty list, k out of range, ...).
class InvalidParameterError : public std::invalid_argument {
public:
    explicit InvalidParameterError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Configuration outside the supported model class (non-binary common
/// process where a binary one is required, alphabet too large for exact
/// enumeration, ...).
class UnsupportedConfigError : public std::runtime_error {
public:
    explicit UnsupportedConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Quadrature or accumulation drifted past its accuracy budget.
class NumericalAccuracyError : public std::runtime_error {
public:
    explicit NumericalAccuracyError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Channel with p = 1-q: the fused-error bound degenerates to 0/0.
class DegenerateChannelError : public std::domain_error {
public:
    explicit DegenerateChannelError(const std::string& msg) : std::domain_error(msg) {}
};

}  // namespace sensorpriv
