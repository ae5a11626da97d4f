#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace msp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset()` is the byte offset of the problem.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

    [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Evaluation left the real domain (log of non-positive, 0^negative, NaN, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid argument to a numerical routine or an invalid configuration value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Quadrature or estimator failed to reach its tolerance.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace msp
