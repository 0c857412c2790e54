#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracmeasure {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failures (factorizations, iterations). The CLI maps these to exit code 2.
class NumericalError : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConvergenceFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoConvergence : public NumericalError {
public:
    NoConvergence(const std::string& what, std::size_t max_iterations, double residual)
        : NumericalError(what), max_iterations_(max_iterations), residual_(residual) {}

    std::size_t max_iterations() const { return max_iterations_; }
    double residual() const { return residual_; }

private:
    std::size_t max_iterations_;
    double residual_;
};

class RootNotBracketed : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

class OutsideDomain : public Error {
public:
    using Error::Error;
};

class SupportTooCloseToBoundary : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class InvalidTopology : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& key, const std::string& reason)
        : Error("config key '" + key + "': " + reason), key_(key) {}

    const std::string& key() const { return key_; }

private:
    std::string key_;
};

} // namespace fracmeasure
