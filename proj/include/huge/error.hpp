#pragma once
#include <stdexcept>
#include <string>

namespace huge {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto distinct exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Out-of-range or inconsistent arguments to an operation.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Malformed or unusable input data (CSV bodies, non-finite values, ...).
class InputError : public Error {
public:
    using Error::Error;
};

/// A data column with no variation; correlation and rank transforms are undefined on it.
class DegenerateColumnError : public InputError {
public:
    DegenerateColumnError(std::string column)
        : InputError("degenerate (constant) column: " + column), column_(std::move(column)) {}

    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

/// Malformed edge-list or summary file.
class FormatError : public InputError {
public:
    using InputError::InputError;
};

/// Invalid combination of pipeline options, detected before any work runs.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Factorization failures and non-positive-definite matrices.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace huge
