#pragma once

#include <stdexcept>
#include <string>

namespace coveq {

// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

// Mismatched or unsupported matrix dimensions.
struct DimensionError : Error {
    using Error::Error;
};

// Too few observations for the requested estimate.
struct InsufficientDataError : Error {
    using Error::Error;
};

// Data degenerate in a way that makes a statistic undefined
// (all-zero samples, zero variance of a centered product, ...).
struct DegenerateDataError : Error {
    DegenerateDataError(const std::string& msg, long column = -1)
        : Error(msg), column(column) {}
    long column;  // offending variable index when applicable, else -1
};

// Cholesky pivot failure; `pivot` is the index of the failing diagonal.
struct FactorizationError : Error {
    FactorizationError(const std::string& msg, long pivot)
        : Error(msg), pivot(pivot) {}
    long pivot;
};

// Iterative solver ran out of iterations; carries the achieved residual.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, double residual)
        : Error(msg), residual(residual) {}
    double residual;
};

// Invalid model / configuration description.
struct SpecError : Error {
    using Error::Error;
};

// Malformed input file; `line` is 1-based when known, else -1.
struct ParseError : Error {
    ParseError(const std::string& msg, long line = -1)
        : Error(msg), line(line) {}
    long line;
};

// Filesystem failure (open, write, rename).
struct IoError : Error {
    using Error::Error;
};

}  // namespace coveq
