#pragma once

#include <stdexcept>
#include <string>

namespace mmq {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// precondition on an argument violated
struct DomainError : Error {
    using Error::Error;
};

// iteration failed; carries the last residual
struct NumericalError : Error {
    double residual;
    NumericalError(const std::string& what, double res) : Error(what), residual(res) {}
};

// contour or quadrature truncation above tolerance
struct AccuracyError : Error {
    double tail_bound;
    AccuracyError(const std::string& what, double tail) : Error(what), tail_bound(tail) {}
};

struct UnsupportedRegionError : Error {
    using Error::Error;
};

struct SearchError : Error {
    using Error::Error;
};

struct OverflowError : Error {
    using Error::Error;
};

struct UsageError : Error {
    using Error::Error;
};

} // namespace mmq
