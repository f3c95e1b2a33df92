#pragma once

#include <stdexcept>
#include <string>

namespace riskprec {

// Base for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A distribution or measure parameter is outside its domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// (1 - alpha) * n leaves no order statistic for the requested tail.
class InsufficientTailError : public Error {
public:
    using Error::Error;
};

class UnsupportedMomentError : public Error {
public:
    using Error::Error;
};

// Quadrature or root finding failed to converge.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Standardizing by a (near) zero point estimate.
class StandardizationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace riskprec
