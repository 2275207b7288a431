#pragma once

#include <stdexcept>
#include <string>

namespace sonar {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the domain of an operator (y <= 0, nu < 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Dimension not supported, or operands of mismatched dimension.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Non-finite samples and similar numerical breakdowns.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Malformed text input. Carries the 1-based line number (0 when unknown).
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

}  // namespace sonar
