#pragma once

#include <stdexcept>
#include <string>

namespace ratingraph {

// Base class for all library errors. The CLI maps subclasses to exit codes:
// ConfigError -> 2, DependencyError -> 3, everything else -> 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// A required upstream artifact is missing or carries the wrong version.
class DependencyError : public Error {
public:
    using Error::Error;
};

// Malformed input line (JSON or CSV); carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class NodeNotFoundError : public Error {
public:
    using Error::Error;
};

class ConstructionError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class SplitError : public Error {
public:
    using Error::Error;
};

class StatError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Iterative solver failed to reach tolerance; carries the last residual.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, double residual)
        : Error(msg + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

}  // namespace ratingraph
