#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qi {

/// Argument outside the domain of an operation (e.g. a transmittance above 1).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Visibility is undefined when both fringe extremes vanish.
class UndefinedVisibilityError : public DomainError {
public:
    using DomainError::DomainError;
};

/// No parameter value is consistent with the measurement, e.g. V > epsilon.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A composite result broke a state invariant beyond numerical tolerance.
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Data is well formed but violates a table-level rule (ordering, ranges).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& path, const std::string& what = "cannot open")
        : std::runtime_error(what + ": " + path), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace qi
