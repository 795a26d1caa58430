#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gvspec {

enum class ErrorKind {
    parse,
    validation,
    precondition,
    empty_record,
    degrees_of_freedom,
    domain,
    undefined_spectrum,
    comparison,
    io,
};

/// Base of every error thrown by the library. `kind()` lets callers (the CLI
/// in particular) map failures onto exit codes without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// True for failures caused by the numerical setup rather than the input
    /// record itself (too few points for the model, degenerate spectra, ...).
    bool is_numeric() const noexcept {
        return kind_ == ErrorKind::degrees_of_freedom || kind_ == ErrorKind::domain ||
               kind_ == ErrorKind::undefined_spectrum || kind_ == ErrorKind::comparison;
    }

private:
    ErrorKind kind_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(ErrorKind::parse, "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what) : Error(ErrorKind::precondition, what) {}
};

class EmptyRecordError : public Error {
public:
    explicit EmptyRecordError(const std::string& what) : Error(ErrorKind::empty_record, what) {}
};

class DegreesOfFreedomError : public Error {
public:
    explicit DegreesOfFreedomError(const std::string& what)
        : Error(ErrorKind::degrees_of_freedom, what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class UndefinedSpectrumError : public Error {
public:
    explicit UndefinedSpectrumError(const std::string& what)
        : Error(ErrorKind::undefined_spectrum, what) {}
};

class ComparisonError : public Error {
public:
    explicit ComparisonError(const std::string& what) : Error(ErrorKind::comparison, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

} // namespace gvspec
