#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace opdim {

/// Base of every error thrown by the library. `kind()` is the stable,
/// machine-readable name used in CLI reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

/// Malformed or ill-sorted input (files, formulas, arguments).
class InputError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "InputError"; }
};

class ParseError : public InputError {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column, std::size_t token)
        : InputError("syntax error at token " + std::to_string(token) + " (line " + std::to_string(line) +
                     ", column " + std::to_string(column) + "): " + message),
          line_(line), column_(column), token_(token) {}

    const char* kind() const noexcept override { return "ParseError"; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    /// 1-based index of the offending token.
    std::size_t token() const noexcept { return token_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::size_t token_;
};

/// A rank was requested for a type with no realization.
class InconsistentType : public InputError {
public:
    InconsistentType() : InputError("InconsistentType: the type has no realization") {}
    const char* kind() const noexcept override { return "InconsistentType"; }
};

class InsufficientCodes : public InputError {
public:
    InsufficientCodes() : InputError("InsufficientCodes: need at least two elements to code the formula selector") {}
    const char* kind() const noexcept override { return "InsufficientCodes"; }
};

/// A configured search or size bound would be exceeded.
class BudgetExceeded : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "BudgetExceeded"; }
};

} // namespace opdim
