#pragma once

#include <stdexcept>
#include <string>

namespace preskit {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input text (formula syntax, JSON shape).
struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

/// Structurally well-formed input that violates a semantic invariant
/// (out-of-range element, arity mismatch, non-total table, ...).
struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// The requested computation exceeds the configured work budget.
struct BudgetError : Error {
    explicit BudgetError(const std::string& msg) : Error(msg) {}
};

/// An internal cross-check failed; indicates a bug, not bad input.
struct InternalError : Error {
    explicit InternalError(const std::string& msg) : Error(msg) {}
};

} // namespace preskit
