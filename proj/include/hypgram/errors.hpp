#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hypgram {

/// Byte offset range into the source text a node or token came from.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
    bool operator==(const Span&) const = default;
};

class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(msg), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

/// Syntax error from the hypothesis or grammar-file parser. Carries the
/// furthest position reached and the token descriptions expected there.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, Span span, std::vector<std::string> expected = {})
        : Error("parse", msg), span(span), expected(std::move(expected)) {}
    Span span;
    std::vector<std::string> expected;
};

/// Ingestion / schema errors: schema-mismatch, duplicate-id, missing-value,
/// type-parse, unknown-attribute, type-mismatch, empty-table.
class DataError : public Error {
public:
    using Error::Error;
};

/// Runtime evaluation errors: empty-operand, divide-by-zero, row-alignment,
/// degenerate-variance, domain, unknown-function, precondition.
class EvalError : public Error {
public:
    using Error::Error;
};

/// Hypothesis-space errors: space-too-large, unbounded-space,
/// undefined-nonterminal.
class SpaceError : public Error {
public:
    SpaceError(std::string code, const std::string& msg, std::vector<std::string> names = {})
        : Error(std::move(code), msg), names(std::move(names)) {}
    std::vector<std::string> names;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace hypgram
