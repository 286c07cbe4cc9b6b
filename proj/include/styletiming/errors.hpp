#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace styletiming {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& message)
        : Error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Input that parses but violates a contract (ordering, positivity, window bounds...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A required series is absent or does not cover the requested span.
class DataCoverageError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Regressor matrix is rank deficient or the regression is otherwise degenerate.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace styletiming
