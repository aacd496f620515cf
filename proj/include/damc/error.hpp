#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace damc {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes or lengths do not agree.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// A numerical routine failed (non-convergence, non-finite values).
class NumericError : public Error {
  public:
    using Error::Error;
};

/// Invalid configuration or argument values.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Input text could not be parsed. Carries the 1-based line number.
class ParseError : public Error {
  public:
    ParseError(std::size_t line, const std::string &what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// Parsed data violates a domain constraint (e.g. rating outside 1..5).
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// A metric is undefined for its inputs (empty set, zero denominator).
class MetricError : public Error {
  public:
    using Error::Error;
};

/// The input leaves nothing to regularize (e.g. every entry observed).
class DegenerateInputError : public Error {
  public:
    using Error::Error;
};

} // namespace damc
