#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tsv {

/// Base class for data-dependent failures (bad input files, numeric trouble).
/// Programming errors use the std::logic_error family instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input text that does not follow the declared grammar.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input whose content violates a structural rule.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Geometric query outside the domain where it is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or unusable configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tsv
