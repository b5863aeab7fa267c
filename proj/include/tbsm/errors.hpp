#pragma once

#include <stdexcept>
#include <string>

namespace tbsm {

// Base for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension / shape mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Value outside an operation's mathematical domain (e.g. log of x <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

// l2 normalization of a vector whose norm is at or below the epsilon threshold.
class DegenerateVectorError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Caller violated an API contract (wrong sequence length, non-scalar loss, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Embedding table index out of bounds; message names the table and index.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Metric undefined for the given inputs (e.g. AUC on a single-class set).
class MetricError : public Error {
 public:
  using Error::Error;
};

// Text-format parse failure; carries 1-based line number.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// File could not be opened / read / written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Invalid or incomplete experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tbsm
