#pragma once

#include <stdexcept>
#include <string>

namespace qcond {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unknown, duplicate or mismatched region ids.
class RegionError : public Error {
 public:
  using Error::Error;
};

// Numerical precondition violated (non-Hermitian, not PSD, bad trace, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Conditioning on a value (or statistic cell) with zero probability.
class UndefinedBranch : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// Inputs lie outside the regime where a formula is derived
// (e.g. non-commuting multiplicative pool).
class ValidityRegimeError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// Mathematically negative verdict surfaced as an error by constructive
// operations (witness of incompatible states, pool with vanishing trace).
class IncompatibleError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. `where` is a JSON-pointer style location.
class ParseError : public Error {
 public:
  ParseError(const std::string& where, const std::string& what)
      : Error(where.empty() ? what : where + ": " + what), where_(where) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

// Well-formed JSON that does not follow the file schema.
class SchemaError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Matrix shape disagrees with the declared regions.
class DimensionError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Parsed input that violates a state/conditional invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace qcond
