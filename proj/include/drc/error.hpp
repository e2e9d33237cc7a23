#pragma once

#include <stdexcept>
#include <string>

namespace drc {

// Base of every error thrown by the library. The CLI maps categories to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes are incompatible.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (log of a nonpositive value, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input that makes an operation ill-defined, e.g. normalizing a zero row.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameter or configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A caller-side precondition was violated (simplex rows, repeated backward, theorem hypothesis).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Generator could not satisfy its geometric constraints.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A numerical invariant broke during a run (NaN/Inf escape).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace drc
