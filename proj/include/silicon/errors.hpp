#pragma once

#include <stdexcept>
#include <string>

namespace silicon {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

/// Malformed or inconsistent codebook / config content.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Filesystem and I/O failures.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A referenced column is absent from a delimited data file.
class MissingColumnError : public Error {
 public:
  using Error::Error;
};

/// A variable or question column has no valid (non-sentinel) values.
class AllMissingError : public Error {
 public:
  using Error::Error;
};

/// A marginal probability vector is all zeros.
class EmptyMarginalError : public Error {
 public:
  using Error::Error;
};

/// A profile lacks an assignment for a codebook variable.
class MissingAssignmentError : public Error {
 public:
  using Error::Error;
};

/// Reverse-coded rendering requested for a question without a reverse variant.
class ReverseNotApplicableError : public Error {
 public:
  using Error::Error;
};

/// An option index outside [1, n_options].
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// Invalid backend / run configuration (missing credential, fixture entry, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// No Parsed records available where a distribution is required.
class NoParsedResponsesError : public Error {
 public:
  using Error::Error;
};

/// p(x) > 0 where the reference distribution m(x) = 0.
class SupportViolationError : public Error {
 public:
  using Error::Error;
};

/// Divergence estimates for different questions compared against each other.
class QuestionMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace silicon
