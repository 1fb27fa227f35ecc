#ifndef RFIELD_ERRORS_HPP
#define RFIELD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rfield {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite or otherwise malformed input.
class InvalidInputError : public Error {
public:
  explicit InvalidInputError(const std::string& msg) : Error(msg) {}
};

/// Mismatched sizes between operands.
class DimensionError : public Error {
public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

/// Cholesky pivot failure; carries the index of the failing pivot.
class NotPositiveDefiniteError : public Error {
public:
  NotPositiveDefiniteError(const std::string& msg, int pivot)
      : Error(msg + " (pivot " + std::to_string(pivot) + ")"), pivot_index(pivot) {}
  int pivot_index;
};

/// A distribution function was driven into a range its inverse cannot resolve.
class SaturationError : public Error {
public:
  explicit SaturationError(const std::string& msg) : Error(msg) {}
};

/// Requested truncation order exceeds what the data supports.
class TruncationError : public Error {
public:
  TruncationError(const std::string& msg, int achievable)
      : Error(msg + " (achievable " + std::to_string(achievable) + ")"),
        achievable_order(achievable) {}
  int achievable_order;
};

/// Insufficient samples for a statistical estimator.
class InsufficientDataError : public Error {
public:
  explicit InsufficientDataError(const std::string& msg) : Error(msg) {}
};

/// Configuration file problem (unknown key, bad value, missing section).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// A downstream stage was invoked before its producer ran.
class DependencyError : public Error {
public:
  DependencyError(const std::string& msg, const std::string& producer)
      : Error(msg + "; run `" + producer + "` first"), producing_command(producer) {}
  std::string producing_command;
};

/// An internal invariant that should hold by construction was violated.
class InvariantError : public Error {
public:
  explicit InvariantError(const std::string& msg) : Error(msg) {}
};

} // namespace rfield

#endif
