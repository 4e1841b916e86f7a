#pragma once

#include <stdexcept>
#include <string>

namespace pitl {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An object was used in a state that does not permit the call
/// (second reverse sweep, optimizer step without gradients, ...).
class StateError : public Error {
 public:
  using Error::Error;
};

/// A function under evaluation produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Physical inputs outside the model's domain (negative concentrations).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// ODE integration failed at a particular step.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Layers of a composed model do not chain.
class CompositionError : public Error {
 public:
  using Error::Error;
};

/// Training objective left the finite range.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t epoch)
      : Error(what), epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace pitl
