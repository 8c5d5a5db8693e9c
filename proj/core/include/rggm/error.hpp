#pragma once

#include <stdexcept>
#include <string>

namespace rggm {

// Base of every error raised by the library. The CLI maps the derived
// kinds onto exit codes: validation-like errors exit 1, numerical ones 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// Inconsistent shapes, bad parameters, malformed settings.
class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

// Argument outside an operation's mathematical domain (e.g. delta(i, i)).
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

// A caller broke a documented precondition (e.g. conditioning on an edge
// that is already present).
class ContractError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "contract"; }
};

// Problem too large for an exact routine.
class SizeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "size"; }
};

// Malformed or non-finite input data.
class DataError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "data"; }
};

// Factorization failure or a guard that could not be restored by refresh.
class NumericalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numerical"; }
};

}  // namespace rggm
