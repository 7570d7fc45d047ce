#pragma once

#include <stdexcept>
#include <string>

namespace evseq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Observation outside the support a model admits given the past.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Operation requested on a state that cannot support it yet (e.g. n < 2).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an API contract (length mismatch, unsorted grid, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or invalid configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to reach its accuracy target.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace evseq
