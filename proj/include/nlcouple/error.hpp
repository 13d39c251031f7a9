#pragma once

#include <stdexcept>
#include <string>

namespace nlc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument outside the mathematical domain of an operation (e.g. r < 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A structurally valid request the library does not support (e.g. n = 3).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent run parameters: geometry, horizon, resolution, config keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Factorization or iterative solve failure.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace nlc
