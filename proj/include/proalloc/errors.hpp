#pragma once

#include <stdexcept>
#include <string>

namespace proalloc {

// Root of every error thrown by the library. The CLI maps the subclasses
// below onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite or otherwise unusable input vector.
class MalformedInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Centroid/radius requested from a cluster feature with L = 0.
class EmptyCluster : public Error {
 public:
  using Error::Error;
};

// Input outside the domain of the abundance metrics (negative components).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Dataset loading failures.
class DataError : public Error {
 public:
  using Error::Error;
};

class FileUnreadable : public DataError {
 public:
  using DataError::DataError;
};

class MissingColumns : public DataError {
 public:
  using DataError::DataError;
};

class NoRows : public DataError {
 public:
  using DataError::DataError;
};

// Row rejected by the strict loader.
class MalformedRow : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace proalloc
