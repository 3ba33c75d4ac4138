#pragma once

#include <stdexcept>
#include <string>

namespace mdiew {

// Base of every error thrown by the library. The CLI maps the subclasses to
// exit codes (see tools/mdiew_cli.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DimensionTooLarge : public DimensionError {
 public:
  using DimensionError::DimensionError;
};

class NotHermitian : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Data-consistency family (exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

class IncompleteInputs : public DataError {
 public:
  using DataError::DataError;
};

class InconsistentData : public DataError {
 public:
  using DataError::DataError;
};

class NonPsdElement : public DataError {
 public:
  using DataError::DataError;
};

class MissingEntries : public DataError {
 public:
  using DataError::DataError;
};

// Solver family (exit code 3).
class SolverFailed : public Error {
 public:
  using Error::Error;
};

class GapTooLarge : public SolverFailed {
 public:
  using SolverFailed::SolverFailed;
};

// Schema / provenance family (exit code 4).
class SchemaError : public Error {
 public:
  using Error::Error;
};

class DigestMismatch : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

}  // namespace mdiew
