#pragma once

#include <stdexcept>
#include <string>

namespace fnf {

// Base class for all library errors. Subclasses map onto the CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments or configuration (exit code 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

// A required input file or artifact is absent (exit code 3).
class MissingInputError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, divergence, failed factorizations (exit code 4).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Raw data does not match the expected column manifest.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace fnf
