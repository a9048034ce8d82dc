#pragma once

#include <stdexcept>
#include <string>

namespace kinprim {

// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Input file does not conform to its schema (names the row/field).
class SchemaError : public Error {
public:
  using Error::Error;
};

// Well-formed input that violates a domain invariant (NaN, too short, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

// Caller-supplied parameter outside its precondition.
class ParameterError : public Error {
public:
  using Error::Error;
};

// Not enough data to fit the requested model.
class InsufficientDataError : public Error {
public:
  using Error::Error;
};

// Artifact fingerprints disagree (e.g. model bundle vs dictionary).
class FingerprintError : public Error {
public:
  using Error::Error;
};

}  // namespace kinprim
