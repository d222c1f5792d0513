#pragma once

#include <stdexcept>
#include <string>

namespace coevo {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data or configuration violates a documented contract (CLI exit code 1).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed text input; the message names the offending line.
class ParseError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// API used out of order, e.g. applying a transform before fitting it.
class UsageError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Weight estimation diverged (non-finite loss).
class TrainingError : public Error {
public:
    using Error::Error;
};

}  // namespace coevo
