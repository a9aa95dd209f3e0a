#pragma once

#include <stdexcept>
#include <string>

namespace cogs {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input violates a documented precondition (bad permutation, bad flag, ...).
class InvalidArgumentError : public Error {
public:
  using Error::Error;
};

/// Degenerate geometry (e.g. all points coincide) that has no defined result.
class DegenerateInputError : public Error {
public:
  using Error::Error;
};

/// File or text input that cannot be parsed in the expected format.
class ParseError : public Error {
public:
  using Error::Error;
};

/// Recognized but unsupported format variant (names the offending type).
class UnsupportedFormatError : public Error {
public:
  using Error::Error;
};

/// Instance too large (or pool too small) for the requested operation.
class SizeLimitError : public Error {
public:
  using Error::Error;
};

/// Non-finite value encountered in a numerical computation.
class NumericalFailureError : public Error {
public:
  using Error::Error;
};

} // namespace cogs
