#pragma once

#include <stdexcept>
#include <string>

namespace alfs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed files, out-of-range budgets, invalid configs.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, failed decompositions, aborted solves.
class NumericalError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace detail
}  // namespace alfs
