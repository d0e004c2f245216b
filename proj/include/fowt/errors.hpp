#pragma once

#include <stdexcept>
#include <string>

namespace fowt {

/// Bad input: malformed files, violated preconditions, invalid configuration.
class ValidationError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed (singular system, non-convergence, factorization failure).
class NumericalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message)
{
  if (!condition)
    throw ValidationError(message);
}

} // namespace fowt
