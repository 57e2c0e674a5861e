#pragma once

#include <stdexcept>
#include <string>

namespace otkit {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value is outside the mathematical domain of an operation
// (negative mass, zero marginal entry under a logarithm, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A tuning parameter violates its contract (gamma <= 0, eps' outside (0, 2), ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent user input (files, graphs, flags).
class InputError : public Error {
 public:
  using Error::Error;
};

// Non-finite values appeared inside an iteration.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The decentralized simulator detected an access-pattern or round violation.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace otkit
