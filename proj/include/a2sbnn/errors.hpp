#pragma once

#include <stdexcept>
#include <string>

namespace a2sbnn {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Incompatible or invalid shapes / lengths.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Numerical failure: non-finite values, failed factorization, etc.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Input is well-formed but carries no information (e.g. constant vector).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Autodiff graph misuse (differentiating w.r.t. a node not in the graph).
class GraphError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace a2sbnn
