#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace schottky {

using cplx = std::complex<double>;

inline constexpr cplx two_pi_i{0.0, 2.0 * std::numbers::pi};

// Error hierarchy. Every numerical gate in the library reports failure by
// throwing one of these; callers that want a report instead of a fault
// (the CLI suites) catch `Error`.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PoleError : public Error {
 public:
  using Error::Error;
};

class ParabolicError : public Error {
 public:
  using Error::Error;
};

class DegenerateError : public Error {
 public:
  using Error::Error;
};

class InvalidParamsError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class NonTerminationError : public Error {
 public:
  using Error::Error;
};

class BoundaryError : public Error {
 public:
  using Error::Error;
};

class ResidualError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  using Error::Error;
};

class ConditionError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class PathBlockedError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace schottky
