#pragma once

#include <stdexcept>
#include <string>

namespace weibcv {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Result not representable in double precision.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

// Input is well-formed but violates an estimator's precondition
// (e.g. no failures observed).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent data (sample files, configs, count vectors).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative procedure failed: singular matrices, exhausted budgets,
// tuning that never reaches its target band.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace weibcv
