#pragma once

#include <stdexcept>
#include <string>

namespace drcc {

/// Base of every error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// An invariant of an input object is broken; `field()` names the offending path,
/// e.g. `lines[3].reactance`.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class SingularTopology : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class TooFewSamples : public Error {
 public:
  using Error::Error;
};

class NotSymmetric : public Error {
 public:
  using Error::Error;
};

class RejectionStall : public Error {
 public:
  using Error::Error;
};

class KappaOutOfRange : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

/// Iteration limit or cycling guard tripped inside an LP backend.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Even the widest admissible interval for a slab exceeds its violation budget.
class BudgetInfeasible : public Error {
 public:
  BudgetInfeasible(std::size_t group, std::size_t slab, const std::string& what)
      : Error(what), group_(group), slab_(slab) {}
  std::size_t group() const noexcept { return group_; }
  std::size_t slab() const noexcept { return slab_; }

 private:
  std::size_t group_;
  std::size_t slab_;
};

class InfeasibleRobust : public Error {
 public:
  using Error::Error;
};

class InfeasibleScenario : public Error {
 public:
  using Error::Error;
};

}  // namespace drcc
