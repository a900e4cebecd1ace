#pragma once

#include <stdexcept>
#include <string>

namespace qsense {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// |L| > 1 handed to the outcome model.
class InvalidCoherenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Fisher information evaluated where it diverges (|L| -> 1 with dL != 0).
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Zero Fisher information: no finite precision bound exists.
class NoInformationError : public DomainError {
 public:
  using DomainError::DomainError;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class DegeneratePosteriorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An adaptive run could not continue (posterior lost, non-finite estimate).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qsense
