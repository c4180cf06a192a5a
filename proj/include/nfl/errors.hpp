#pragma once

#include <stdexcept>
#include <string>

namespace nfl {

// Error taxonomy. The three bases map onto the CLI exit codes:
// ValidationError -> 1, ConditionViolation -> 2, BudgetError -> 3.

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConditionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RatioOutOfRange : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TooFewMaps : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ToleranceNotMet : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnknownFamily : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class BadParameters : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidState : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateDensity : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class Case1ConditionViolated : public ConditionViolation {
 public:
  using ConditionViolation::ConditionViolation;
};

class ChaosConditionViolated : public ConditionViolation {
 public:
  using ConditionViolation::ConditionViolation;
};

class DepthTooLarge : public BudgetError {
 public:
  using BudgetError::BudgetError;
};

class BudgetExceeded : public BudgetError {
 public:
  using BudgetError::BudgetError;
};

class ResolutionOverflow : public BudgetError {
 public:
  using BudgetError::BudgetError;
};

class MaxStageExceeded : public BudgetError {
 public:
  using BudgetError::BudgetError;
};

}  // namespace nfl
