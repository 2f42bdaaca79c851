#pragma once

#include <stdexcept>
#include <string>

namespace estimand_lab {

// Base for everything raised while validating user-supplied DGP inputs.
// The CLI maps these to exit code 2.
struct DgpValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A probability cell violates positivity: <= 0 in full-support mode, or < 0
// in relaxed-support mode.
struct NonPositiveCell : DgpValidationError {
  using DgpValidationError::DgpValidationError;
};

// The joint law does not sum to one within tolerance.
struct ProbabilitySumError : DgpValidationError {
  using DgpValidationError::DgpValidationError;
};

// A mean/probability table does not cover the declared support.
struct MissingTableEntry : DgpValidationError {
  using DgpValidationError::DgpValidationError;
};

// Strong-exogeneity mode was requested but the supplied conditional means
// disagree with the unconditional potential-outcome means.
struct StrongModeInconsistency : DgpValidationError {
  using DgpValidationError::DgpValidationError;
};

// Config file could not be parsed into a DGP (schema/JSON problems).
struct ConfigError : DgpValidationError {
  using DgpValidationError::DgpValidationError;
};

// A population design matrix fails the positive-definiteness precondition.
// Carries the offending smallest eigenvalue. CLI exit code 3.
struct SingularDesign : std::runtime_error {
  double min_eigenvalue;
  explicit SingularDesign(const std::string& what, double eig)
      : std::runtime_error(what), min_eigenvalue(eig) {}
};

// Sample analogue of SingularDesign (rank-deficient sample design matrix).
struct SingularSampleDesign : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The two independent routes to a population covariance disagreed. This
// signals an implementation bug, never a data condition.
struct ExpansionMismatch : std::logic_error {
  using std::logic_error::logic_error;
};

// An operation defined only for scalar actions (K = 1) was called with K > 1.
struct NotScalarAction : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An operation whose definition requires strong exogeneity was called on a
// weak-mode DGP.
struct WeakModeUnsupported : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace estimand_lab
