#pragma once

namespace estimand_lab::tol {

// Probability tables must sum to one within this.
inline constexpr double kProbSum = 1e-12;

// Smallest eigenvalue a population design matrix must exceed to count as
// positive definite; below it the offending regression raises SingularDesign.
inline constexpr double kMinEigenvalue = 1e-10;

// Exact-identity residuals (decomposition reconstruction, orthogonality,
// dual-route covariance agreement).
inline constexpr double kIdentity = 1e-10;

// Strict-inequality slack for sign-preservation premises and verdicts, and
// for exact equalities that hold symbol-for-symbol.
inline constexpr double kExact = 1e-12;

// Population mass below which an indicator column is almost surely zero and
// is dropped from saturated-style designs.
inline constexpr double kZeroMass = 1e-14;

}  // namespace estimand_lab::tol
