#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "estimand_lab/dgp.hpp"

namespace estimand_lab {

// kInterStar labels the scalar-action refinement of the interaction
// decomposition; it is a reporting/CLI kind only and has no design of its own.
enum class RegressionKind { kShort, kLong, kInter, kSfe, kSat, kInterStar };

std::string to_string(RegressionKind kind);
RegressionKind regression_kind_from_string(const std::string& s);

// One column of a design. Indicator columns reference a support atom; the
// coordinate kinds reference an action coordinate j.
struct Regressor {
  enum class Kind { constant, d, a_coord, ad_coord, atom_indicator, atom_indicator_d };
  Kind kind;
  int index = 0;  // coordinate j or atom index, per kind
  std::string name;
};

// Regressor basis derived from the regression kind and the action space:
//   short: 1, D
//   long:  1, D, A_1..A_K
//   inter: 1, D, A_1..A_K, A_1 D..A_K D
//   sfe:   D, { I{A=a} : a in support }          (indicators act as levels)
//   sat:   { I{A=a} }, { I{A=a} D }              (no separate constant)
struct RegressionSpec {
  RegressionKind kind;
  std::vector<Regressor> regressors;
};

RegressionSpec make_spec(RegressionKind kind, const ActionSpace& space);

double eval_regressor(const Regressor& reg, int d, const Atom& a, std::size_t atom_idx);

struct ProjectionResult {
  RegressionKind kind;
  std::vector<std::string> names;       // kept columns, design order
  Eigen::VectorXd coefficients;
  std::vector<std::string> dropped;     // zero-mass / rank-repair drops
  double min_eigenvalue = 0.0;          // of the solved moment matrix
  double max_orthogonality_residual = 0.0;  // max_k |E[(Y - z'b) z_k]|

  double coef(const std::string& name) const;         // throws if absent
  std::optional<double> maybe_coef(const std::string& name) const;
  double delta() const { return coef("delta"); }      // coefficient on D
};

// Solves the population normal equations E[zz']b = E[zY] built from the law
// and the observed conditional means; potential-outcome tables never enter.
ProjectionResult project(const Dgp& dgp, const RegressionSpec& spec);
ProjectionResult project(const Dgp& dgp, RegressionKind kind);

// Closed-form long-regression estimand via the moment identity
// (Var(D) Delta_short - sum_j M_j Cov(A_j, Y)) / (Var(D) - M'Cov(A,D));
// agrees with project(long) on every well-posed DGP.
double delta_long_closed_form(const Dgp& dgp);

}  // namespace estimand_lab
