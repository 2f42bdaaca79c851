#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "estimand_lab/dgp.hpp"
#include "estimand_lab/moments.hpp"
#include "estimand_lab/projection.hpp"

namespace estimand_lab {

enum class Sign { negative, zero, positive };

// Strong-sign-preservation verdict: if every partial effect mu(1,a) - mu(0,a)
// is strictly positive, does the estimand come out positive?
// Produced here as part of each report; diagnostics::check_ssp re-exposes it.
struct SspVerdict {
  bool premise_holds = false;  // all contrasts > 0 (strict, small slack)
  Sign estimand_sign = Sign::zero;
  bool violated = false;       // premise holds but estimand is not positive
};

// Per-atom decomposition weights for one regression kind, with the
// normalization sums kept as audit metadata. ind is absent for sfe/sat.
struct WeightTable {
  RegressionKind kind;
  bool has_ind = false;
  Eigen::VectorXd dce;          // one entry per support atom
  Eigen::VectorXd ind;          // empty when has_ind == false
  double denominator = 0.0;     // shared denominator of the weight formulas
  Eigen::VectorXd m_coeffs;     // auxiliary regression coefficients M
  double sum_dce = 0.0;         // = 1 up to roundoff
  double sum_ind = 0.0;         // = 0 up to roundoff
  Eigen::VectorXd sum_a_ind;    // sum_a a * ind(a), componentwise = 0
};

// Estimand value (from the projection solver) split into direct, indirect and
// selection terms via the closed-form weights; the two routes must agree.
struct DecompositionReport {
  RegressionKind kind;
  Assumption assumption;
  double value = 0.0;  // projection coefficient (the estimand itself)
  double dce = 0.0;
  double ind = 0.0;
  double sel = 0.0;
  WeightTable weights;
  // Per-atom contrast lines entering the three terms:
  //   dce line: nu(1,1,a) - nu(0,1,a); ind line: nu(0,0,a) - nu(0,0,0);
  //   sel line: nu(0,1,a) - nu(0,0,a) (shares the dce weights).
  Eigen::VectorXd contrast_dce;
  Eigen::VectorXd contrast_ind;
  Eigen::VectorXd contrast_sel;
  double identity_residual = 0.0;  // |value - (dce + ind + sel)|
  std::optional<SspVerdict> ssp;   // strong mode only
  std::optional<Atom> atom;        // set on per-atom saturated reports
};

WeightTable weights_short(const Dgp& dgp);
WeightTable weights_long(const Dgp& dgp);
WeightTable weights_inter(const Dgp& dgp);
WeightTable weights_sfe(const Dgp& dgp);

DecompositionReport decompose_short(const Dgp& dgp);
DecompositionReport decompose_long(const Dgp& dgp);
DecompositionReport decompose_inter(const Dgp& dgp);
DecompositionReport decompose_sfe(const Dgp& dgp);

// One report per support atom: value = nu(1,1,a) - nu(0,0,a), split into a
// direct term and a selection term; no indirect term exists atom-wise.
std::vector<DecompositionReport> decompose_sat(const Dgp& dgp);

// Scalar-action refinement of the interaction decomposition whose value is
// Delta_inter + E[A] * lambda; weights derived from the same moment blocks.
DecompositionReport inter_star(const Dgp& dgp);

// Mediation-style comparators, defined under strong exogeneity:
//   zeta_bar(d) = sum_a (mu(1,a) - mu(0,a)) pi_d(a)
//   delta_bar(d) = sum_a (mu(d,a) - mu(d,0)) (pi_1(a) - pi_0(a))
// delta_bar(0) coincides with the short decomposition's indirect term.
struct NaturalEffects {
  double zeta_bar0 = 0.0;
  double zeta_bar1 = 0.0;
  double delta_bar0 = 0.0;
  double delta_bar1 = 0.0;
};

NaturalEffects natural_effects(const Dgp& dgp);

// Convenience dispatcher over the scalar-valued kinds (short/long/inter/sfe).
DecompositionReport decompose(const Dgp& dgp, RegressionKind kind);

}  // namespace estimand_lab
