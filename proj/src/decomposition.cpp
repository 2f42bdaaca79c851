#include "estimand_lab/decomposition.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "estimand_lab/tolerances.hpp"

namespace estimand_lab {

namespace {

double min_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

std::size_t zero_atom_index(const ActionSpace& space) {
  return *space.atom_index(Atom(space.k(), 0));
}

void fill_normalization(WeightTable& w, const ActionSpace& space) {
  w.sum_dce = w.dce.sum();
  if (w.has_ind) {
    w.sum_ind = w.ind.sum();
    w.sum_a_ind = space.atom_matrix().transpose() * w.ind;
  } else {
    w.sum_ind = 0.0;
    w.sum_a_ind = Eigen::VectorXd::Zero(space.k());
  }
}

Sign sign_of(double x) {
  if (x > tol::kExact) return Sign::positive;
  if (x < -tol::kExact) return Sign::negative;
  return Sign::zero;
}

SspVerdict make_ssp(const Dgp& dgp, double estimand) {
  SspVerdict v;
  double min_contrast = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dgp.space().num_atoms(); ++i)
    min_contrast = std::min(min_contrast, dgp.mu(1, i) - dgp.mu(0, i));
  v.premise_holds = min_contrast > tol::kExact;
  v.estimand_sign = sign_of(estimand);
  v.violated = v.premise_holds && v.estimand_sign != Sign::positive;
  return v;
}

// Assembles a report from closed-form weights and the projection estimand.
// The three contrast lines are weighted per-atom; the selection line shares
// the direct-effect weights. In strong mode nu is a bit-for-bit copy of mu,
// so every selection contrast is exactly zero.
DecompositionReport make_report(const Dgp& dgp, WeightTable weights, double value) {
  const ActionSpace& space = dgp.space();
  const std::size_t n = space.num_atoms();
  const std::size_t zero = zero_atom_index(space);

  DecompositionReport report;
  report.kind = weights.kind;
  report.assumption = dgp.assumption();
  report.value = value;
  report.contrast_dce.resize(n);
  report.contrast_ind.resize(n);
  report.contrast_sel.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    report.contrast_dce(i) = dgp.nu(1, 1, i) - dgp.nu(0, 1, i);
    report.contrast_ind(i) = dgp.nu(0, 0, i) - dgp.nu(0, 0, zero);
    report.contrast_sel(i) = dgp.nu(0, 1, i) - dgp.nu(0, 0, i);
  }
  report.dce = weights.dce.dot(report.contrast_dce);
  report.ind = weights.has_ind ? weights.ind.dot(report.contrast_ind) : 0.0;
  report.sel = weights.dce.dot(report.contrast_sel);
  report.identity_residual = std::abs(value - (report.dce + report.ind + report.sel));
  if (dgp.assumption() == Assumption::strong) report.ssp = make_ssp(dgp, value);
  report.weights = std::move(weights);
  return report;
}

// Shared guts of the long/inter weight formulas: solves the auxiliary
// regression of D on the covariate block and checks positive definiteness.
struct AuxiliaryFit {
  Eigen::VectorXd m;  // coefficients of the auxiliary regression
  double denom;       // residual variance of D given the block
};

AuxiliaryFit fit_auxiliary(const Eigen::MatrixXd& var_block, const Eigen::VectorXd& cov_block_d,
                           double var_d, const std::string& block_name) {
  const double eig = min_eigenvalue(var_block);
  if (eig <= tol::kMinEigenvalue)
    throw SingularDesign("Var(" + block_name + ") is not positive definite (smallest eigenvalue " +
                         std::to_string(eig) + ")",
                         eig);
  AuxiliaryFit fit;
  fit.m = var_block.ldlt().solve(cov_block_d);
  fit.denom = var_d - fit.m.dot(cov_block_d);
  if (fit.denom <= tol::kMinEigenvalue)
    throw SingularDesign("covariance of (D, " + block_name +
                         ") is not positive definite (residual variance " +
                         std::to_string(fit.denom) + ")",
                         fit.denom);
  return fit;
}

WeightTable weights_long_impl(const Dgp& dgp, const MomentSet& m) {
  const ActionSpace& space = dgp.space();
  const std::size_t n = space.num_atoms();
  const AuxiliaryFit fit = fit_auxiliary(m.var_A, m.cov_DA, m.var_D, "A");
  const double p = m.p_treat;

  WeightTable w;
  w.kind = RegressionKind::kLong;
  w.has_ind = true;
  w.denominator = fit.denom;
  w.m_coeffs = fit.m;
  w.dce.resize(n);
  w.ind.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double shift = (space.atom_matrix().row(i).transpose() - m.mean_A).dot(fit.m);
    w.dce(i) = m.pi(1, i) * (m.var_D - p * shift) / fit.denom;
    w.ind(i) = (m.var_D * (m.pi(1, i) - m.pi(0, i)) - m.p_a(i) * shift) / fit.denom;
  }
  fill_normalization(w, space);
  return w;
}

WeightTable weights_inter_impl(const Dgp& dgp, const MomentSet& m) {
  const ActionSpace& space = dgp.space();
  const std::size_t n = space.num_atoms();
  const int k = space.k();
  const AuxiliaryFit fit = fit_auxiliary(m.var_W, m.cov_WD, m.var_D, "(A, AD)");
  const double p = m.p_treat;

  WeightTable w;
  w.kind = RegressionKind::kInter;
  w.has_ind = true;
  w.denominator = fit.denom;
  w.m_coeffs = fit.m;
  w.dce.resize(n);
  w.ind.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double shift_a = 0.0;       // sum_j M_j (a_j - E[A_j])
    double shift_ad = 0.0;      // sum_j M_{K+j} (a_j - p E[A_j|D=1])
    double shift_ind_a = 0.0;   // sum_j M_j p_a (a_j - E[A_j])
    double shift_ind_ad = 0.0;  // sum_j M_{K+j} (pi_1 a_j - p_a E[A_j|D=1])
    for (int j = 0; j < k; ++j) {
      const double aj = space.atom_matrix()(i, j);
      shift_a += fit.m(j) * (aj - m.mean_A(j));
      shift_ad += fit.m(k + j) * (aj - p * m.mean_A_given_D1(j));
      shift_ind_a += fit.m(j) * m.p_a(i) * (aj - m.mean_A(j));
      shift_ind_ad += fit.m(k + j) * (m.pi(1, i) * aj - m.p_a(i) * m.mean_A_given_D1(j));
    }
    w.dce(i) = m.pi(1, i) * (m.var_D - p * shift_a - p * shift_ad) / fit.denom;
    w.ind(i) =
        (m.var_D * (m.pi(1, i) - m.pi(0, i)) - shift_ind_a - p * shift_ind_ad) / fit.denom;
  }
  fill_normalization(w, space);
  return w;
}

WeightTable weights_sfe_impl(const Dgp& dgp, const MomentSet& m) {
  const ActionSpace& space = dgp.space();
  const std::size_t n = space.num_atoms();

  // pi_1(a) pi_0(a) / p_a, i.e. P{D=1|A=a} P{D=0|A=a} P{A=a} up to the
  // constant p(1-p): the residual-variance weights of D given the strata.
  WeightTable w;
  w.kind = RegressionKind::kSfe;
  w.has_ind = false;
  w.dce.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w.dce(i) = m.p_a(i) > 0.0 ? m.pi(1, i) * m.pi(0, i) / m.p_a(i) : 0.0;
    total += w.dce(i);
  }
  if (total <= tol::kMinEigenvalue)
    throw SingularDesign(
        "treatment is measurable with respect to the strata (E[Var(D|A)] = 0)", total);
  w.dce /= total;
  w.denominator = total;
  fill_normalization(w, space);
  return w;
}

}  // namespace

WeightTable weights_short(const Dgp& dgp) {
  const MomentSet m = compute_moments(dgp);
  WeightTable w;
  w.kind = RegressionKind::kShort;
  w.has_ind = true;
  w.denominator = 1.0;
  w.dce = m.pi.row(1).transpose();
  w.ind = (m.pi.row(1) - m.pi.row(0)).transpose();
  fill_normalization(w, dgp.space());
  return w;
}

WeightTable weights_long(const Dgp& dgp) {
  return weights_long_impl(dgp, compute_moments(dgp));
}

WeightTable weights_inter(const Dgp& dgp) {
  return weights_inter_impl(dgp, compute_moments(dgp));
}

WeightTable weights_sfe(const Dgp& dgp) {
  return weights_sfe_impl(dgp, compute_moments(dgp));
}

DecompositionReport decompose_short(const Dgp& dgp) {
  return make_report(dgp, weights_short(dgp), project(dgp, RegressionKind::kShort).delta());
}

DecompositionReport decompose_long(const Dgp& dgp) {
  return make_report(dgp, weights_long(dgp), project(dgp, RegressionKind::kLong).delta());
}

DecompositionReport decompose_inter(const Dgp& dgp) {
  return make_report(dgp, weights_inter(dgp), project(dgp, RegressionKind::kInter).delta());
}

DecompositionReport decompose_sfe(const Dgp& dgp) {
  return make_report(dgp, weights_sfe(dgp), project(dgp, RegressionKind::kSfe).delta());
}

std::vector<DecompositionReport> decompose_sat(const Dgp& dgp) {
  const ActionSpace& space = dgp.space();
  const ProjectionResult proj = project(dgp, RegressionKind::kSat);
  std::vector<DecompositionReport> reports;
  for (std::size_t i = 0; i < space.num_atoms(); ++i) {
    const auto coef = proj.maybe_coef("delta" + atom_label(space.atom(i)));
    if (!coef) continue;  // atom observed in one arm only; no contrast exists
    DecompositionReport r;
    r.kind = RegressionKind::kSat;
    r.assumption = dgp.assumption();
    r.atom = space.atom(i);
    r.value = *coef;
    r.dce = dgp.nu(1, 1, i) - dgp.nu(0, 1, i);
    r.ind = 0.0;
    r.sel = dgp.nu(0, 1, i) - dgp.nu(0, 0, i);
    r.identity_residual = std::abs(r.value - (r.dce + r.sel));

    WeightTable w;
    w.kind = RegressionKind::kSat;
    w.has_ind = false;
    w.denominator = 1.0;
    w.dce = Eigen::VectorXd::Zero(space.num_atoms());
    w.dce(i) = 1.0;
    fill_normalization(w, space);
    r.weights = std::move(w);

    r.contrast_dce = Eigen::VectorXd::Zero(space.num_atoms());
    r.contrast_ind = Eigen::VectorXd::Zero(space.num_atoms());
    r.contrast_sel = Eigen::VectorXd::Zero(space.num_atoms());
    r.contrast_dce(i) = r.dce;
    r.contrast_sel(i) = r.sel;

    if (dgp.assumption() == Assumption::strong) {
      SspVerdict v = make_ssp(dgp, r.value);
      r.ssp = v;
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

DecompositionReport inter_star(const Dgp& dgp) {
  if (dgp.space().k() != 1)
    throw NotScalarAction("inter-star decomposition requires a scalar action (K = 1)");
  const ActionSpace& space = dgp.space();
  const std::size_t n = space.num_atoms();
  const MomentSet m = compute_moments(dgp);
  WeightTable base = weights_inter_impl(dgp, m);

  const double p = m.p_treat;
  const double var_a = m.var_A(0, 0);
  const double mean_a = m.mean_A(0);
  const double mean_a1 = m.mean_A_given_D1(0);
  const double var_ad = m.var_W(1, 1);
  const double cov_a_ad = m.var_W(0, 1);
  const double cov_a_d = m.cov_WD(0);
  const double cov_ad_d = m.cov_WD(1);

  // det Var(W); positive definiteness was established by the base weights.
  const double det = var_ad * var_a - cov_a_ad * cov_a_ad;
  const double psi = 1.0 + (mean_a / det) * (cov_a_ad * cov_a_d - var_a * cov_ad_d);

  WeightTable w;
  w.kind = RegressionKind::kInterStar;
  w.has_ind = true;
  w.denominator = base.denominator;
  w.m_coeffs = base.m_coeffs;
  w.dce.resize(n);
  w.ind.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = space.atom_matrix()(i, 0);
    w.dce(i) = psi * base.dce(i) +
               (mean_a / det) * (var_a * p * m.pi(1, i) * (a - p * mean_a1) -
                                 cov_a_ad * (a - mean_a) * m.pi(1, i) * p);
    w.ind(i) = psi * base.ind(i) +
               (mean_a / det) * (var_a * p * (m.pi(1, i) * a - m.p_a(i) * mean_a1) -
                                 cov_a_ad * (a - mean_a) * m.p_a(i));
  }
  fill_normalization(w, space);

  const ProjectionResult proj = project(dgp, RegressionKind::kInter);
  const double value = proj.delta() + mean_a * proj.coef("lambda1");
  return make_report(dgp, std::move(w), value);
}

NaturalEffects natural_effects(const Dgp& dgp) {
  if (dgp.assumption() != Assumption::strong)
    throw WeakModeUnsupported(
        "natural-effect comparators are defined under strong exogeneity only");
  const ActionSpace& space = dgp.space();
  const MomentSet m = compute_moments(dgp);
  const std::size_t zero = zero_atom_index(space);

  NaturalEffects effects;
  for (std::size_t i = 0; i < space.num_atoms(); ++i) {
    const double contrast = dgp.mu(1, i) - dgp.mu(0, i);
    effects.zeta_bar0 += contrast * m.pi(0, i);
    effects.zeta_bar1 += contrast * m.pi(1, i);
    const double dpi = m.pi(1, i) - m.pi(0, i);
    effects.delta_bar0 += (dgp.mu(0, i) - dgp.mu(0, zero)) * dpi;
    effects.delta_bar1 += (dgp.mu(1, i) - dgp.mu(1, zero)) * dpi;
  }

  // delta_bar(0) and the short decomposition's indirect term are the same
  // finite sum; a disagreement would mean the two code paths diverged.
  const DecompositionReport short_report = decompose_short(dgp);
  if (std::abs(effects.delta_bar0 - short_report.ind) > tol::kExact)
    throw std::logic_error("delta_bar(0) diverged from the short indirect term");
  return effects;
}

DecompositionReport decompose(const Dgp& dgp, RegressionKind kind) {
  switch (kind) {
    case RegressionKind::kShort: return decompose_short(dgp);
    case RegressionKind::kLong: return decompose_long(dgp);
    case RegressionKind::kInter: return decompose_inter(dgp);
    case RegressionKind::kSfe: return decompose_sfe(dgp);
    case RegressionKind::kInterStar: return inter_star(dgp);
    case RegressionKind::kSat:
      throw std::invalid_argument("saturated reports are per-atom; call decompose_sat");
  }
  throw std::invalid_argument("unknown regression kind");
}

}  // namespace estimand_lab
