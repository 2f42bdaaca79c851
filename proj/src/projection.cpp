#include "estimand_lab/projection.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "estimand_lab/moments.hpp"
#include "estimand_lab/tolerances.hpp"

namespace estimand_lab {

std::string to_string(RegressionKind kind) {
  switch (kind) {
    case RegressionKind::kShort: return "short";
    case RegressionKind::kLong: return "long";
    case RegressionKind::kInter: return "inter";
    case RegressionKind::kSfe: return "sfe";
    case RegressionKind::kSat: return "sat";
    case RegressionKind::kInterStar: return "inter-star";
  }
  return "?";
}

RegressionKind regression_kind_from_string(const std::string& s) {
  if (s == "short") return RegressionKind::kShort;
  if (s == "long") return RegressionKind::kLong;
  if (s == "inter") return RegressionKind::kInter;
  if (s == "sfe") return RegressionKind::kSfe;
  if (s == "sat") return RegressionKind::kSat;
  if (s == "inter-star") return RegressionKind::kInterStar;
  throw std::invalid_argument("unknown regression kind '" + s +
                              "' (expected short|long|inter|sfe|sat|inter-star)");
}

RegressionSpec make_spec(RegressionKind kind, const ActionSpace& space) {
  if (kind == RegressionKind::kInterStar)
    throw std::invalid_argument("inter-star is a decomposition label, not a regression design");
  RegressionSpec spec{kind, {}};
  const int k = space.k();
  auto add = [&spec](Regressor::Kind rk, int index, std::string name) {
    spec.regressors.push_back(Regressor{rk, index, std::move(name)});
  };
  switch (kind) {
    case RegressionKind::kShort:
      add(Regressor::Kind::constant, 0, "const");
      add(Regressor::Kind::d, 0, "delta");
      break;
    case RegressionKind::kLong:
      add(Regressor::Kind::constant, 0, "const");
      add(Regressor::Kind::d, 0, "delta");
      for (int j = 0; j < k; ++j) add(Regressor::Kind::a_coord, j, "theta" + std::to_string(j + 1));
      break;
    case RegressionKind::kInter:
      add(Regressor::Kind::constant, 0, "const");
      add(Regressor::Kind::d, 0, "delta");
      for (int j = 0; j < k; ++j) add(Regressor::Kind::a_coord, j, "theta" + std::to_string(j + 1));
      for (int j = 0; j < k; ++j) add(Regressor::Kind::ad_coord, j, "lambda" + std::to_string(j + 1));
      break;
    case RegressionKind::kSfe:
      add(Regressor::Kind::d, 0, "delta");
      for (std::size_t i = 0; i < space.num_atoms(); ++i)
        add(Regressor::Kind::atom_indicator, static_cast<int>(i),
            "alpha" + atom_label(space.atom(i)));
      break;
    case RegressionKind::kSat:
      for (std::size_t i = 0; i < space.num_atoms(); ++i)
        add(Regressor::Kind::atom_indicator, static_cast<int>(i),
            "gamma" + atom_label(space.atom(i)));
      for (std::size_t i = 0; i < space.num_atoms(); ++i)
        add(Regressor::Kind::atom_indicator_d, static_cast<int>(i),
            "delta" + atom_label(space.atom(i)));
      break;
    case RegressionKind::kInterStar:
      break;  // unreachable, rejected above
  }
  return spec;
}

double eval_regressor(const Regressor& reg, int d, const Atom& a, std::size_t atom_idx) {
  switch (reg.kind) {
    case Regressor::Kind::constant: return 1.0;
    case Regressor::Kind::d: return static_cast<double>(d);
    case Regressor::Kind::a_coord: return static_cast<double>(a[reg.index]);
    case Regressor::Kind::ad_coord: return static_cast<double>(d * a[reg.index]);
    case Regressor::Kind::atom_indicator:
      return atom_idx == static_cast<std::size_t>(reg.index) ? 1.0 : 0.0;
    case Regressor::Kind::atom_indicator_d:
      return atom_idx == static_cast<std::size_t>(reg.index) && d == 1 ? 1.0 : 0.0;
  }
  return 0.0;
}

double ProjectionResult::coef(const std::string& name) const {
  auto pos = std::find(names.begin(), names.end(), name);
  if (pos == names.end()) throw std::out_of_range("no coefficient named '" + name + "'");
  return coefficients(pos - names.begin());
}

std::optional<double> ProjectionResult::maybe_coef(const std::string& name) const {
  auto pos = std::find(names.begin(), names.end(), name);
  if (pos == names.end()) return std::nullopt;
  return coefficients(pos - names.begin());
}

namespace {

struct PopulationDesign {
  Eigen::MatrixXd e_zz;
  Eigen::VectorXd e_zy;
};

PopulationDesign build_design(const Dgp& dgp, const std::vector<Regressor>& regs) {
  const std::size_t n_atoms = dgp.space().num_atoms();
  const std::size_t n_cols = regs.size();
  PopulationDesign design;
  design.e_zz = Eigen::MatrixXd::Zero(n_cols, n_cols);
  design.e_zy = Eigen::VectorXd::Zero(n_cols);
  Eigen::VectorXd z(n_cols);
  for (std::size_t i = 0; i < n_atoms; ++i) {
    const Atom& a = dgp.space().atom(i);
    for (int d = 0; d < 2; ++d) {
      const double mass = dgp.p(d, i);
      if (mass == 0.0) continue;
      for (std::size_t c = 0; c < n_cols; ++c) z(c) = eval_regressor(regs[c], d, a, i);
      design.e_zz.noalias() += mass * z * z.transpose();
      design.e_zy.noalias() += mass * dgp.m(d, i) * z;
    }
  }
  return design;
}

double min_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace

ProjectionResult project(const Dgp& dgp, const RegressionSpec& spec) {
  std::vector<Regressor> kept;
  std::vector<std::string> dropped;

  // Deterministic column-drop convention for relaxed-support laws, applied in
  // regressor declaration order (atoms lexicographic): an indicator with zero
  // population mass is almost surely zero and is dropped; a saturated
  // interaction column for an atom never observed untreated is collinear with
  // that atom's level column and is absorbed into it.
  for (const Regressor& r : spec.regressors) {
    bool drop = false;
    if (r.kind == Regressor::Kind::atom_indicator) {
      const double mass = dgp.p(0, r.index) + dgp.p(1, r.index);
      drop = mass < tol::kZeroMass;
    } else if (r.kind == Regressor::Kind::atom_indicator_d) {
      drop = dgp.p(1, r.index) < tol::kZeroMass || dgp.p(0, r.index) < tol::kZeroMass;
    }
    if (drop)
      dropped.push_back(r.name);
    else
      kept.push_back(r);
  }

  PopulationDesign design = build_design(dgp, kept);
  const double eig = min_eigenvalue(design.e_zz);
  if (eig <= tol::kMinEigenvalue)
    throw SingularDesign("population design for '" + to_string(spec.kind) +
                         "' is not positive definite (smallest eigenvalue " +
                         std::to_string(eig) + ")",
                         eig);

  ProjectionResult result;
  result.kind = spec.kind;
  result.min_eigenvalue = eig;
  result.dropped = std::move(dropped);
  result.coefficients = design.e_zz.ldlt().solve(design.e_zy);
  result.names.reserve(kept.size());
  for (const auto& r : kept) result.names.push_back(r.name);
  result.max_orthogonality_residual =
      (design.e_zy - design.e_zz * result.coefficients).cwiseAbs().maxCoeff();
  return result;
}

ProjectionResult project(const Dgp& dgp, RegressionKind kind) {
  return project(dgp, make_spec(kind, dgp.space()));
}

double delta_long_closed_form(const Dgp& dgp) {
  const MomentSet m = compute_moments(dgp);
  const double eig_a = min_eigenvalue(m.var_A);
  if (eig_a <= tol::kMinEigenvalue)
    throw SingularDesign("Var(A) is not positive definite (smallest eigenvalue " +
                         std::to_string(eig_a) + ")",
                         eig_a);
  const Eigen::VectorXd big_m = m.var_A.ldlt().solve(m.cov_DA);
  const double denom = m.var_D - big_m.dot(m.cov_DA);
  if (denom <= tol::kMinEigenvalue)
    throw SingularDesign("covariance of (D, A) is not positive definite (residual variance " +
                         std::to_string(denom) + ")",
                         denom);
  const double delta_short = cov_D_Y(dgp) / m.var_D;
  double weighted_cov = 0.0;
  for (int j = 0; j < dgp.space().k(); ++j) weighted_cov += big_m(j) * cov_Aj_Y(dgp, j);
  return (m.var_D * delta_short - weighted_cov) / denom;
}

}  // namespace estimand_lab
