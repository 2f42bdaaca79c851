#include "estimand_lab/moments.hpp"

#include <cmath>
#include <string>

#include "estimand_lab/tolerances.hpp"

namespace estimand_lab {

MomentSet compute_moments(const Dgp& dgp) {
  const ActionSpace& space = dgp.space();
  const std::size_t n = space.num_atoms();
  const int k = space.k();
  const Eigen::MatrixXd& atoms = space.atom_matrix();  // n x k

  MomentSet m;
  m.p_treat = dgp.law().p.row(1).sum();
  const double p = m.p_treat;

  m.pi.resize(2, n);
  m.p_a.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.pi(0, i) = dgp.p(0, i) / (1.0 - p);
    m.pi(1, i) = dgp.p(1, i) / p;
    m.p_a(i) = dgp.p(0, i) + dgp.p(1, i);
  }

  m.mean_A = atoms.transpose() * m.p_a;
  m.mean_A_given_D1 = atoms.transpose() * m.pi.row(1).transpose();
  m.var_D = p * (1.0 - p);

  // E[D A_j] = p E[A_j | D=1].
  Eigen::VectorXd mean_AD = p * m.mean_A_given_D1;
  m.cov_DA = mean_AD - p * m.mean_A;

  Eigen::MatrixXd e_AA = Eigen::MatrixXd::Zero(k, k);   // E[A A']
  Eigen::MatrixXd e_DAA = Eigen::MatrixXd::Zero(k, k);  // E[D A A']
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd a = atoms.row(i).transpose();
    e_AA += m.p_a(i) * a * a.transpose();
    e_DAA += dgp.p(1, i) * a * a.transpose();
  }
  m.var_A = e_AA - m.mean_A * m.mean_A.transpose();

  // W = (A', (AD)')'; E[W] = (E[A], E[AD]); second moments use D^2 = D.
  Eigen::VectorXd mean_W(2 * k);
  mean_W << m.mean_A, mean_AD;
  Eigen::MatrixXd e_WW(2 * k, 2 * k);
  e_WW.topLeftCorner(k, k) = e_AA;
  e_WW.topRightCorner(k, k) = e_DAA;
  e_WW.bottomLeftCorner(k, k) = e_DAA;
  e_WW.bottomRightCorner(k, k) = e_DAA;
  m.var_W = e_WW - mean_W * mean_W.transpose();

  m.cov_WD.resize(2 * k);
  m.cov_WD.head(k) = mean_AD - p * m.mean_A;   // Cov(A, D)
  m.cov_WD.tail(k) = mean_AD - p * mean_AD;    // Cov(AD, D)

  return m;
}

double mean_Y(const Dgp& dgp) {
  double total = 0.0;
  for (std::size_t i = 0; i < dgp.space().num_atoms(); ++i)
    for (int d = 0; d < 2; ++d) total += dgp.p(d, i) * dgp.m(d, i);
  return total;
}

double cov_D_Y(const Dgp& dgp) {
  double e_dy = 0.0;
  double p = 0.0;
  for (std::size_t i = 0; i < dgp.space().num_atoms(); ++i) {
    e_dy += dgp.p(1, i) * dgp.m(1, i);
    p += dgp.p(1, i);
  }
  return e_dy - p * mean_Y(dgp);
}

namespace {

std::size_t zero_atom_index(const ActionSpace& space) {
  auto idx = space.atom_index(Atom(space.k(), 0));
  // The zero atom is a constructor invariant of ActionSpace.
  return *idx;
}

void check_routes_agree(double direct, double expansion, const std::string& what) {
  if (std::abs(direct - expansion) > tol::kIdentity)
    throw ExpansionMismatch(what + ": direct route " + std::to_string(direct) +
                            " != expansion route " + std::to_string(expansion));
}

}  // namespace

double cov_Aj_Y(const Dgp& dgp, int j) {
  const ActionSpace& space = dgp.space();
  const std::size_t n = space.num_atoms();
  const MomentSet m = compute_moments(dgp);
  const double p = m.p_treat;
  const double ey = mean_Y(dgp);
  const std::size_t zero = zero_atom_index(space);

  double direct = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double aj = space.atom_matrix()(i, j);
    direct += (dgp.p(0, i) * dgp.m(0, i) + dgp.p(1, i) * dgp.m(1, i)) * aj;
  }
  direct -= m.mean_A(j) * ey;

  // Three contrast lines mirroring the decomposition: direct, indirect (within
  // the untreated arm, relative to the zero atom) and selection.
  double expansion = 0.0;
  const double nu000 = dgp.nu(0, 0, zero);
  for (std::size_t i = 0; i < n; ++i) {
    const double centered = space.atom_matrix()(i, j) - m.mean_A(j);
    expansion += p * m.pi(1, i) * centered * (dgp.nu(1, 1, i) - dgp.nu(0, 1, i));
    expansion += m.p_a(i) * centered * (dgp.nu(0, 0, i) - nu000);
    expansion += p * m.pi(1, i) * centered * (dgp.nu(0, 1, i) - dgp.nu(0, 0, i));
  }

  check_routes_agree(direct, expansion, "cov(A_" + std::to_string(j + 1) + ", Y)");
  return direct;
}

double cov_DAj_Y(const Dgp& dgp, int j) {
  const ActionSpace& space = dgp.space();
  const std::size_t n = space.num_atoms();
  const MomentSet m = compute_moments(dgp);
  const double p = m.p_treat;
  const double e1j = m.mean_A_given_D1(j);
  const double ey = mean_Y(dgp);
  const std::size_t zero = zero_atom_index(space);

  double direct = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    direct += dgp.p(1, i) * space.atom_matrix()(i, j) * dgp.m(1, i);
  direct -= p * e1j * ey;

  double expansion = 0.0;
  const double nu000 = dgp.nu(0, 0, zero);
  for (std::size_t i = 0; i < n; ++i) {
    const double aj = space.atom_matrix()(i, j);
    expansion += p * m.pi(1, i) * (aj - p * e1j) * (dgp.nu(1, 1, i) - dgp.nu(0, 1, i));
    expansion += p * (m.pi(1, i) * aj - m.p_a(i) * e1j) * (dgp.nu(0, 0, i) - nu000);
    expansion += p * m.pi(1, i) * (aj - p * e1j) * (dgp.nu(0, 1, i) - dgp.nu(0, 0, i));
  }

  check_routes_agree(direct, expansion, "cov(D A_" + std::to_string(j + 1) + ", Y)");
  return direct;
}

}  // namespace estimand_lab
