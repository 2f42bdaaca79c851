#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "estimand_lab/errors.hpp"

namespace estimand_lab {

// One realized value of the action vector A (K integer coordinates).
using Atom = std::vector<int>;

enum class Assumption { weak, strong };

std::string to_string(Assumption a);
Assumption assumption_from_string(const std::string& s);

// Discrete action space: per-coordinate supports plus the declared joint
// support. The joint support is explicit (not implied by the Cartesian
// product) so that mutually-exclusive configurations can carry positive mass
// on every declared atom.
class ActionSpace {
 public:
  ActionSpace(std::vector<std::vector<int>> coords, std::vector<Atom> joint_support);

  int k() const { return static_cast<int>(coords_.size()); }
  std::size_t num_atoms() const { return atoms_.size(); }
  const std::vector<std::vector<int>>& coords() const { return coords_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& atom(std::size_t i) const { return atoms_[i]; }
  std::optional<std::size_t> atom_index(const Atom& a) const;

  // Atom coordinates as an (num_atoms x K) real matrix, for moment algebra.
  const Eigen::MatrixXd& atom_matrix() const { return atom_matrix_; }

 private:
  std::vector<std::vector<int>> coords_;
  std::vector<Atom> atoms_;
  std::map<Atom, std::size_t> index_;
  Eigen::MatrixXd atom_matrix_;
};

// Lexicographically ordered Cartesian product of the given supports.
std::vector<Atom> full_product(const std::vector<std::vector<int>>& coords);

// Binomial(n, pi) probability mass function over {0, ..., n}.
std::vector<double> binomial_pmf(int n, double pi);

// Probability table P{D=d, A=a} over the declared support.
struct JointLaw {
  Eigen::MatrixXd p;         // 2 x num_atoms, row = d
  bool full_support = true;  // when false, zero cells are tolerated
};

// Potential-outcome means mu(d,a), conditional means nu(d',d,a) =
// E[Y(d',a) | D=d, A=a], and Monte Carlo noise scales.
struct OutcomeModel {
  Eigen::MatrixXd mu;        // 2 x num_atoms
  Eigen::MatrixXd nu;        // 4 x num_atoms, row = 2*d_prime + d
  Eigen::MatrixXd noise_sd;  // 2 x num_atoms
};

// A fully specified, validated, immutable data-generating process.
class Dgp {
 public:
  Dgp(ActionSpace space, JointLaw law, OutcomeModel outcome, Assumption assumption)
      : space_(std::move(space)),
        law_(std::move(law)),
        outcome_(std::move(outcome)),
        assumption_(assumption) {}

  const ActionSpace& space() const { return space_; }
  const JointLaw& law() const { return law_; }
  const OutcomeModel& outcome() const { return outcome_; }
  Assumption assumption() const { return assumption_; }

  double p(int d, std::size_t a) const { return law_.p(d, a); }
  double mu(int d, std::size_t a) const { return outcome_.mu(d, a); }
  double nu(int d_prime, int d, std::size_t a) const {
    return outcome_.nu(2 * d_prime + d, a);
  }
  // Observed conditional mean m(d,a) = E[Y | D=d, A=a].
  double m(int d, std::size_t a) const { return nu(d, d, a); }
  double noise_sd(int d, std::size_t a) const { return outcome_.noise_sd(d, a); }

 private:
  ActionSpace space_;
  JointLaw law_;
  OutcomeModel outcome_;
  Assumption assumption_;
};

// Entry-list form of the tables, as they arrive from configs or generators.
struct LawEntry {
  int d;
  Atom a;
  double p;
};
struct MeanEntry {
  int d;
  Atom a;
  double value;
};
struct NuEntry {
  int d_prime;
  int d;
  Atom a;
  double value;
};

struct DgpInput {
  std::vector<std::vector<int>> coords;
  std::vector<Atom> joint_support;  // empty = full Cartesian product
  std::vector<LawEntry> law;
  std::vector<MeanEntry> mu;
  std::vector<NuEntry> nu;  // strong mode: optional, checked against mu
  Assumption assumption = Assumption::strong;
  bool full_support = true;
  std::vector<MeanEntry> noise_sd;  // sparse; missing cells get the default
  double default_noise_sd = 0.5;
};

// Validates every table against the declared support and assembles the DGP.
// In strong mode nu is copied from mu bit-for-bit (after consistency checks),
// so downstream selection terms vanish exactly.
Dgp build_dgp(const DgpInput& input);

// True iff every coordinate support is {0,1} and no declared atom has more
// than one nonzero coordinate.
bool mutually_exclusive_binary(const ActionSpace& space);

// Coordinate supports {0,1}^k with joint support {zero vector, unit vectors}.
ActionSpace mutually_exclusive_space(int k);

std::string atom_label(const Atom& a);

}  // namespace estimand_lab
