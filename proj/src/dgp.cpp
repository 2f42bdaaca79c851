#include "estimand_lab/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "estimand_lab/tolerances.hpp"

namespace estimand_lab {

std::string to_string(Assumption a) {
  return a == Assumption::strong ? "strong" : "weak";
}

Assumption assumption_from_string(const std::string& s) {
  if (s == "strong") return Assumption::strong;
  if (s == "weak") return Assumption::weak;
  throw ConfigError("unknown assumption '" + s + "' (expected weak|strong)");
}

std::string atom_label(const Atom& a) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) out << ",";
    out << a[i];
  }
  out << ")";
  return out.str();
}

namespace {

void validate_coords(const std::vector<std::vector<int>>& coords) {
  if (coords.empty()) throw ConfigError("action space needs at least one coordinate");
  for (std::size_t j = 0; j < coords.size(); ++j) {
    const auto& support = coords[j];
    if (support.size() < 2)
      throw ConfigError("coordinate " + std::to_string(j + 1) +
                        " needs at least two support points");
    if (!std::is_sorted(support.begin(), support.end()) ||
        std::adjacent_find(support.begin(), support.end()) != support.end())
      throw ConfigError("coordinate " + std::to_string(j + 1) +
                        " support must be sorted and duplicate-free");
    if (!std::binary_search(support.begin(), support.end(), 0))
      throw ConfigError("coordinate " + std::to_string(j + 1) + " support must contain 0");
    if (support.size() == 2 && (support[0] != 0 || support[1] != 1))
      throw ConfigError("two-point coordinate supports must be {0,1}; coordinate " +
                        std::to_string(j + 1) + " is not");
  }
}

}  // namespace

std::vector<Atom> full_product(const std::vector<std::vector<int>>& coords) {
  std::vector<Atom> atoms{{}};
  for (const auto& support : coords) {
    std::vector<Atom> next;
    next.reserve(atoms.size() * support.size());
    for (const auto& prefix : atoms) {
      for (int v : support) {
        Atom a = prefix;
        a.push_back(v);
        next.push_back(std::move(a));
      }
    }
    atoms = std::move(next);
  }
  return atoms;
}

std::vector<double> binomial_pmf(int n, double pi) {
  if (n < 0) throw ConfigError("binomial n must be nonnegative");
  if (pi < 0.0 || pi > 1.0) throw ConfigError("binomial pi must lie in [0,1]");
  std::vector<double> pmf(n + 1);
  double coeff = 1.0;  // C(n, k), updated multiplicatively
  for (int k = 0; k <= n; ++k) {
    pmf[k] = coeff * std::pow(pi, k) * std::pow(1.0 - pi, n - k);
    coeff = coeff * (n - k) / (k + 1);
  }
  return pmf;
}

ActionSpace::ActionSpace(std::vector<std::vector<int>> coords, std::vector<Atom> joint_support)
    : coords_(std::move(coords)), atoms_(std::move(joint_support)) {
  validate_coords(coords_);
  if (atoms_.empty()) throw ConfigError("joint support must be nonempty");

  const Atom zero(coords_.size(), 0);
  bool has_zero = false;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const Atom& a = atoms_[i];
    if (a.size() != coords_.size())
      throw ConfigError("atom " + atom_label(a) + " has wrong dimension");
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (!std::binary_search(coords_[j].begin(), coords_[j].end(), a[j]))
        throw ConfigError("atom " + atom_label(a) + " leaves coordinate " +
                          std::to_string(j + 1) + "'s support");
    }
    if (!index_.emplace(a, i).second)
      throw ConfigError("duplicate atom " + atom_label(a) + " in joint support");
    if (a == zero) has_zero = true;
  }
  if (!has_zero)
    throw ConfigError("joint support must contain the zero vector");

  atom_matrix_.resize(atoms_.size(), coords_.size());
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    for (std::size_t j = 0; j < coords_.size(); ++j)
      atom_matrix_(i, j) = static_cast<double>(atoms_[i][j]);
}

std::optional<std::size_t> ActionSpace::atom_index(const Atom& a) const {
  auto it = index_.find(a);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool mutually_exclusive_binary(const ActionSpace& space) {
  for (const auto& support : space.coords())
    if (support != std::vector<int>{0, 1}) return false;
  for (const auto& atom : space.atoms()) {
    int nonzero = 0;
    for (int v : atom) nonzero += (v != 0);
    if (nonzero > 1) return false;
  }
  return true;
}

ActionSpace mutually_exclusive_space(int k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  std::vector<std::vector<int>> coords(k, std::vector<int>{0, 1});
  std::vector<Atom> atoms;
  atoms.emplace_back(k, 0);
  for (int j = 0; j < k; ++j) {
    Atom a(k, 0);
    a[j] = 1;
    atoms.push_back(std::move(a));
  }
  return ActionSpace(std::move(coords), std::move(atoms));
}

namespace {

// Fills a 2 x num_atoms table from entry rows, requiring exact coverage.
Eigen::MatrixXd fill_d_table(const ActionSpace& space, const std::vector<MeanEntry>& entries,
                             const std::string& table_name) {
  const std::size_t n = space.num_atoms();
  Eigen::MatrixXd table(2, n);
  std::vector<std::vector<bool>> seen(2, std::vector<bool>(n, false));
  for (const auto& e : entries) {
    if (e.d != 0 && e.d != 1)
      throw ConfigError(table_name + " entry has d=" + std::to_string(e.d));
    auto idx = space.atom_index(e.a);
    if (!idx)
      throw ConfigError(table_name + " entry for undeclared atom " + atom_label(e.a));
    if (seen[e.d][*idx])
      throw ConfigError("duplicate " + table_name + " entry for d=" + std::to_string(e.d) +
                        ", a=" + atom_label(e.a));
    seen[e.d][*idx] = true;
    table(e.d, *idx) = e.value;
  }
  for (int d = 0; d < 2; ++d)
    for (std::size_t i = 0; i < n; ++i)
      if (!seen[d][i])
        throw MissingTableEntry(table_name + " missing entry for d=" + std::to_string(d) +
                                ", a=" + atom_label(space.atom(i)));
  return table;
}

}  // namespace

Dgp build_dgp(const DgpInput& input) {
  std::vector<Atom> support =
      input.joint_support.empty() ? full_product(input.coords) : input.joint_support;
  ActionSpace space(input.coords, std::move(support));
  const std::size_t n = space.num_atoms();

  // Joint law: coverage, positivity, sum to one.
  Eigen::MatrixXd p(2, n);
  {
    std::vector<std::vector<bool>> seen(2, std::vector<bool>(n, false));
    for (const auto& e : input.law) {
      if (e.d != 0 && e.d != 1)
        throw ConfigError("joint law entry has d=" + std::to_string(e.d));
      auto idx = space.atom_index(e.a);
      if (!idx)
        throw ConfigError("joint law entry for undeclared atom " + atom_label(e.a));
      if (seen[e.d][*idx])
        throw ConfigError("duplicate joint law entry for d=" + std::to_string(e.d) +
                          ", a=" + atom_label(e.a));
      seen[e.d][*idx] = true;
      p(e.d, *idx) = e.p;
    }
    for (int d = 0; d < 2; ++d)
      for (std::size_t i = 0; i < n; ++i)
        if (!seen[d][i])
          throw MissingTableEntry("joint law missing entry for d=" + std::to_string(d) +
                                  ", a=" + atom_label(space.atom(i)));
  }
  for (int d = 0; d < 2; ++d) {
    for (std::size_t i = 0; i < n; ++i) {
      const double cell = p(d, i);
      if (cell < 0.0)
        throw NonPositiveCell("negative probability at d=" + std::to_string(d) +
                              ", a=" + atom_label(space.atom(i)));
      if (input.full_support && cell <= 0.0)
        throw NonPositiveCell("zero cell at d=" + std::to_string(d) + ", a=" +
                              atom_label(space.atom(i)) +
                              " violates full support (set full_support=false to allow)");
    }
  }
  const double total = p.sum();
  if (std::abs(total - 1.0) > tol::kProbSum)
    throw ProbabilitySumError("joint law sums to " + std::to_string(total) + ", not 1");
  for (int d = 0; d < 2; ++d)
    if (p.row(d).sum() <= 0.0)
      throw NonPositiveCell("treatment arm d=" + std::to_string(d) + " has zero total mass");

  Eigen::MatrixXd mu = fill_d_table(space, input.mu, "mu");

  // nu(d',d,a), row = 2*d' + d.
  Eigen::MatrixXd nu(4, n);
  if (input.assumption == Assumption::strong) {
    for (const auto& e : input.nu) {
      auto idx = space.atom_index(e.a);
      if (!idx)
        throw ConfigError("nu entry for undeclared atom " + atom_label(e.a));
      if ((e.d != 0 && e.d != 1) || (e.d_prime != 0 && e.d_prime != 1))
        throw ConfigError("nu entry has out-of-range d or d_prime");
      if (std::abs(e.value - mu(e.d_prime, *idx)) > tol::kProbSum)
        throw StrongModeInconsistency(
            "strong mode requires nu(d',d,a) = mu(d',a); mismatch at d'=" +
            std::to_string(e.d_prime) + ", d=" + std::to_string(e.d) +
            ", a=" + atom_label(e.a));
    }
    // Copy mu bit-for-bit so selection contrasts cancel exactly downstream.
    for (int dp = 0; dp < 2; ++dp)
      for (int d = 0; d < 2; ++d) nu.row(2 * dp + d) = mu.row(dp);
  } else {
    std::vector<std::vector<bool>> seen(4, std::vector<bool>(n, false));
    for (const auto& e : input.nu) {
      if ((e.d != 0 && e.d != 1) || (e.d_prime != 0 && e.d_prime != 1))
        throw ConfigError("nu entry has out-of-range d or d_prime");
      auto idx = space.atom_index(e.a);
      if (!idx)
        throw ConfigError("nu entry for undeclared atom " + atom_label(e.a));
      const int row = 2 * e.d_prime + e.d;
      if (seen[row][*idx])
        throw ConfigError("duplicate nu entry for d'=" + std::to_string(e.d_prime) +
                          ", d=" + std::to_string(e.d) + ", a=" + atom_label(e.a));
      seen[row][*idx] = true;
      nu(row, *idx) = e.value;
    }
    for (int dp = 0; dp < 2; ++dp)
      for (int d = 0; d < 2; ++d)
        for (std::size_t i = 0; i < n; ++i)
          if (!seen[2 * dp + d][i])
            throw MissingTableEntry("weak mode requires the full nu table; missing d'=" +
                                    std::to_string(dp) + ", d=" + std::to_string(d) +
                                    ", a=" + atom_label(space.atom(i)));
  }

  Eigen::MatrixXd noise = Eigen::MatrixXd::Constant(2, n, input.default_noise_sd);
  for (const auto& e : input.noise_sd) {
    if (e.d != 0 && e.d != 1)
      throw ConfigError("noise_sd entry has d=" + std::to_string(e.d));
    auto idx = space.atom_index(e.a);
    if (!idx)
      throw ConfigError("noise_sd entry for undeclared atom " + atom_label(e.a));
    if (e.value < 0.0) throw ConfigError("noise_sd must be nonnegative");
    noise(e.d, *idx) = e.value;
  }
  if (input.default_noise_sd < 0.0) throw ConfigError("noise_sd must be nonnegative");

  return Dgp(std::move(space), JointLaw{std::move(p), input.full_support},
             OutcomeModel{std::move(mu), std::move(nu), std::move(noise)}, input.assumption);
}

}  // namespace estimand_lab
