#include "estimand_lab/diagnostics.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "estimand_lab/tolerances.hpp"

namespace estimand_lab {

SspVerdict check_ssp(const Dgp& dgp, RegressionKind kind) {
  if (dgp.assumption() != Assumption::strong)
    throw WeakModeUnsupported(
        "sign preservation is a statement about potential-outcome means; "
        "it requires a strong-mode DGP");
  if (kind == RegressionKind::kSat) {
    // Atom-wise estimands: the verdict tracks the least favorable atom.
    const auto reports = decompose_sat(dgp);
    if (reports.empty())
      throw std::invalid_argument("no atom has both arms observed; nothing to check");
    const auto worst = std::min_element(
        reports.begin(), reports.end(),
        [](const DecompositionReport& x, const DecompositionReport& y) { return x.value < y.value; });
    return worst->ssp.value();
  }
  return decompose(dgp, kind).ssp.value();
}

Dgp random_dgp(Rng& rng, const ActionSpace& space, Assumption assumption,
               bool force_positive_contrasts) {
  const std::size_t n = space.num_atoms();
  const std::size_t cells = 2 * n;

  // Dirichlet-uniform law over the (d,a) cells with a 0.01 floor per cell,
  // so full support holds with a comfortable margin.
  const double floor = 0.01;
  std::vector<double> raw = rng.dirichlet_uniform(cells);
  DgpInput input;
  input.coords = space.coords();
  input.joint_support = space.atoms();
  input.assumption = assumption;
  input.full_support = true;
  const double shrink = 1.0 - floor * static_cast<double>(cells);
  std::size_t cell = 0;
  for (int d = 0; d < 2; ++d)
    for (std::size_t i = 0; i < n; ++i)
      input.law.push_back(LawEntry{d, space.atom(i), floor + shrink * raw[cell++]});

  for (std::size_t i = 0; i < n; ++i) {
    const double mu0 = rng.uniform(-1.0, 1.0);
    const double mu1 = force_positive_contrasts ? mu0 + rng.uniform(0.05, 1.0)
                                                : rng.uniform(-1.0, 1.0);
    input.mu.push_back(MeanEntry{0, space.atom(i), mu0});
    input.mu.push_back(MeanEntry{1, space.atom(i), mu1});
  }

  if (assumption == Assumption::weak) {
    for (int dp = 0; dp < 2; ++dp)
      for (int d = 0; d < 2; ++d)
        for (std::size_t i = 0; i < n; ++i)
          input.nu.push_back(NuEntry{dp, d, space.atom(i), rng.uniform(-1.0, 1.0)});
  }
  return build_dgp(input);
}

SearchResult search_negative_weights(RegressionKind kind, int k,
                                     const std::vector<int>& support_sizes,
                                     std::uint64_t trials, std::uint64_t seed,
                                     bool mutually_exclusive) {
  if (kind != RegressionKind::kLong && kind != RegressionKind::kInter)
    throw std::invalid_argument("negative-weight search covers the long and inter kinds only");
  if (static_cast<int>(support_sizes.size()) != k)
    throw std::invalid_argument("need one support size per coordinate");

  SearchResult result;
  result.min_weight_observed = std::numeric_limits<double>::infinity();

  ActionSpace space = [&] {
    if (mutually_exclusive) return mutually_exclusive_space(k);
    std::vector<std::vector<int>> coords;
    for (int size : support_sizes) {
      if (size < 2) throw std::invalid_argument("support sizes must be >= 2");
      std::vector<int> support(size);
      for (int v = 0; v < size; ++v) support[v] = v;
      coords.push_back(std::move(support));
    }
    return ActionSpace(coords, full_product(coords));
  }();

  if (mutually_exclusive_binary(space)) {
    // Provably no negative direct-effect weights exist here; running the
    // trials would only confirm zeros.
    result.note =
        "mutually exclusive binary support: direct-effect weights are "
        "nonnegative by construction; search not run";
    result.min_weight_observed = 0.0;
    return result;
  }

  for (std::uint64_t t = 0; t < trials; ++t) {
    Rng rng(stream_seed(seed, t));
    Dgp dgp = random_dgp(rng, space, Assumption::strong);
    WeightTable weights =
        kind == RegressionKind::kLong ? weights_long(dgp) : weights_inter(dgp);
    const double min_dce = weights.dce.minCoeff();
    result.min_weight_observed = std::min(result.min_weight_observed, min_dce);
    if (min_dce < -tol::kExact)
      result.hits.push_back(SearchHit{t, dgp, std::move(weights), min_dce});
  }
  result.trials_run = trials;
  return result;
}

}  // namespace estimand_lab
