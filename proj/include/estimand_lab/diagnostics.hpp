#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "estimand_lab/decomposition.hpp"
#include "estimand_lab/dgp.hpp"
#include "estimand_lab/rng.hpp"

namespace estimand_lab {

// Evaluates strong sign preservation for the given estimand kind. The
// premise is about potential-outcome means, so the DGP must be strong-mode.
// For the saturated kind the verdict uses the smallest per-atom effect.
SspVerdict check_ssp(const Dgp& dgp, RegressionKind kind);

struct SearchHit {
  std::uint64_t trial = 0;
  Dgp dgp;
  WeightTable weights;
  double min_dce = 0.0;
};

struct SearchResult {
  std::uint64_t trials_run = 0;
  std::vector<SearchHit> hits;   // each re-validates on recomputation
  double min_weight_observed = 0.0;
  std::string note;              // e.g. reason the search refused to run
};

// Randomized search for negative direct-effect weights. Laws are sampled
// Dirichlet-uniform over the (d,a) cells with a 0.01 floor per cell; means
// uniform on [-1,1]. Deterministic given the seed. On mutually exclusive
// binary spaces the search returns empty with a note, since the weights are
// provably nonnegative there.
SearchResult search_negative_weights(RegressionKind kind, int k,
                                     const std::vector<int>& support_sizes,
                                     std::uint64_t trials, std::uint64_t seed,
                                     bool mutually_exclusive = false);

// Random full-support DGP on the given space; used by the search and by the
// property suites. force_positive_contrasts makes every mu(1,a) - mu(0,a)
// strictly positive (premise of the sign-preservation checks).
Dgp random_dgp(Rng& rng, const ActionSpace& space, Assumption assumption,
               bool force_positive_contrasts = false);

}  // namespace estimand_lab
