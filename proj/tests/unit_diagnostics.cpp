#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <estimand_lab/config.hpp>
#include <estimand_lab/diagnostics.hpp>
#include <string>

using namespace estimand_lab;

namespace {

const std::string kFixtures = FIXTURE_DIR;

Dgp fixture(const std::string& name) { return load_dgp_file(kFixtures + "/" + name + ".json"); }

}  // namespace

TEST_CASE("stratum-weighted estimand preserves positive contrasts") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(stream_seed(808, seed));
    const ActionSpace space({{0, 1, 2, 3}}, full_product({{0, 1, 2, 3}}));
    const Dgp dgp = random_dgp(rng, space, Assumption::strong, /*force_positive_contrasts=*/true);
    const SspVerdict verdict = check_ssp(dgp, RegressionKind::kSfe);
    CHECK(verdict.premise_holds);
    CHECK(verdict.estimand_sign == Sign::positive);
    CHECK_FALSE(verdict.violated);
  }
}

TEST_CASE("shipped violation fixtures are violations") {
  CHECK(check_ssp(fixture("ssp_short"), RegressionKind::kShort).violated);
  CHECK(check_ssp(fixture("ssp_long"), RegressionKind::kLong).violated);
  CHECK(check_ssp(fixture("ssp_inter"), RegressionKind::kInter).violated);
}

TEST_CASE("zero contrasts fail the premise") {
  DgpInput input;
  input.coords = {{0, 1}};
  input.law = {{0, {0}, 0.25}, {0, {1}, 0.25}, {1, {0}, 0.25}, {1, {1}, 0.25}};
  input.mu = {{0, {0}, 1.0}, {0, {1}, 2.0}, {1, {0}, 1.0}, {1, {1}, 2.0}};
  const SspVerdict verdict = check_ssp(build_dgp(input), RegressionKind::kShort);
  CHECK_FALSE(verdict.premise_holds);
  CHECK_FALSE(verdict.violated);
}

TEST_CASE("sign check requires potential-outcome means") {
  Rng rng(stream_seed(1, 1));
  const ActionSpace space({{0, 1}}, full_product({{0, 1}}));
  const Dgp weak = random_dgp(rng, space, Assumption::weak);
  CHECK_THROWS_AS((void)check_ssp(weak, RegressionKind::kShort), WeakModeUnsupported);
}

TEST_CASE("saturated verdict follows the smallest per-atom effect") {
  const Dgp positive = fixture("binomial_reference");  // all contrasts 1 + 0.25 a > 0
  const SspVerdict ok = check_ssp(positive, RegressionKind::kSat);
  CHECK(ok.premise_holds);
  CHECK_FALSE(ok.violated);
}

TEST_CASE("random DGPs respect the law floor and support") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(stream_seed(55, seed));
    const ActionSpace space({{0, 1}, {0, 1}}, full_product({{0, 1}, {0, 1}}));
    const Dgp dgp = random_dgp(rng, space, Assumption::strong);
    double total = 0.0;
    for (int d = 0; d < 2; ++d)
      for (std::size_t a = 0; a < space.num_atoms(); ++a) {
        CHECK(dgp.p(d, a) >= 0.01 - 1e-15);
        total += dgp.p(d, a);
      }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("forced contrasts are strictly positive") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(stream_seed(56, seed));
    const ActionSpace space({{0, 1, 2}}, full_product({{0, 1, 2}}));
    const Dgp dgp = random_dgp(rng, space, Assumption::strong, true);
    for (std::size_t a = 0; a < space.num_atoms(); ++a) CHECK(dgp.mu(1, a) - dgp.mu(0, a) > 0.0);
  }
}

TEST_CASE("negative-weight search finds and re-validates hits") {
  const SearchResult result = search_negative_weights(RegressionKind::kLong, 1, {3}, 2000, 7);
  CHECK(result.trials_run == 2000);
  REQUIRE(!result.hits.empty());
  CHECK(result.min_weight_observed < 0.0);
  for (const SearchHit& hit : result.hits) {
    // replay: recompute the weights from the stored DGP
    const WeightTable w = weights_long(hit.dgp);
    CHECK(w.dce.minCoeff() == doctest::Approx(hit.min_dce).epsilon(1e-12));
    CHECK(hit.min_dce < -1e-12);
    // normalizations hold even when individual weights are negative
    CHECK(std::abs(w.sum_dce - 1.0) < 1e-10);
    CHECK(std::abs(w.sum_ind) < 1e-10);
    CHECK(w.sum_a_ind.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("search is deterministic in the seed") {
  const SearchResult a = search_negative_weights(RegressionKind::kInter, 1, {3}, 300, 11);
  const SearchResult b = search_negative_weights(RegressionKind::kInter, 1, {3}, 300, 11);
  CHECK(a.trials_run == b.trials_run);
  CHECK(a.min_weight_observed == b.min_weight_observed);
  REQUIRE(a.hits.size() == b.hits.size());
  for (std::size_t i = 0; i < a.hits.size(); ++i) {
    CHECK(a.hits[i].trial == b.hits[i].trial);
    CHECK(a.hits[i].min_dce == b.hits[i].min_dce);
  }
  const SearchResult c = search_negative_weights(RegressionKind::kInter, 1, {3}, 300, 12);
  CHECK((c.hits.size() != a.hits.size() || c.min_weight_observed != a.min_weight_observed));
}

TEST_CASE("search refuses mutually exclusive binary spaces with a note") {
  const SearchResult result =
      search_negative_weights(RegressionKind::kLong, 2, {2, 2}, 500, 3, true);
  CHECK(result.hits.empty());
  CHECK(result.trials_run == 0);
  CHECK_FALSE(result.note.empty());
  CHECK(result.min_weight_observed == 0.0);
}

TEST_CASE("search rejects kinds without negative-weight structure") {
  CHECK_THROWS_AS((void)search_negative_weights(RegressionKind::kSfe, 1, {3}, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)search_negative_weights(RegressionKind::kShort, 1, {3}, 10, 1),
                  std::invalid_argument);
}
