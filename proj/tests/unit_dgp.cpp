#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <estimand_lab/dgp.hpp>

using namespace estimand_lab;

namespace {

DgpInput small_input() {
  DgpInput input;
  input.coords = {{0, 1}};
  input.law = {{0, {0}, 0.1}, {0, {1}, 0.3}, {1, {0}, 0.2}, {1, {1}, 0.4}};
  input.mu = {{0, {0}, 0.0}, {0, {1}, 0.5}, {1, {0}, 1.0}, {1, {1}, 2.0}};
  return input;
}

}  // namespace

TEST_CASE("action space validates coordinate supports") {
  CHECK_NOTHROW(ActionSpace({{0, 1}, {0, 1, 2}}, full_product({{0, 1}, {0, 1, 2}})));
  // every coordinate support must contain 0
  CHECK_THROWS_AS(ActionSpace({{1, 2}}, {{1}, {2}}), DgpValidationError);
  // binary supports must be exactly {0,1}
  CHECK_THROWS_AS(ActionSpace({{0, 2}}, {{0}, {2}}), DgpValidationError);
  // sorted, duplicate-free
  CHECK_THROWS_AS(ActionSpace({{0, 1, 1}}, {{0}, {1}}), DgpValidationError);
}

TEST_CASE("action space validates the joint support") {
  // empty joint support
  CHECK_THROWS_AS(ActionSpace({{0, 1}}, {}), DgpValidationError);
  // zero vector must be declared
  CHECK_THROWS_AS(ActionSpace({{0, 1}}, {{1}}), DgpValidationError);
  // duplicates rejected
  CHECK_THROWS_AS(ActionSpace({{0, 1}}, {{0}, {1}, {1}}), DgpValidationError);
  // atoms must live on the declared coordinate supports
  CHECK_THROWS_AS(ActionSpace({{0, 1}}, {{0}, {2}}), DgpValidationError);
  // wrong dimension
  CHECK_THROWS_AS(ActionSpace({{0, 1}}, {{0, 0}}), DgpValidationError);
}

TEST_CASE("action space indexing and atom matrix") {
  const ActionSpace space({{0, 1}, {0, 1, 2}}, full_product({{0, 1}, {0, 1, 2}}));
  CHECK(space.k() == 2);
  CHECK(space.num_atoms() == 6);
  CHECK(space.atom_index({1, 2}).value() == 5);
  CHECK_FALSE(space.atom_index({2, 0}).has_value());
  CHECK(space.atom_matrix()(5, 0) == 1.0);
  CHECK(space.atom_matrix()(5, 1) == 2.0);
}

TEST_CASE("full product enumerates lexicographically") {
  const auto atoms = full_product({{0, 1}, {0, 1}});
  REQUIRE(atoms.size() == 4);
  CHECK(atoms[0] == Atom{0, 0});
  CHECK(atoms[1] == Atom{0, 1});
  CHECK(atoms[2] == Atom{1, 0});
  CHECK(atoms[3] == Atom{1, 1});
}

TEST_CASE("binomial pmf matches the closed form") {
  const auto pmf = binomial_pmf(3, 0.8);
  REQUIRE(pmf.size() == 4);
  CHECK(pmf[0] == doctest::Approx(0.008).epsilon(1e-12));
  CHECK(pmf[1] == doctest::Approx(0.096).epsilon(1e-12));
  CHECK(pmf[2] == doctest::Approx(0.384).epsilon(1e-12));
  CHECK(pmf[3] == doctest::Approx(0.512).epsilon(1e-12));
  double total = 0.0;
  for (double v : binomial_pmf(7, 0.3)) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("build_dgp assembles a valid strong-mode table") {
  const Dgp dgp = build_dgp(small_input());
  CHECK(dgp.assumption() == Assumption::strong);
  CHECK(dgp.p(0, 0) == 0.1);
  CHECK(dgp.p(1, 1) == 0.4);
  CHECK(dgp.mu(1, 1) == 2.0);
  // strong mode: nu is a bit-for-bit copy of mu in every (d_prime, d) slot
  for (int dp = 0; dp < 2; ++dp)
    for (int d = 0; d < 2; ++d)
      for (std::size_t a = 0; a < 2; ++a) CHECK(dgp.nu(dp, d, a) == dgp.mu(dp, a));
  CHECK(dgp.m(1, 1) == 2.0);
  CHECK(dgp.noise_sd(0, 0) == 0.5);  // default fill
}

TEST_CASE("build_dgp rejects bad probability tables") {
  auto input = small_input();
  input.law[0].p = -0.1;
  input.law[1].p = 0.5;
  CHECK_THROWS_AS(build_dgp(input), NonPositiveCell);

  input = small_input();
  input.law[0].p = 0.2;  // sum 1.1
  CHECK_THROWS_AS(build_dgp(input), ProbabilitySumError);

  input = small_input();
  input.law.pop_back();
  CHECK_THROWS_AS(build_dgp(input), MissingTableEntry);

  input = small_input();
  input.law.push_back({1, {1}, 0.0});  // duplicate cell
  CHECK_THROWS_AS(build_dgp(input), ConfigError);

  input = small_input();
  input.law.push_back({1, {2}, 0.0});  // undeclared atom
  CHECK_THROWS_AS(build_dgp(input), ConfigError);
}

TEST_CASE("full-support mode rejects zero cells; relaxed mode allows them") {
  auto input = small_input();
  input.law[0].p = 0.0;
  input.law[1].p = 0.4;
  CHECK_THROWS_AS(build_dgp(input), NonPositiveCell);
  input.full_support = false;
  CHECK_NOTHROW(build_dgp(input));
}

TEST_CASE("an entire treatment arm with zero mass is rejected") {
  auto input = small_input();
  input.full_support = false;
  input.law = {{0, {0}, 0.5}, {0, {1}, 0.5}, {1, {0}, 0.0}, {1, {1}, 0.0}};
  CHECK_THROWS_AS(build_dgp(input), NonPositiveCell);
}

TEST_CASE("mean tables must cover the support") {
  auto input = small_input();
  input.mu.pop_back();
  CHECK_THROWS_AS(build_dgp(input), MissingTableEntry);
}

TEST_CASE("strong mode cross-checks supplied conditional means") {
  auto input = small_input();
  for (int dp = 0; dp < 2; ++dp)
    for (int d = 0; d < 2; ++d)
      for (int a = 0; a < 2; ++a)
        input.nu.push_back({dp, d, {a}, input.mu[static_cast<std::size_t>(2 * dp + a)].value});
  CHECK_NOTHROW(build_dgp(input));
  input.nu[0].value += 0.5;
  CHECK_THROWS_AS(build_dgp(input), StrongModeInconsistency);
}

TEST_CASE("weak mode requires the full conditional-mean table") {
  auto input = small_input();
  input.assumption = Assumption::weak;
  CHECK_THROWS_AS(build_dgp(input), MissingTableEntry);
  for (int dp = 0; dp < 2; ++dp)
    for (int d = 0; d < 2; ++d)
      for (int a = 0; a < 2; ++a)
        input.nu.push_back({dp, d, {a}, 0.1 * dp + 0.2 * d + 0.3 * a});
  const Dgp dgp = build_dgp(input);
  CHECK(dgp.nu(1, 0, 1) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(dgp.m(0, 1) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("noise table entries override the default") {
  auto input = small_input();
  input.noise_sd = {{0, {0}, 0.1}};
  input.default_noise_sd = 0.9;
  const Dgp dgp = build_dgp(input);
  CHECK(dgp.noise_sd(0, 0) == 0.1);
  CHECK(dgp.noise_sd(1, 1) == 0.9);
}

TEST_CASE("mutually exclusive binary detection") {
  const ActionSpace me = mutually_exclusive_space(3);
  CHECK(me.k() == 3);
  CHECK(me.num_atoms() == 4);  // zero vector plus three unit vectors
  CHECK(mutually_exclusive_binary(me));
  const ActionSpace full({{0, 1}, {0, 1}}, full_product({{0, 1}, {0, 1}}));
  CHECK_FALSE(mutually_exclusive_binary(full));  // (1,1) declared
  const ActionSpace ternary({{0, 1, 2}}, full_product({{0, 1, 2}}));
  CHECK_FALSE(mutually_exclusive_binary(ternary));
}

TEST_CASE("assumption string round trip") {
  CHECK(to_string(Assumption::strong) == "strong");
  CHECK(to_string(Assumption::weak) == "weak");
  CHECK(assumption_from_string("strong") == Assumption::strong);
  CHECK(assumption_from_string("weak") == Assumption::weak);
  CHECK_THROWS_AS(assumption_from_string("other"), DgpValidationError);
}

TEST_CASE("atom labels") {
  CHECK(atom_label({3}) == "(3)");
  CHECK(atom_label({0, 1}) == "(0,1)");
}
