#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "estimand_lab/dgp.hpp"
#include "estimand_lab/projection.hpp"

namespace estimand_lab {

// I.i.d. draws from a DGP. Atom indices are resolved at sampling time so
// indicator designs need no lookups later.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::VectorXi d;
  Eigen::MatrixXi a;                   // n x K
  std::vector<std::size_t> atom_idx;   // row -> support atom
  int k = 0;
};

// Strong mode draws Y = mu(D,A) + noise; weak mode Y = nu(D,D,A) + noise.
// Identical (dgp, n, seed) give byte-identical datasets.
Dataset sample(const Dgp& dgp, std::size_t n, std::uint64_t seed);

// CSV with header y,d,a1,...,aK.
std::string dataset_to_csv(const Dataset& dataset);

// Sample OLS for the given design; raises SingularSampleDesign when the
// realized design matrix is rank deficient.
ProjectionResult estimate(const Dataset& dataset, const RegressionSpec& spec);

struct SimConfig {
  std::size_t n = 0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
};

struct SimCoefficient {
  RegressionKind kind;
  std::string name;
  double target = 0.0;  // exact population coefficient
  double mean = 0.0;    // mean across repetitions
  double se = 0.0;      // standard error of that mean
  double z = 0.0;
  bool within = false;  // |z| < 4
  double mad = 0.0;     // mean |estimate - target| across repetitions
  std::size_t reps_present = 0;  // reps whose sample design kept the column
};

struct SimReport {
  SimConfig config;
  std::vector<SimCoefficient> rows;
  bool all_within = false;
  double max_abs_z = 0.0;
};

// Runs all five regressions on `reps` independent samples of size n and
// compares mean estimates against the exact population coefficients.
// Repetition r uses the derived stream stream_seed(seed, r); repetitions run
// in parallel and aggregate deterministically by index.
SimReport validate(const Dgp& dgp, const SimConfig& config);

}  // namespace estimand_lab
