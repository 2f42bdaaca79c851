#pragma once

#include <Eigen/Core>

#include "estimand_lab/dgp.hpp"

namespace estimand_lab {

// Exact population moments of (D, A, AD), all computed as finite sums over
// the declared support. W denotes the stacked regressor block (A', (AD)')'.
struct MomentSet {
  double p_treat = 0.0;            // E[D]
  Eigen::MatrixXd pi;              // 2 x num_atoms: pi_d(a) = P{A=a | D=d}
  Eigen::VectorXd p_a;             // P{A=a}
  Eigen::VectorXd mean_A;          // E[A]
  Eigen::VectorXd mean_A_given_D1; // E[A | D=1]
  double var_D = 0.0;
  Eigen::VectorXd cov_DA;          // Cov(D, A_j)
  Eigen::MatrixXd var_A;           // K x K
  Eigen::MatrixXd var_W;           // 2K x 2K
  Eigen::VectorXd cov_WD;          // Cov(W, D)
};

MomentSet compute_moments(const Dgp& dgp);

double mean_Y(const Dgp& dgp);
double cov_D_Y(const Dgp& dgp);

// Population covariances of Y with A_j and with D*A_j, each computed two
// independent ways (direct sum and the three-term contrast expansion) with
// agreement asserted; a disagreement is an implementation bug.
double cov_Aj_Y(const Dgp& dgp, int j);
double cov_DAj_Y(const Dgp& dgp, int j);

}  // namespace estimand_lab
