#ifndef SMNAE_MIXED_NORM_HPP
#define SMNAE_MIXED_NORM_HPP

#include <cstddef>
#include <vector>

#include "smnae/matrix.hpp"

namespace smnae {

// Input batch split by class. Batch c holds the columns of the full batch
// that belong to class c; every column of the full batch appears in exactly
// one class batch and all batches share the feature dimension.
struct ClassPartition {
  std::vector<Matrix> batches;

  // Groups the columns of x by label. Classes are ordered by first
  // appearance of their label in `labels`.
  static ClassPartition from_labels(const Matrix& x, const std::vector<int>& labels);

  std::size_t num_classes() const { return batches.size(); }
  std::size_t feature_dim() const { return batches.empty() ? 0 : batches.front().rows(); }
  std::size_t total_columns() const;

  void validate() const;
};

// Parameters of one proximal solve:
//   min over W of  (1/(2*eta)) * ||W - A||_F^2  +  lambda * sum_c ||W X_c||_{2,p}
struct ProxConfig {
  double lambda = 1e-3;        // penalty weight
  double eta = 0.1;            // proximal step size
  double p = 0.8;              // mixed-norm exponent, in (0, 1]
  double tol = 1e-8;           // stationarity tolerance on nonzero groups
  std::size_t max_inner_iters = 100;

  void validate() const;
};

struct ProxResult {
  Matrix w;
  bool converged = false;
  std::size_t iterations = 0;
  // Objective value at A followed by the value after each accepted iterate;
  // non-increasing by construction.
  std::vector<double> objective_trace;
};

// Euclidean norm of each row of w.
std::vector<double> row_group_norms(const Matrix& w);

// (sum_i ||w^i||^p)^(1/p) over the rows w^i of w. Requires 0 < p <= 1.
double l2p_norm(const Matrix& w, double p);

// sum_c l2p_norm(w * X_c, p) over the class batches.
double class_penalty(const Matrix& w, const ClassPartition& part, double p);

// Row-wise shrinkage: row a^i maps to max(0, 1 - tau/||a^i||) * a^i.
// Closed-form proximal map of tau * sum_i ||w^i|| at w = a; used as the
// independent oracle for prox_l2p in the p = 1, identity-batch case.
Matrix block_soft_threshold(const Matrix& a, double tau);

// Objective F(w) of the proximal subproblem (see ProxConfig).
double prox_objective(const Matrix& w, const Matrix& a, const ClassPartition& part,
                      const ProxConfig& cfg);

// Approximate minimizer of the proximal subproblem. Guarantees
// F(result.w) <= F(a); reports convergence of the stationarity residual on
// groups with nonzero norm within cfg.max_inner_iters.
ProxResult prox_l2p(const Matrix& a, const ClassPartition& part, const ProxConfig& cfg);

}  // namespace smnae

#endif
