#ifndef SMNAE_SVM_HPP
#define SMNAE_SVM_HPP

#include <cstddef>
#include <vector>

#include "smnae/matrix.hpp"

namespace smnae {

struct SvmConfig {
  double c = 1.0;
  double gamma = 0.0;  // 0 means 1 / feature_dim
  double tol = 1e-3;   // KKT violation tolerance
  std::size_t max_iters = 0;  // 0 means a size-based default
  bool grid_search = false;   // 3-fold CV over a small (c, gamma) grid

  void validate() const;
};

// Binary RBF-kernel SVM with Platt-calibrated probabilities.
struct SvmModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> alphas;  // signed by label, 0 < |alpha| <= C
  double bias = 0.0;
  double gamma = 1.0;
  double c = 1.0;
  double platt_a = 0.0;
  double platt_b = 0.0;
  bool platt_fitted = false;

  std::size_t feature_dim() const {
    return support_vectors.empty() ? 0 : support_vectors.front().size();
  }
};

struct TrainSvmResult {
  SvmModel model;
  bool converged = false;
  std::size_t iterations = 0;
  // Dual objective after every working-pair update; non-decreasing.
  std::vector<double> dual_trace;
};

// exp(-gamma * ||x - y||^2)
double rbf_kernel(const std::vector<double>& x, const std::vector<double>& y, double gamma);

// Sequential minimal optimization on the dual, maximal-violating-pair
// selection with ties broken by lowest index. Platt parameters are fitted
// on the training decision values afterwards.
// features: one column per sample; labels: +1 / -1.
TrainSvmResult train_svm(const Matrix& features, const std::vector<int>& labels,
                         const SvmConfig& cfg);

// sum_i alpha_i k(sv_i, x) + bias
double decision_value(const SvmModel& model, const std::vector<double>& x);

// Batch variant, one column of `features` per sample.
std::vector<double> decision_values(const SvmModel& model, const Matrix& features);

// 1 / (1 + exp(platt_a * decision + platt_b)). Throws when the Platt
// parameters have not been fitted.
double predict_proba(const SvmModel& model, const std::vector<double>& x);
double proba_from_decision(const SvmModel& model, double decision);

// Regularized maximum-likelihood sigmoid fit (Platt scaling, Lin-Weng
// variant). Returns {a, b}.
std::pair<double, double> fit_platt(const std::vector<double>& decisions,
                                    const std::vector<int>& labels);

}  // namespace smnae

#endif
