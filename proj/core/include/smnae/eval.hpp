#ifndef SMNAE_EVAL_HPP
#define SMNAE_EVAL_HPP

#include <cstddef>
#include <vector>

#include "smnae/layer.hpp"
#include "smnae/matrix.hpp"
#include "smnae/svm.hpp"

namespace smnae {

struct RocPoint {
  double far = 0.0;  // fraction of negatives accepted at this threshold
  double frr = 0.0;  // fraction of positives rejected
  double threshold = 0.0;
};

struct EvalResult {
  double eer = 0.0;
  double accuracy_pct = 0.0;  // 100 * (1 - eer)
  std::vector<RocPoint> roc;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

// One operating point per distinct score (accept iff score >= threshold),
// plus a final point above the maximum score (nothing accepted). Points are
// ordered by ascending threshold, so far is non-increasing.
std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                 const std::vector<int>& labels);

// Equal error rate: the FAR = FRR crossing, linearly interpolated between
// the two adjacent operating points that bracket it. Labels are 1 / 0.
EvalResult compute_eer(const std::vector<double>& scores, const std::vector<int>& labels);

struct MnistConfig {
  std::size_t train_count = 2000;
  std::size_t test_count = 1000;
  std::vector<std::size_t> widths{256, 128};
  double lambda = 1e-3;
  double beta = 1e-3;
  double p = 0.8;
  double eta0 = 0.1;
  std::size_t max_epochs = 60;
  double rel_tol = 1e-6;
  SvmConfig svm;
  Seed seed{0};
};

struct MnistReport {
  double smnae_error_pct = 0.0;
  double baseline_error_pct = 0.0;  // plain autoencoder, lambda = beta = 0
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::vector<int> smnae_predictions;
  std::vector<int> baseline_predictions;
};

// Digit-classification benchmark: a stacked autoencoder with class-label
// supervision against a plain autoencoder trained under the identical
// budget, both followed by the same one-vs-rest RBF-SVM head.
MnistReport mnist_benchmark(const Matrix& train_x, const std::vector<int>& train_y,
                            const Matrix& test_x, const std::vector<int>& test_y,
                            const MnistConfig& cfg);

}  // namespace smnae

#endif
