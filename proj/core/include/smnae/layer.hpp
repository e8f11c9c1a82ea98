#ifndef SMNAE_LAYER_HPP
#define SMNAE_LAYER_HPP

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "smnae/matrix.hpp"
#include "smnae/mixed_norm.hpp"

namespace smnae {

// Pairwise label-agreement matrix: +1 same class, -1 different class,
// 0 when either label is unknown. Diagonal is +1, matrix is symmetric.
struct SupervisionMatrix {
  Matrix m;
};

// L = D - M with D = diag(row sums of M). Every row sums to zero.
struct Laplacian {
  Matrix l;
};

// Labels are small integers; negative values mean "unknown".
SupervisionMatrix build_supervision_matrix(const std::vector<int>& labels);
Laplacian build_laplacian(const SupervisionMatrix& m);

// One autoencoder: H = sigmoid(w_enc X), reconstruction = sigmoid(w_dec H).
struct SmnaeLayer {
  Matrix w_enc;  // hidden x input
  Matrix w_dec;  // input x hidden

  std::size_t input_dim() const { return w_enc.cols(); }
  std::size_t hidden_dim() const { return w_enc.rows(); }
};

struct TrainConfig {
  double lambda = 1e-3;       // group-sparsity weight
  double beta = 1e-3;         // pairwise discrimination weight
  double p = 0.8;             // mixed-norm exponent, shared by all stages
  double eta0 = 0.1;          // initial proximal-gradient step size
  std::size_t max_epochs = 500;
  double rel_tol = 1e-6;      // stop when relative loss change falls below
  Seed seed{0};

  // Budget of the inner proximal solve during training. Descent does not
  // depend on solving the subproblem to high accuracy.
  double prox_tol = 1e-6;
  std::size_t prox_max_iters = 3;

  void validate() const;
};

struct LossTerms {
  double total = 0.0;
  double j1 = 0.0;  // reconstruction error
  double j2 = 0.0;  // class-wise mixed-norm penalty
  double j3 = 0.0;  // Laplacian discrimination term
};

struct TraceRow {
  std::size_t epoch = 0;
  double total = 0.0, j1 = 0.0, j2 = 0.0, j3 = 0.0;
  double step = 0.0;  // accepted step size (0 for the initial row)
};

struct TrainResult {
  SmnaeLayer layer;
  std::vector<TraceRow> trace;  // initial loss plus one row per accepted epoch
  bool stopped_by_tolerance = false;
};

// trace(H^T H L): positive when same-class columns of h disagree, negative
// when different-class columns disagree.
double discrimination_term(const Matrix& h, const Laplacian& lap);

// Loss terms at the given weights:
//   j1 + lambda*j2 + beta*j3 with
//   j1 = ||X - sigmoid(w_dec sigmoid(w_enc X))||_F^2
//   j2 = sum_c l2p_norm(w_enc X_c, p)
//   j3 = trace(H^T H L)
LossTerms loss_smnae(const SmnaeLayer& layer, const Matrix& x, const ClassPartition& part,
                     const Laplacian& lap, const TrainConfig& cfg);

// Gradients of the smooth part j1 + beta*j3 with respect to encoder and
// decoder weights (the mixed-norm term is handled by the proximal step).
struct SmoothGradients {
  Matrix w_enc;
  Matrix w_dec;
};
SmoothGradients grad_smooth(const SmnaeLayer& layer, const Matrix& x, const Laplacian& lap,
                            double beta);

// Proximal-gradient training with backtracking step halving. Accepted steps
// strictly decrease the total loss; the returned trace records them.
TrainResult train_layer(const Matrix& x, const ClassPartition& part, const Laplacian& lap,
                        std::size_t hidden, const TrainConfig& cfg);

Matrix encode(const SmnaeLayer& layer, const Matrix& x);

struct StackedSmnae {
  std::vector<SmnaeLayer> layers;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().input_dim(); }
  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().hidden_dim(); }
};

Matrix encode(const StackedSmnae& stack, const Matrix& x);

// Encodes each class batch, preserving class membership.
ClassPartition encode_partition(const SmnaeLayer& layer, const ClassPartition& part);

struct StackResult {
  StackedSmnae stack;
  std::vector<std::vector<TraceRow>> traces;  // one per layer
};

// Greedy layer-by-layer training: layer k trains on the encoding produced
// by layer k-1, reusing the same supervision Laplacian throughout.
StackResult train_stacked(const Matrix& x, const ClassPartition& part, const Laplacian& lap,
                          const std::vector<std::size_t>& hidden_sizes,
                          const TrainConfig& cfg);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

}  // namespace smnae

#endif
