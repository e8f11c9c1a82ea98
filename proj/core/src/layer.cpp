#include "smnae/layer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "smnae/errors.hpp"

namespace smnae {

namespace {

constexpr double kMinStep = 1e-10;

LossTerms loss_terms_nothrow(const SmnaeLayer& layer, const Matrix& x,
                             const ClassPartition& part, const Laplacian& lap,
                             const TrainConfig& cfg) {
  const Matrix h = sigmoid(matmul(layer.w_enc, x));
  const Matrix recon = sigmoid(matmul(layer.w_dec, h));
  LossTerms t;
  t.j1 = frobenius_sq(x - recon);
  t.j2 = (cfg.lambda != 0.0) ? class_penalty(layer.w_enc, part, cfg.p) : 0.0;
  t.j3 = (cfg.beta != 0.0) ? discrimination_term(h, lap) : 0.0;
  t.total = t.j1 + cfg.lambda * t.j2 + cfg.beta * t.j3;
  return t;
}

}  // namespace

void TrainConfig::validate() const {
  if (lambda < 0.0) throw ValidationError("TrainConfig: lambda must be nonnegative");
  if (beta < 0.0) throw ValidationError("TrainConfig: beta must be nonnegative");
  if (!(p > 0.0 && p <= 1.0)) throw ValidationError("TrainConfig: p must be in (0, 1]");
  if (!(eta0 > 0.0)) throw ValidationError("TrainConfig: eta0 must be positive");
  if (!(rel_tol > 0.0)) throw ValidationError("TrainConfig: rel_tol must be positive");
  if (max_epochs < 1) throw ValidationError("TrainConfig: max_epochs must be at least 1");
}

SupervisionMatrix build_supervision_matrix(const std::vector<int>& labels) {
  const std::size_t n = labels.size();
  if (n < 1) throw ValidationError("build_supervision_matrix: no labels");
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = 0.0;
      if (labels[i] >= 0 && labels[j] >= 0) v = (labels[i] == labels[j]) ? 1.0 : -1.0;
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return SupervisionMatrix{std::move(m)};
}

Laplacian build_laplacian(const SupervisionMatrix& sup) {
  const Matrix& m = sup.m;
  if (m.rows() != m.cols()) throw ValidationError("build_laplacian: matrix is not square");
  const std::size_t n = m.rows();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j) degree += m(i, j);
    for (std::size_t j = 0; j < n; ++j) l(i, j) = -m(i, j);
    l(i, i) += degree;
  }
  return Laplacian{std::move(l)};
}

double discrimination_term(const Matrix& h, const Laplacian& lap) {
  if (h.cols() != lap.l.rows()) {
    throw ValidationError("discrimination_term: " + std::to_string(h.cols()) +
                          " columns vs " + std::to_string(lap.l.rows()) +
                          "-sample Laplacian");
  }
  const Matrix hl = matmul(h, lap.l);
  double acc = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) acc += h.data()[i] * hl.data()[i];
  return acc;
}

LossTerms loss_smnae(const SmnaeLayer& layer, const Matrix& x, const ClassPartition& part,
                     const Laplacian& lap, const TrainConfig& cfg) {
  LossTerms t = loss_terms_nothrow(layer, x, part, lap, cfg);
  if (!std::isfinite(t.total)) {
    throw NumericalError("loss_smnae: loss is not finite");
  }
  return t;
}

SmoothGradients grad_smooth(const SmnaeLayer& layer, const Matrix& x, const Laplacian& lap,
                            double beta) {
  const Matrix h = sigmoid(matmul(layer.w_enc, x));
  const Matrix recon = sigmoid(matmul(layer.w_dec, h));

  // d(j1)/d(pre-activation of the decoder)
  Matrix gp = recon - x;
  for (std::size_t i = 0; i < gp.size(); ++i) {
    const double r = recon.data()[i];
    gp.data()[i] *= 2.0 * r * (1.0 - r);
  }

  SmoothGradients grads;
  grads.w_dec = matmul_nt(gp, h);

  Matrix dh = matmul_tn(layer.w_dec, gp);
  if (beta != 0.0) {
    Matrix hl = matmul(h, lap.l);
    hl *= 2.0 * beta;
    dh += hl;
  }
  for (std::size_t i = 0; i < dh.size(); ++i) {
    const double v = h.data()[i];
    dh.data()[i] *= v * (1.0 - v);
  }
  grads.w_enc = matmul_nt(dh, x);
  return grads;
}

TrainResult train_layer(const Matrix& x, const ClassPartition& part, const Laplacian& lap,
                        std::size_t hidden, const TrainConfig& cfg) {
  cfg.validate();
  part.validate();
  if (hidden < 1) throw ValidationError("train_layer: hidden size must be at least 1");
  if (x.cols() < 2) throw ValidationError("train_layer: need at least 2 samples");
  if (part.feature_dim() != x.rows() || part.total_columns() != x.cols()) {
    throw ValidationError("train_layer: partition does not match the batch");
  }
  if (lap.l.rows() != x.cols()) {
    throw ValidationError("train_layer: Laplacian size does not match sample count");
  }

  SmnaeLayer layer{init_weights(hidden, x.rows(), cfg.seed.stream(0)),
                   init_weights(x.rows(), hidden, cfg.seed.stream(1))};

  TrainResult result;
  LossTerms cur = loss_terms_nothrow(layer, x, part, lap, cfg);
  if (!std::isfinite(cur.total)) {
    throw NumericalError("train_layer: loss diverged (NaN) at epoch 0");
  }
  result.trace.push_back({0, cur.total, cur.j1, cur.j2, cur.j3, 0.0});

  double eta = cfg.eta0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const SmoothGradients grads = grad_smooth(layer, x, lap, cfg.beta);

    bool accepted = false;
    bool saw_nan = false;
    SmnaeLayer cand;
    LossTerms cand_terms;
    while (eta >= kMinStep) {
      Matrix enc_step = layer.w_enc - eta * Matrix(grads.w_enc);
      if (cfg.lambda > 0.0) {
        ProxConfig pc{cfg.lambda, eta, cfg.p, cfg.prox_tol, cfg.prox_max_iters};
        cand.w_enc = prox_l2p(enc_step, part, pc).w;
      } else {
        cand.w_enc = std::move(enc_step);
      }
      cand.w_dec = layer.w_dec - eta * Matrix(grads.w_dec);
      cand_terms = loss_terms_nothrow(cand, x, part, lap, cfg);
      if (!std::isfinite(cand_terms.total)) {
        saw_nan = true;
        eta *= 0.5;
        continue;
      }
      saw_nan = false;
      if (cand_terms.total < cur.total) {
        accepted = true;
        break;
      }
      eta *= 0.5;
    }

    if (!accepted) {
      if (saw_nan) {
        throw NumericalError("train_layer: loss diverged (NaN) at epoch " +
                             std::to_string(epoch));
      }
      break;  // step size exhausted without descent
    }

    const double prev_total = cur.total;
    layer = std::move(cand);
    cur = cand_terms;
    result.trace.push_back({epoch, cur.total, cur.j1, cur.j2, cur.j3, eta});

    if (std::abs(prev_total - cur.total) / std::max(1.0, std::abs(prev_total)) <
        cfg.rel_tol) {
      result.stopped_by_tolerance = true;
      break;
    }
    eta = std::min(eta * 2.0, cfg.eta0);
  }

  result.layer = std::move(layer);
  return result;
}

Matrix encode(const SmnaeLayer& layer, const Matrix& x) {
  if (x.rows() != layer.input_dim()) {
    throw ValidationError("encode: input has " + std::to_string(x.rows()) +
                          " rows, layer expects " + std::to_string(layer.input_dim()));
  }
  return sigmoid(matmul(layer.w_enc, x));
}

Matrix encode(const StackedSmnae& stack, const Matrix& x) {
  Matrix cur = x;
  for (const auto& layer : stack.layers) cur = encode(layer, cur);
  return cur;
}

ClassPartition encode_partition(const SmnaeLayer& layer, const ClassPartition& part) {
  ClassPartition out;
  out.batches.reserve(part.batches.size());
  for (const auto& batch : part.batches) out.batches.push_back(encode(layer, batch));
  return out;
}

StackResult train_stacked(const Matrix& x, const ClassPartition& part, const Laplacian& lap,
                          const std::vector<std::size_t>& hidden_sizes,
                          const TrainConfig& cfg) {
  if (hidden_sizes.empty()) throw ValidationError("train_stacked: no hidden sizes");

  StackResult result;
  Matrix cur_x = x;
  ClassPartition cur_part = part;
  for (std::size_t k = 0; k < hidden_sizes.size(); ++k) {
    TrainConfig layer_cfg = cfg;
    if (k > 0) layer_cfg.seed = cfg.seed.stream(100 + k);
    TrainResult trained = train_layer(cur_x, cur_part, lap, hidden_sizes[k], layer_cfg);
    if (k + 1 < hidden_sizes.size()) {
      cur_x = encode(trained.layer, cur_x);
      cur_part = encode_partition(trained.layer, cur_part);
    }
    result.stack.layers.push_back(std::move(trained.layer));
    result.traces.push_back(std::move(trained.trace));
  }
  return result;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "epoch,total,j1,j2,j3,step\n";
  char buf[160];
  for (const auto& row : trace) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.epoch,
                  row.total, row.j1, row.j2, row.j3, row.step);
    out << buf;
  }
}

}  // namespace smnae
