#include "smnae/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "smnae/errors.hpp"

namespace smnae {

namespace {

void check_two_classes(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw ValidationError("eval: scores and labels must be nonempty and equal-length");
  }
  bool pos = false, neg = false;
  for (int l : labels) (l ? pos : neg) = true;
  if (!pos || !neg) throw ValidationError("eval: both classes must be present");
}

}  // namespace

std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                 const std::vector<int>& labels) {
  check_two_classes(scores, labels);
  const std::size_t n = scores.size();

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::size_t n_pos = 0, n_neg = 0;
  for (int l : labels) (l ? n_pos : n_neg)++;

  // Walking thresholds upward: samples strictly below the threshold are
  // rejected. pos_below / neg_below track that count.
  std::vector<RocPoint> out;
  std::size_t pos_below = 0, neg_below = 0, k = 0;
  while (k < n) {
    const double t = scores[order[k]];
    RocPoint pt;
    pt.threshold = t;
    pt.far = static_cast<double>(n_neg - neg_below) / static_cast<double>(n_neg);
    pt.frr = static_cast<double>(pos_below) / static_cast<double>(n_pos);
    out.push_back(pt);
    while (k < n && scores[order[k]] == t) {
      (labels[order[k]] ? pos_below : neg_below)++;
      ++k;
    }
  }
  // Sentinel above the maximum score: everything rejected.
  out.push_back({0.0, 1.0, scores[order[n - 1]] + 1.0});
  return out;
}

EvalResult compute_eer(const std::vector<double>& scores, const std::vector<int>& labels) {
  EvalResult result;
  result.roc = roc_points(scores, labels);
  for (int l : labels) (l ? result.n_pos : result.n_neg)++;

  // far - frr is non-increasing from +1 to -1; find the bracketing pair.
  const auto& roc = result.roc;
  std::size_t k = 0;
  while (k + 1 < roc.size() && roc[k + 1].far - roc[k + 1].frr > 0.0) ++k;
  const double d0 = roc[k].far - roc[k].frr;
  const double d1 = roc[k + 1].far - roc[k + 1].frr;
  double s = 0.0;
  if (d0 > d1) s = d0 / (d0 - d1);
  result.eer = roc[k].far + s * (roc[k + 1].far - roc[k].far);
  result.accuracy_pct = 100.0 * (1.0 - result.eer);
  return result;
}

namespace {

// One-vs-rest decision matrix: row k holds the decision values of the
// class-k-vs-rest SVM on every column of `features`.
std::vector<int> ovr_predict(const std::vector<SvmModel>& models, const Matrix& features) {
  const std::size_t n = features.cols();
  std::vector<int> pred(n, 0);
  std::vector<double> best(n, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < models.size(); ++k) {
    const std::vector<double> dec = decision_values(models[k], features);
    for (std::size_t i = 0; i < n; ++i) {
      if (dec[i] > best[i]) {
        best[i] = dec[i];
        pred[i] = static_cast<int>(k);
      }
    }
  }
  return pred;
}

std::vector<SvmModel> train_ovr(const Matrix& features, const std::vector<int>& labels,
                                const SvmConfig& cfg, int n_classes) {
  std::vector<SvmModel> models;
  for (int k = 0; k < n_classes; ++k) {
    std::vector<int> binary(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) binary[i] = labels[i] == k ? 1 : -1;
    models.push_back(train_svm(features, binary, cfg).model);
  }
  return models;
}

double error_pct(const std::vector<int>& pred, const std::vector<int>& truth) {
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (pred[i] != truth[i]) ++wrong;
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(truth.size());
}

}  // namespace

MnistReport mnist_benchmark(const Matrix& train_x, const std::vector<int>& train_y,
                            const Matrix& test_x, const std::vector<int>& test_y,
                            const MnistConfig& cfg) {
  if (cfg.train_count > train_x.cols() || cfg.test_count > test_x.cols()) {
    throw ValidationError("mnist_benchmark: requested subset exceeds the loaded data");
  }
  if (cfg.widths.empty()) throw ValidationError("mnist_benchmark: no layer widths");

  Matrix tr(train_x.rows(), cfg.train_count);
  Matrix te(test_x.rows(), cfg.test_count);
  std::vector<int> tr_y(train_y.begin(), train_y.begin() + cfg.train_count);
  std::vector<int> te_y(test_y.begin(), test_y.begin() + cfg.test_count);
  for (std::size_t c = 0; c < cfg.train_count; ++c)
    for (std::size_t r = 0; r < train_x.rows(); ++r) tr(r, c) = train_x(r, c);
  for (std::size_t c = 0; c < cfg.test_count; ++c)
    for (std::size_t r = 0; r < test_x.rows(); ++r) te(r, c) = test_x(r, c);

  TrainConfig layer_cfg;
  layer_cfg.lambda = cfg.lambda;
  layer_cfg.beta = cfg.beta;
  layer_cfg.p = cfg.p;
  layer_cfg.eta0 = cfg.eta0;
  layer_cfg.max_epochs = cfg.max_epochs;
  layer_cfg.rel_tol = cfg.rel_tol;
  layer_cfg.seed = cfg.seed;

  TrainConfig baseline_cfg = layer_cfg;
  baseline_cfg.lambda = 0.0;
  baseline_cfg.beta = 0.0;

  const ClassPartition part = ClassPartition::from_labels(tr, tr_y);
  const Laplacian lap = build_laplacian(build_supervision_matrix(tr_y));

  MnistReport report;
  report.n_train = cfg.train_count;
  report.n_test = cfg.test_count;

  for (int run = 0; run < 2; ++run) {
    const TrainConfig& run_cfg = run == 0 ? layer_cfg : baseline_cfg;
    const StackResult stack = train_stacked(tr, part, lap, cfg.widths, run_cfg);
    const Matrix train_feats = encode(stack.stack, tr);
    const Matrix test_feats = encode(stack.stack, te);
    const std::vector<SvmModel> ovr = train_ovr(train_feats, tr_y, cfg.svm, 10);
    const std::vector<int> pred = ovr_predict(ovr, test_feats);
    if (run == 0) {
      report.smnae_error_pct = error_pct(pred, te_y);
      report.smnae_predictions = pred;
    } else {
      report.baseline_error_pct = error_pct(pred, te_y);
      report.baseline_predictions = pred;
    }
  }
  return report;
}

}  // namespace smnae
