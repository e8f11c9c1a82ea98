#include "smnae/pipeline.hpp"

#include <algorithm>
#include <string>

#include "smnae/errors.hpp"

namespace smnae {

namespace {

Matrix slice_cols(const Matrix& m, std::size_t start, std::size_t count) {
  Matrix out(m.rows(), count);
  for (std::size_t c = 0; c < count; ++c)
    for (std::size_t r = 0; r < m.rows(); ++r) out(r, c) = m(r, start + c);
  return out;
}

std::vector<double> column_vector(const Matrix& m, std::size_t c) {
  std::vector<double> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = m(r, c);
  return out;
}

struct VidletPairSet {
  std::vector<Vidlet> a;
  std::vector<Vidlet> b;
  bool kin = false;
};

}  // namespace

void PipelineConfig::validate() const {
  if (z < 1) throw ValidationError("PipelineConfig: z must be at least 1");
  if (widths1.empty() || widths2.empty() || widths3.empty()) {
    throw ValidationError("PipelineConfig: every stage needs at least one layer width");
  }
  stage1.validate();
  stage2.validate();
  stage3.validate();
  svm.validate();
}

void PipelineModel::validate() const {
  if (stage1.layers.empty() || stage2.layers.empty() || stage3.layers.empty()) {
    throw ValidationError("PipelineModel: missing stage layers");
  }
  if (stage1.input_dim() % 2 != 0) {
    throw ValidationError("PipelineModel: stage-one input must hold two stacked frames");
  }
  if (stage2.input_dim() != 2 * stage1.output_dim()) {
    throw ValidationError("PipelineModel: stage-two input dim must be twice stage-one output");
  }
  if (stage3.input_dim() != 2 * z * stage2.output_dim()) {
    throw ValidationError("PipelineModel: stage-three input dim must be 2z times stage-two output");
  }
  for (const auto* stack : {&stage1, &stage2, &stage3}) {
    for (std::size_t k = 1; k < stack->layers.size(); ++k) {
      if (stack->layers[k].input_dim() != stack->layers[k - 1].hidden_dim()) {
        throw ValidationError("PipelineModel: stacked layer dimensions do not chain");
      }
    }
  }
}

TrainPipelineResult train_pipeline(const std::vector<LabeledVideoPair>& pairs,
                                   const PipelineConfig& cfg) {
  cfg.validate();
  std::size_t n_pos = 0, n_neg = 0;
  for (const auto& p : pairs) (p.kin ? n_pos : n_neg)++;
  if (n_pos < 1 || n_neg < 1) {
    throw ValidationError("train_pipeline: need at least one kin and one non-kin pair");
  }

  const std::size_t z = cfg.z;
  const std::size_t window = 2 * z + 1;

  // Vidlet pairs from every aligned training pair.
  std::vector<VidletPairSet> sets;
  std::size_t frame_dim = pairs.front().a.frame_dim;
  std::size_t n_vidlet_pairs = 0;
  for (const auto& pr : pairs) {
    if (pr.a.frame_dim != frame_dim || pr.b.frame_dim != frame_dim) {
      throw ValidationError("train_pipeline: videos disagree on frame dimension");
    }
    auto [a, b] = cycle_align(pr.a, pr.b);
    VidletPairSet set;
    set.a = extract_vidlets(a, z);
    set.b = extract_vidlets(b, z);
    set.kin = pr.kin;
    n_vidlet_pairs += set.a.size();
    sets.push_back(std::move(set));
  }

  // ---- Stage one: frame-pair columns -------------------------------------
  Matrix x1(2 * frame_dim, n_vidlet_pairs * window);
  std::vector<int> col_labels(n_vidlet_pairs * window);
  std::vector<int> vidlet_labels(n_vidlet_pairs);
  {
    std::size_t col = 0, vp = 0;
    for (const auto& set : sets) {
      for (std::size_t k = 0; k < set.a.size(); ++k) {
        const Matrix block = stage1_input(set.a[k], set.b[k]);
        for (std::size_t c = 0; c < window; ++c) {
          for (std::size_t r = 0; r < block.rows(); ++r) x1(r, col + c) = block(r, c);
          col_labels[col + c] = set.kin ? 1 : 0;
        }
        vidlet_labels[vp++] = set.kin ? 1 : 0;
        col += window;
      }
    }
  }

  TrainPipelineResult result;

  TrainConfig cfg1 = cfg.stage1;
  cfg1.seed = cfg.seed.stream(1);
  Laplacian lap1 = build_laplacian(build_supervision_matrix(col_labels));
  StackResult s1 = train_stacked(x1, ClassPartition::from_labels(x1, col_labels), lap1,
                                 cfg.widths1, cfg1);
  result.stage1_traces = std::move(s1.traces);

  // ---- Stage two: pivot-neighbor pairs ------------------------------------
  const Matrix h1 = encode(s1.stack, x1);
  Matrix x2(2 * s1.stack.output_dim(), n_vidlet_pairs * 2 * z);
  std::vector<int> col_labels2(n_vidlet_pairs * 2 * z);
  for (std::size_t vp = 0; vp < n_vidlet_pairs; ++vp) {
    const Matrix block = stage2_input(slice_cols(h1, vp * window, window), z);
    for (std::size_t c = 0; c < 2 * z; ++c) {
      for (std::size_t r = 0; r < block.rows(); ++r) x2(r, vp * 2 * z + c) = block(r, c);
      col_labels2[vp * 2 * z + c] = vidlet_labels[vp];
    }
  }

  TrainConfig cfg2 = cfg.stage2;
  cfg2.seed = cfg.seed.stream(2);
  Laplacian lap2 = build_laplacian(build_supervision_matrix(col_labels2));
  StackResult s2 = train_stacked(x2, ClassPartition::from_labels(x2, col_labels2), lap2,
                                 cfg.widths2, cfg2);
  result.stage2_traces = std::move(s2.traces);

  // ---- Stage three: whole-vidlet aggregates --------------------------------
  const Matrix h2 = encode(s2.stack, x2);
  Matrix x3(2 * z * s2.stack.output_dim(), n_vidlet_pairs);
  for (std::size_t vp = 0; vp < n_vidlet_pairs; ++vp) {
    const Matrix col = stage3_input(slice_cols(h2, vp * 2 * z, 2 * z), z);
    for (std::size_t r = 0; r < col.rows(); ++r) x3(r, vp) = col(r, 0);
  }

  TrainConfig cfg3 = cfg.stage3;
  cfg3.seed = cfg.seed.stream(3);
  Laplacian lap3 = build_laplacian(build_supervision_matrix(vidlet_labels));
  StackResult s3 = train_stacked(x3, ClassPartition::from_labels(x3, vidlet_labels), lap3,
                                 cfg.widths3, cfg3);
  result.stage3_traces = std::move(s3.traces);

  // ---- Classifier ----------------------------------------------------------
  const Matrix features = encode(s3.stack, x3);
  std::vector<int> svm_labels(n_vidlet_pairs);
  for (std::size_t i = 0; i < n_vidlet_pairs; ++i) svm_labels[i] = vidlet_labels[i] ? 1 : -1;
  TrainSvmResult svm = train_svm(features, svm_labels, cfg.svm);
  result.svm_converged = svm.converged;

  const std::vector<double> train_dec = decision_values(svm.model, features);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n_vidlet_pairs; ++i)
    if ((train_dec[i] >= 0.0 ? 1 : -1) == svm_labels[i]) ++hits;
  result.svm_train_accuracy = static_cast<double>(hits) / static_cast<double>(n_vidlet_pairs);

  result.model.stage1 = std::move(s1.stack);
  result.model.stage2 = std::move(s2.stack);
  result.model.stage3 = std::move(s3.stack);
  result.model.classifier = std::move(svm.model);
  result.model.z = z;
  result.model.fusion = cfg.fusion;
  result.model.validate();
  return result;
}

std::vector<double> vidlet_pair_feature(const PipelineModel& model, const Vidlet& vi,
                                        const Vidlet& vj) {
  const std::size_t z = model.z;
  const Matrix h1 = encode(model.stage1, stage1_input(vi, vj));
  const Matrix h2 = encode(model.stage2, stage2_input(h1, z));
  const Matrix h3 = encode(model.stage3, stage3_input(h2, z));
  return column_vector(h3, 0);
}

ScoreReport score_video_pair(const PipelineModel& model, const VideoSequence& a,
                             const VideoSequence& b) {
  model.validate();
  if (a.frame_dim != model.frame_dim() || b.frame_dim != model.frame_dim()) {
    throw ValidationError("score_video_pair: video frame dimension " +
                          std::to_string(a.frame_dim) + " does not match model (" +
                          std::to_string(model.frame_dim()) + ")");
  }
  auto [va, vb] = cycle_align(a, b);
  const std::vector<Vidlet> wa = extract_vidlets(va, model.z);
  const std::vector<Vidlet> wb = extract_vidlets(vb, model.z);

  ScoreReport report;
  for (std::size_t k = 0; k < wa.size(); ++k) {
    const std::vector<double> feat = vidlet_pair_feature(model, wa[k], wb[k]);
    report.per_vidlet_probs.push_back(predict_proba(model.classifier, feat));
  }

  if (model.fusion == FusionRule::kSum) {
    double sum = 0.0;
    for (double p : report.per_vidlet_probs) sum += p;
    report.fused_score = sum;
    report.threshold = 0.5 * static_cast<double>(report.per_vidlet_probs.size());
  } else {
    report.fused_score = *std::max_element(report.per_vidlet_probs.begin(),
                                           report.per_vidlet_probs.end());
    report.threshold = 0.5;
  }
  report.kin = report.fused_score >= report.threshold;
  return report;
}

}  // namespace smnae
