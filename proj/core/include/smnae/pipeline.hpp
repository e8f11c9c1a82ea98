#ifndef SMNAE_PIPELINE_HPP
#define SMNAE_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "smnae/layer.hpp"
#include "smnae/svm.hpp"
#include "smnae/vidlet.hpp"

namespace smnae {

enum class FusionRule { kSum, kMax };

struct LabeledVideoPair {
  VideoSequence a;
  VideoSequence b;
  bool kin = false;
  std::string relation;
};

struct PipelineConfig {
  TrainConfig stage1;
  TrainConfig stage2;
  TrainConfig stage3;
  std::vector<std::size_t> widths1{128, 64, 32};
  std::vector<std::size_t> widths2{36, 16};
  std::vector<std::size_t> widths3{48, 32};
  SvmConfig svm;
  std::size_t z = 2;
  FusionRule fusion = FusionRule::kSum;
  Seed seed{0};

  void validate() const;
};

struct PipelineModel {
  StackedSmnae stage1;
  StackedSmnae stage2;
  StackedSmnae stage3;
  SvmModel classifier;
  std::size_t z = 2;
  FusionRule fusion = FusionRule::kSum;
  std::uint32_t format_version = 1;

  std::size_t frame_dim() const { return stage1.input_dim() / 2; }
  void validate() const;
};

struct ScoreReport {
  std::vector<double> per_vidlet_probs;
  double fused_score = 0.0;
  bool kin = false;
  double threshold = 0.0;
};

struct TrainPipelineResult {
  PipelineModel model;
  std::vector<std::vector<TraceRow>> stage1_traces;
  std::vector<std::vector<TraceRow>> stage2_traces;
  std::vector<std::vector<TraceRow>> stage3_traces;
  double svm_train_accuracy = 0.0;
  bool svm_converged = false;
};

// Trains the three stacked autoencoders in order (frame pairs, pivot-
// neighbor pairs, whole-vidlet aggregates) and the final classifier on the
// stage-three features. Needs at least one kin and one non-kin pair.
TrainPipelineResult train_pipeline(const std::vector<LabeledVideoPair>& pairs,
                                   const PipelineConfig& cfg);

// Stage-three feature vector of one vidlet pair (full forward pass).
std::vector<double> vidlet_pair_feature(const PipelineModel& model, const Vidlet& vi,
                                        const Vidlet& vj);

// Aligns the videos, scores every vidlet pair with the classifier and fuses
// the probabilities. Sum fusion: fused = sum of probs, threshold
// 0.5 * vidlet count; max fusion: fused = max prob, threshold 0.5. The
// construction is order-sensitive: score(a, b) and score(b, a) may differ.
ScoreReport score_video_pair(const PipelineModel& model, const VideoSequence& a,
                             const VideoSequence& b);

}  // namespace smnae

#endif
