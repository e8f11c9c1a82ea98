// Command-line front end: synthetic data generation, pipeline training,
// pair-list evaluation, single-pair scoring, the digit benchmark, and a
// finite-difference gradient check.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>

#include "smnae/config.hpp"
#include "smnae/data_io.hpp"
#include "smnae/errors.hpp"
#include "smnae/eval.hpp"
#include "smnae/pipeline.hpp"
#include "smnae/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace smnae;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

VideoSequence load_video(const std::string& data_root, const std::string& rel) {
  return load_video_dir((fs::path(data_root) / rel).string());
}

struct PairScores {
  double sum_norm = 0.0;  // sum-rule score divided by the vidlet count
  double max_score = 0.0;
  std::size_t vidlets = 0;
};

// Scores both orders and averages, so the result does not depend on the
// order the two videos appear in the pair list.
PairScores score_pair_symmetric(const PipelineModel& model, const VideoSequence& a,
                                const VideoSequence& b) {
  const ScoreReport ab = score_video_pair(model, a, b);
  const ScoreReport ba = score_video_pair(model, b, a);
  PairScores out;
  out.vidlets = ab.per_vidlet_probs.size();
  double sum_ab = 0.0, sum_ba = 0.0, max_ab = 0.0, max_ba = 0.0;
  for (double p : ab.per_vidlet_probs) {
    sum_ab += p;
    max_ab = std::max(max_ab, p);
  }
  for (double p : ba.per_vidlet_probs) {
    sum_ba += p;
    max_ba = std::max(max_ba, p);
  }
  const double na = static_cast<double>(ab.per_vidlet_probs.size());
  const double nb = static_cast<double>(ba.per_vidlet_probs.size());
  out.sum_norm = 0.5 * (sum_ab / na + sum_ba / nb);
  out.max_score = 0.5 * (max_ab + max_ba);
  return out;
}

void write_roc_csv(const std::string& path, const std::vector<RocPoint>& roc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot write ROC CSV: " + path);
  out << "threshold,far,frr\n";
  char buf[128];
  for (const auto& pt : roc) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", pt.threshold, pt.far, pt.frr);
    out << buf;
  }
}

int run_gen_synthetic(const SyntheticConfig& cfg, const std::string& out_dir) {
  const std::string csv = gen_synthetic_kin(cfg, out_dir);
  std::cout << "wrote dataset under " << out_dir << "\n";
  std::cout << "pair list: " << csv << "\n";
  return kExitOk;
}

int run_train(const std::string& config_path, const std::string& data_root,
              const std::string& pairs_path, const std::string& model_out,
              const std::string& trace_dir) {
  const RunConfig run_cfg =
      config_path.empty() ? RunConfig{} : load_run_config(config_path);
  const PipelineConfig cfg = run_cfg.to_pipeline_config();

  const auto records = load_pair_list(pairs_path);
  std::vector<LabeledVideoPair> pairs;
  for (const auto& rec : records) {
    LabeledVideoPair p;
    p.a = load_video(data_root, rec.video_a);
    p.b = load_video(data_root, rec.video_b);
    p.kin = rec.kin;
    p.relation = rec.relation;
    pairs.push_back(std::move(p));
  }

  const TrainPipelineResult result = train_pipeline(pairs, cfg);
  save_model(result.model, model_out);
  std::cout << "trained on " << pairs.size() << " pairs; classifier training accuracy "
            << result.svm_train_accuracy * 100.0 << "%\n";
  std::cout << "model written to " << model_out << "\n";

  if (!trace_dir.empty()) {
    fs::create_directories(trace_dir);
    auto dump = [&](const char* stage, const std::vector<std::vector<TraceRow>>& traces) {
      for (std::size_t k = 0; k < traces.size(); ++k) {
        const std::string path =
            (fs::path(trace_dir) / (std::string(stage) + "_layer" + std::to_string(k) + ".csv"))
                .string();
        std::ofstream out(path, std::ios::trunc);
        write_trace_csv(out, traces[k]);
      }
    };
    dump("stage1", result.stage1_traces);
    dump("stage2", result.stage2_traces);
    dump("stage3", result.stage3_traces);
    std::cout << "training traces written to " << trace_dir << "\n";
  }
  return kExitOk;
}

int run_eval(const std::string& model_path, const std::string& data_root,
             const std::string& pairs_path, const std::string& report_path,
             const std::string& fusion, const std::string& roc_csv) {
  if (fusion != "sum" && fusion != "max" && fusion != "both") {
    throw ValidationError("--fusion must be sum, max or both");
  }
  const PipelineModel model = load_model(model_path);
  const auto records = load_pair_list(pairs_path);
  if (records.empty()) throw ValidationError("eval: empty pair list");

  std::vector<int> labels;
  std::vector<double> sum_scores, max_scores;
  json pair_rows = json::array();
  bool any_relation = false;
  for (const auto& rec : records) {
    const VideoSequence a = load_video(data_root, rec.video_a);
    const VideoSequence b = load_video(data_root, rec.video_b);
    const PairScores s = score_pair_symmetric(model, a, b);
    labels.push_back(rec.kin ? 1 : 0);
    sum_scores.push_back(s.sum_norm);
    max_scores.push_back(s.max_score);
    json row{{"video_a", rec.video_a},
             {"video_b", rec.video_b},
             {"label", rec.kin ? 1 : 0},
             {"vidlets", s.vidlets},
             {"sum_score", s.sum_norm},
             {"max_score", s.max_score}};
    if (!rec.relation.empty()) {
      row["relation"] = rec.relation;
      any_relation = true;
    }
    pair_rows.push_back(std::move(row));
  }

  json report;
  report["pairs"] = pair_rows;
  json results = json::object();

  const bool want_sum = fusion == "sum" || fusion == "both";
  const bool want_max = fusion == "max" || fusion == "both";
  auto evaluate = [&](const std::vector<double>& scores, const char* name) {
    const EvalResult r = compute_eer(scores, labels);
    results[name] = {{"eer", r.eer}, {"accuracy_pct", r.accuracy_pct}};
    report["n_pos"] = r.n_pos;
    report["n_neg"] = r.n_neg;
    std::cout << name << " fusion: EER " << r.eer << ", accuracy " << r.accuracy_pct << "%\n";
    if (!roc_csv.empty()) {
      const std::string path = fusion == "both" ? roc_csv + "." + name + ".csv" : roc_csv;
      write_roc_csv(path, r.roc);
    }
    return r;
  };
  if (want_sum) evaluate(sum_scores, "sum");
  if (want_max) evaluate(max_scores, "max");

  // Per-relation accuracy, only when the pair list carries relations.
  if (any_relation && want_sum) {
    json per_rel = json::object();
    std::vector<std::string> rels;
    for (const auto& rec : records)
      if (!rec.relation.empty() &&
          std::find(rels.begin(), rels.end(), rec.relation) == rels.end())
        rels.push_back(rec.relation);
    for (const auto& rel : rels) {
      std::vector<double> rs;
      std::vector<int> rl;
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].relation == rel) {
          rs.push_back(sum_scores[i]);
          rl.push_back(labels[i]);
        }
      }
      bool pos = false, neg = false;
      for (int l : rl) (l ? pos : neg) = true;
      if (pos && neg) {
        const EvalResult r = compute_eer(rs, rl);
        per_rel[rel] = {{"eer", r.eer}, {"accuracy_pct", r.accuracy_pct}, {"pairs", rl.size()}};
      }
    }
    report["per_relation"] = per_rel;
  }

  report["results"] = results;
  std::ofstream out(report_path, std::ios::trunc);
  if (!out) throw ValidationError("cannot write report: " + report_path);
  out << report.dump(2) << "\n";
  std::cout << "report written to " << report_path << "\n";
  return kExitOk;
}

int run_score(const std::string& model_path, const std::string& video_a,
              const std::string& video_b) {
  const PipelineModel model = load_model(model_path);
  const VideoSequence a = load_video_dir(video_a);
  const VideoSequence b = load_video_dir(video_b);

  const ScoreReport ab = score_video_pair(model, a, b);
  const ScoreReport ba = score_video_pair(model, b, a);

  auto print_probs = [](const char* tag, const ScoreReport& r) {
    std::cout << tag << " per-vidlet probabilities:";
    for (double p : r.per_vidlet_probs) std::cout << " " << p;
    std::cout << "\n" << tag << " fused score: " << r.fused_score << "\n";
  };
  print_probs("a->b", ab);
  print_probs("b->a", ba);

  const double fused = 0.5 * (ab.fused_score + ba.fused_score);
  const double threshold = ab.threshold;
  std::cout << "averaged fused score: " << fused << " (threshold " << threshold << ")\n";
  std::cout << "decision: " << (fused >= threshold ? "kin" : "non-kin") << "\n";
  return kExitOk;
}

int run_mnist(const std::string& train_images, const std::string& train_labels,
              const std::string& test_images, const std::string& test_labels,
              MnistConfig cfg, const std::string& widths_csv, const std::string& report_path) {
  if (!widths_csv.empty()) {
    cfg.widths.clear();
    std::stringstream ss(widths_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) cfg.widths.push_back(std::stoul(tok));
  }
  auto [train_x, train_y] = load_mnist_idx(train_images, train_labels);
  auto [test_x, test_y] = load_mnist_idx(test_images, test_labels);

  const MnistReport report = mnist_benchmark(train_x, train_y, test_x, test_y, cfg);
  std::cout << "train " << report.n_train << " / test " << report.n_test << "\n";
  std::cout << "supervised mixed-norm error: " << report.smnae_error_pct << "%\n";
  std::cout << "plain autoencoder error:     " << report.baseline_error_pct << "%\n";

  if (!report_path.empty()) {
    json j{{"smnae_error_pct", report.smnae_error_pct},
           {"baseline_error_pct", report.baseline_error_pct},
           {"n_train", report.n_train},
           {"n_test", report.n_test},
           {"widths", cfg.widths},
           {"lambda", cfg.lambda},
           {"beta", cfg.beta},
           {"p", cfg.p},
           {"max_epochs", cfg.max_epochs},
           {"seed", cfg.seed.value}};
    std::ofstream out(report_path, std::ios::trunc);
    if (!out) throw ValidationError("cannot write report: " + report_path);
    out << j.dump(2) << "\n";
    std::cout << "report written to " << report_path << "\n";
  }
  return kExitOk;
}

int run_gradcheck(std::size_t instances) {
  double worst = 0.0;
  for (std::size_t s = 0; s < instances; ++s) {
    Rng dims(Seed{9000 + s});
    const std::size_t d = 4 + dims.next_u64() % 17;   // up to 20 features
    const std::size_t n = 4 + dims.next_u64() % 13;   // up to 16 samples
    const std::size_t h = 2 + dims.next_u64() % 6;
    const double beta = (s % 2) ? 0.5 : 0.0;

    Matrix x(d, n);
    Rng rng(Seed{9100 + s});
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
    std::vector<int> labels(n);
    for (auto& l : labels) l = static_cast<int>(rng.next_u64() % 2);
    const ClassPartition part = ClassPartition::from_labels(x, labels);
    const Laplacian lap = build_laplacian(build_supervision_matrix(labels));

    SmnaeLayer layer{init_weights(h, d, Seed{9200 + s}), init_weights(d, h, Seed{9300 + s})};
    TrainConfig cfg;
    cfg.lambda = 0.0;
    cfg.beta = beta;

    const SmoothGradients g = grad_smooth(layer, x, lap, beta);
    const double step = 1e-5;
    for (Matrix* w : {&layer.w_enc, &layer.w_dec}) {
      const Matrix& grad = (w == &layer.w_enc) ? g.w_enc : g.w_dec;
      for (std::size_t i = 0; i < w->size(); ++i) {
        const double keep = w->data()[i];
        w->data()[i] = keep + step;
        const double up = loss_smnae(layer, x, part, lap, cfg).total;
        w->data()[i] = keep - step;
        const double down = loss_smnae(layer, x, part, lap, cfg).total;
        w->data()[i] = keep;
        const double fd = (up - down) / (2.0 * step);
        const double rel = std::abs(fd - grad.data()[i]) /
                           std::max({1.0, std::abs(fd), std::abs(grad.data()[i])});
        worst = std::max(worst, rel);
      }
    }
  }
  std::cout << "max relative error vs central finite differences: " << worst << "\n";
  if (worst > 1e-5) {
    std::cerr << "gradient check FAILED (tolerance 1e-5)\n";
    return kExitNumerical;
  }
  std::cout << "gradient check passed (tolerance 1e-5)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-norm autoencoder kinship verification in videos"};
  app.require_subcommand(1);

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "Generate a synthetic kinship video dataset");
  SyntheticConfig syn_cfg;
  std::string gen_out;
  std::uint64_t gen_seed = 0;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--families", syn_cfg.families, "Number of families");
  gen->add_option("--latent-dim", syn_cfg.latent_dim, "Latent dimension");
  gen->add_option("--frame-dim", syn_cfg.frame_dim, "Flattened frame dimension");
  gen->add_option("--frames", syn_cfg.frames_per_video, "Frames per video");
  gen->add_option("--kin-noise", syn_cfg.kin_noise, "Member deviation from the family latent");
  gen->add_option("--nonkin-gap", syn_cfg.nonkin_gap, "Minimum non-kin latent distance");
  gen->add_option("--drift", syn_cfg.drift, "Per-frame latent drift");
  gen->add_option("--seed", gen_seed, "RNG seed");

  // train
  auto* train = app.add_subcommand("train", "Train the three-stage pipeline");
  std::string train_config, train_data, train_pairs, train_model_out, train_trace_dir;
  train->add_option("--config", train_config, "JSON run configuration");
  train->add_option("--data", train_data, "Data root directory")->required();
  train->add_option("--pairs", train_pairs, "Training pair list CSV")->required();
  train->add_option("--model-out", train_model_out, "Output model file")->required();
  train->add_option("--trace-dir", train_trace_dir, "Directory for training-trace CSVs");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a model on a pair list");
  std::string eval_model, eval_data, eval_pairs, eval_report, eval_roc;
  std::string eval_fusion = "sum";
  eval->add_option("--model", eval_model, "Model file")->required();
  eval->add_option("--data", eval_data, "Data root directory")->required();
  eval->add_option("--pairs", eval_pairs, "Pair list CSV")->required();
  eval->add_option("--report", eval_report, "Output JSON report")->required();
  eval->add_option("--fusion", eval_fusion, "sum, max or both");
  eval->add_option("--roc-csv", eval_roc, "Also write the ROC as CSV");

  // score
  auto* score = app.add_subcommand("score", "Score one pair of frame directories");
  std::string score_model, score_a, score_b;
  score->add_option("--model", score_model, "Model file")->required();
  score->add_option("--video-a", score_a, "First frame directory")->required();
  score->add_option("--video-b", score_b, "Second frame directory")->required();

  // mnist
  auto* mnist = app.add_subcommand("mnist", "Digit benchmark vs a plain autoencoder");
  std::string mn_tri, mn_trl, mn_tei, mn_tel, mn_widths, mn_report;
  MnistConfig mn_cfg;
  std::uint64_t mn_seed = 0;
  mnist->add_option("--train-images", mn_tri, "IDX training images")->required();
  mnist->add_option("--train-labels", mn_trl, "IDX training labels")->required();
  mnist->add_option("--test-images", mn_tei, "IDX test images")->required();
  mnist->add_option("--test-labels", mn_tel, "IDX test labels")->required();
  mnist->add_option("--train-count", mn_cfg.train_count, "Training subset size");
  mnist->add_option("--test-count", mn_cfg.test_count, "Test subset size");
  mnist->add_option("--widths", mn_widths, "Comma-separated layer widths");
  mnist->add_option("--lambda", mn_cfg.lambda, "Group-sparsity weight");
  mnist->add_option("--beta", mn_cfg.beta, "Discrimination weight");
  mnist->add_option("--p", mn_cfg.p, "Mixed-norm exponent");
  mnist->add_option("--epochs", mn_cfg.max_epochs, "Epoch budget per layer");
  mnist->add_option("--svm-c", mn_cfg.svm.c, "SVM C");
  mnist->add_option("--svm-gamma", mn_cfg.svm.gamma, "SVM gamma (0: 1/dim)");
  mnist->add_option("--seed", mn_seed, "RNG seed");
  mnist->add_option("--report", mn_report, "Output JSON report");

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  std::size_t gc_instances = 20;
  gradcheck->add_option("--instances", gc_instances, "Number of random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (gen->parsed()) {
      syn_cfg.seed = Seed{gen_seed};
      return run_gen_synthetic(syn_cfg, gen_out);
    }
    if (train->parsed()) {
      return run_train(train_config, train_data, train_pairs, train_model_out, train_trace_dir);
    }
    if (eval->parsed()) {
      return run_eval(eval_model, eval_data, eval_pairs, eval_report, eval_fusion, eval_roc);
    }
    if (score->parsed()) {
      return run_score(score_model, score_a, score_b);
    }
    if (mnist->parsed()) {
      mn_cfg.seed = Seed{mn_seed};
      return run_mnist(mn_tri, mn_trl, mn_tei, mn_tel, mn_cfg, mn_widths, mn_report);
    }
    if (gradcheck->parsed()) {
      return run_gradcheck(gc_instances);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
