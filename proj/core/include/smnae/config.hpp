#ifndef SMNAE_CONFIG_HPP
#define SMNAE_CONFIG_HPP

#include <string>

#include "smnae/pipeline.hpp"

namespace smnae {

// JSON run configuration for the pipeline. Recognized keys:
//   z, p, scale, seed, fusion ("sum" | "max"),
//   stage1/stage2/stage3: { lambda, beta, eta0, rel_tol, max_epochs, widths },
//   svm: { c, gamma, tol, grid_search }
// Unknown keys are rejected. Widths are full-scale; `scale` divides them
// (minimum 1) for desk-scale runs.
struct RunConfig {
  std::size_t z = 2;
  double p = 0.8;
  std::size_t scale = 64;
  std::uint64_t seed = 0;
  FusionRule fusion = FusionRule::kSum;

  struct Stage {
    double lambda = 1e-3;
    double beta = 1e-3;
    double eta0 = 0.1;
    double rel_tol = 1e-6;
    std::size_t max_epochs = 200;
    std::vector<std::size_t> widths;
  };
  Stage stage1{1e-3, 1e-3, 0.1, 1e-6, 200, {8192, 4096, 2048}};
  Stage stage2{1e-3, 1e-3, 0.1, 1e-6, 200, {2304, 1024}};
  Stage stage3{1e-3, 1e-3, 0.1, 1e-6, 200, {3072, 2048}};
  SvmConfig svm;

  PipelineConfig to_pipeline_config() const;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

}  // namespace smnae

#endif
