#include "smnae/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>

#include "smnae/errors.hpp"

namespace smnae {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) {
      throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
    }
  }
}

void parse_stage(const json& obj, RunConfig::Stage& stage, const std::string& where) {
  reject_unknown(obj, {"lambda", "beta", "eta0", "rel_tol", "max_epochs", "widths"}, where);
  if (obj.contains("lambda")) stage.lambda = obj["lambda"].get<double>();
  if (obj.contains("beta")) stage.beta = obj["beta"].get<double>();
  if (obj.contains("eta0")) stage.eta0 = obj["eta0"].get<double>();
  if (obj.contains("rel_tol")) stage.rel_tol = obj["rel_tol"].get<double>();
  if (obj.contains("max_epochs")) stage.max_epochs = obj["max_epochs"].get<std::size_t>();
  if (obj.contains("widths")) stage.widths = obj["widths"].get<std::vector<std::size_t>>();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("config: top level must be an object");
  reject_unknown(root, {"z", "p", "scale", "seed", "fusion", "stage1", "stage2", "stage3", "svm"},
                 "top level");

  RunConfig cfg;
  if (root.contains("z")) cfg.z = root["z"].get<std::size_t>();
  if (root.contains("p")) cfg.p = root["p"].get<double>();
  if (root.contains("scale")) cfg.scale = root["scale"].get<std::size_t>();
  if (root.contains("seed")) cfg.seed = root["seed"].get<std::uint64_t>();
  if (root.contains("fusion")) {
    const std::string f = root["fusion"].get<std::string>();
    if (f == "sum") {
      cfg.fusion = FusionRule::kSum;
    } else if (f == "max") {
      cfg.fusion = FusionRule::kMax;
    } else {
      throw ValidationError("config: fusion must be 'sum' or 'max', got '" + f + "'");
    }
  }
  if (root.contains("stage1")) parse_stage(root["stage1"], cfg.stage1, "stage1");
  if (root.contains("stage2")) parse_stage(root["stage2"], cfg.stage2, "stage2");
  if (root.contains("stage3")) parse_stage(root["stage3"], cfg.stage3, "stage3");
  if (root.contains("svm")) {
    const json& svm = root["svm"];
    reject_unknown(svm, {"c", "gamma", "tol", "grid_search"}, "svm");
    if (svm.contains("c")) cfg.svm.c = svm["c"].get<double>();
    if (svm.contains("gamma")) cfg.svm.gamma = svm["gamma"].get<double>();
    if (svm.contains("tol")) cfg.svm.tol = svm["tol"].get<double>();
    if (svm.contains("grid_search")) cfg.svm.grid_search = svm["grid_search"].get<bool>();
  }
  if (cfg.scale < 1) throw ValidationError("config: scale must be at least 1");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_run_config(text);
}

PipelineConfig RunConfig::to_pipeline_config() const {
  auto scaled = [&](const std::vector<std::size_t>& widths) {
    std::vector<std::size_t> out;
    for (std::size_t w : widths) out.push_back(std::max<std::size_t>(1, w / scale));
    return out;
  };
  auto stage_cfg = [&](const Stage& s) {
    TrainConfig tc;
    tc.lambda = s.lambda;
    tc.beta = s.beta;
    tc.p = p;
    tc.eta0 = s.eta0;
    tc.rel_tol = s.rel_tol;
    tc.max_epochs = s.max_epochs;
    return tc;
  };

  PipelineConfig out;
  out.stage1 = stage_cfg(stage1);
  out.stage2 = stage_cfg(stage2);
  out.stage3 = stage_cfg(stage3);
  out.widths1 = scaled(stage1.widths);
  out.widths2 = scaled(stage2.widths);
  out.widths3 = scaled(stage3.widths);
  out.svm = svm;
  out.z = z;
  out.fusion = fusion;
  out.seed = Seed{seed};
  return out;
}

}  // namespace smnae
