#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ckm/dataset.hpp"
#include "ckm/ensemble.hpp"
#include "ckm/synthetic.hpp"

namespace ckm {

// One entry in the model pool. Kinds: "linear", "lasso", "forest",
// "boosted". Hyperparameters are kind-specific; unknown keys are rejected
// at validation time so typos fail fast.
struct ModelSpec {
  std::string id;
  std::string kind;
  nlohmann::json hyper = nlohmann::json::object();
};

struct CsvSource {
  std::filesystem::path train;
  std::filesystem::path calibration;
  std::filesystem::path test;
  std::optional<std::filesystem::path> extrapolation;
  Eigen::Index n_inputs = 2;
};

// lr, lasso, rf, gb with library default hyperparameters.
std::vector<ModelSpec> default_model_pool();

// 800/500/500/500 noisy constant-curvature samples; extrapolation commands
// drift beyond the training range.
SynthConfig default_synth_task();

// Full declarative description of a run. Every field has a default; the
// effective values (defaults included) are echoed into the manifests so a
// run can be reproduced from its own output.
struct RunConfig {
  SynthConfig synth = default_synth_task();  // active unless csv is set
  std::optional<CsvSource> csv;

  std::vector<ModelSpec> models = default_model_pool();
  double alpha = 0.1;
  bool standardize = true;
  std::string selection_metric = "rmse";  // ranked on the calibration split
  bool joint_bonferroni = false;
  BoostedParams cqr_gb;              // quantile models backing QR/CQR
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";

  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::filesystem::path& path);
};

// Materializes the configured data source: regenerates the synthetic bundle
// from its seed, or loads the CSV splits. Deterministic per config.
SplitBundle load_run_data(const RunConfig& cfg);

struct TrainOutcome {
  std::vector<std::string> trained;             // ids in pool order
  std::map<std::string, std::string> failures;  // id -> reason
  std::string best_id;
};

// Subcommand bodies. Artifact layout under cfg.out_dir:
//   data/      train/calibration/test/extrapolation CSVs + manifest.json
//   models/    <id>.json model documents + manifest.json (selection)
//   metrics/   train_metrics.{csv,json}, evaluation.{csv,json}
//   conformal/ interval CSVs per method/split + comparison.{csv,json}
//   report/    report.json, ecdf_commands.csv, positions_<split>.csv
void cmd_generate(const RunConfig& cfg);
TrainOutcome cmd_train(const RunConfig& cfg);
void cmd_conformal(const RunConfig& cfg, const std::string& model_id = "");
void cmd_evaluate(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

}  // namespace ckm
