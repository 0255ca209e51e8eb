#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ckm/errors.hpp"
#include "ckm/pipeline.hpp"

namespace {

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  for (char c : csv) {
    if (c == ',') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else {
      item += c;
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

void filter_pool(ckm::RunConfig& cfg, const std::vector<std::string>& ids) {
  std::vector<ckm::ModelSpec> kept;
  for (const std::string& id : ids) {
    bool found = false;
    for (const ckm::ModelSpec& spec : cfg.models) {
      if (spec.id == id) {
        kept.push_back(spec);
        found = true;
        break;
      }
    }
    if (!found) throw ckm::ConfigError("--models names unknown model id '" + id + "'");
  }
  cfg.models = std::move(kept);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven kinematic modeling with conformal prediction intervals"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<std::string> out_dir;
  std::string models_arg;

  app.add_option("--config", config_path, "Run configuration JSON file");
  app.add_option("--seed", seed, "Override the run seed");
  app.add_option("--alpha", alpha, "Override the interval significance level");
  app.add_option("--out", out_dir, "Override the output directory");
  app.add_option("--models", models_arg,
                 "Comma-separated model ids: filters the pool for train, picks the "
                 "models to calibrate for conformal");

  CLI::App* generate = app.add_subcommand("generate", "Write the data splits to disk");
  CLI::App* train = app.add_subcommand("train", "Fit the model pool and flag the best model");
  CLI::App* conformal =
      app.add_subcommand("conformal", "Calibrate prediction intervals for a trained model");
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Recompute metrics from the saved models");
  CLI::App* report = app.add_subcommand("report", "Consolidate artifacts and plot data");
  for (CLI::App* sub : {generate, train, conformal, evaluate, report}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    ckm::RunConfig cfg;
    if (!config_path.empty()) cfg = ckm::RunConfig::from_file(config_path);
    if (seed) {
      cfg.seed = *seed;
      if (!cfg.csv) cfg.synth.seed = *seed;
    }
    if (alpha) cfg.alpha = *alpha;
    if (out_dir) cfg.out_dir = *out_dir;
    const std::vector<std::string> ids = split_list(models_arg);

    if (generate->parsed()) {
      ckm::cmd_generate(cfg);
      std::cout << "data written to " << (cfg.out_dir / "data").string() << "\n";
    } else if (train->parsed()) {
      if (!ids.empty()) filter_pool(cfg, ids);
      const ckm::TrainOutcome outcome = ckm::cmd_train(cfg);
      for (const auto& [id, why] : outcome.failures) {
        std::cout << id << ": FAILED (" << why << ")\n";
      }
      std::cout << "trained " << outcome.trained.size() << " model(s); best: "
                << outcome.best_id << "\n";
    } else if (conformal->parsed()) {
      if (ids.empty()) {
        ckm::cmd_conformal(cfg);
      } else {
        for (const std::string& id : ids) ckm::cmd_conformal(cfg, id);
      }
      std::cout << "conformal artifacts written to "
                << (cfg.out_dir / "conformal").string() << "\n";
    } else if (evaluate->parsed()) {
      ckm::cmd_evaluate(cfg);
      std::cout << "evaluation written to " << (cfg.out_dir / "metrics").string() << "\n";
    } else if (report->parsed()) {
      ckm::cmd_report(cfg);
      std::cout << "report written to " << (cfg.out_dir / "report").string() << "\n";
    }
  } catch (const ckm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ckm::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const ckm::FitError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
