#include "ckm/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <limits>
#include <set>
#include <utility>

#include "ckm/conformal.hpp"
#include "ckm/errors.hpp"
#include "ckm/format.hpp"
#include "ckm/linear.hpp"
#include "ckm/log.hpp"
#include "ckm/metrics.hpp"
#include "ckm/model_io.hpp"

namespace ckm {

namespace {

namespace fs = std::filesystem;

void require_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

CommandRange range_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError(where + " must be a [lo, hi] pair");
  }
  return CommandRange{j[0].get<double>(), j[1].get<double>()};
}

SynthConfig::Role role_from_json(const nlohmann::json& j,
                                 const SynthConfig::Role& defaults,
                                 const std::string& where) {
  require_keys(j, {"count", "u1", "u2"}, where);
  SynthConfig::Role role = defaults;
  if (j.contains("count")) role.count = j.at("count").get<Eigen::Index>();
  if (j.contains("u1")) role.ranges[0] = range_from_json(j.at("u1"), where + ".u1");
  if (j.contains("u2")) role.ranges[1] = range_from_json(j.at("u2"), where + ".u2");
  return role;
}

nlohmann::json role_to_json(const SynthConfig::Role& r) {
  return {{"count", r.count},
          {"u1", {r.ranges[0].lo, r.ranges[0].hi}},
          {"u2", {r.ranges[1].lo, r.ranges[1].hi}}};
}

nlohmann::json synth_to_json(const SynthConfig& s) {
  return {{"segment_length", s.segment_length},
          {"curvature_gain", s.curvature_gain},
          {"plane_gain", s.plane_gain},
          {"noise_std", s.noise_std},
          {"seed", s.seed},
          {"train", role_to_json(s.train)},
          {"calibration", role_to_json(s.calibration)},
          {"test", role_to_json(s.test)},
          {"extrapolation", role_to_json(s.extrapolation)}};
}

SynthConfig synth_from_json(const nlohmann::json& j, const SynthConfig& defaults) {
  require_keys(j,
               {"segment_length", "curvature_gain", "plane_gain", "noise_std",
                "seed", "train", "calibration", "test", "extrapolation"},
               "data.synthetic");
  SynthConfig s = defaults;
  if (j.contains("segment_length")) s.segment_length = j.at("segment_length").get<double>();
  if (j.contains("curvature_gain")) s.curvature_gain = j.at("curvature_gain").get<double>();
  if (j.contains("plane_gain")) s.plane_gain = j.at("plane_gain").get<double>();
  if (j.contains("noise_std")) s.noise_std = j.at("noise_std").get<double>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("train")) s.train = role_from_json(j.at("train"), defaults.train, "data.synthetic.train");
  if (j.contains("calibration")) {
    s.calibration = role_from_json(j.at("calibration"), defaults.calibration,
                                   "data.synthetic.calibration");
  }
  if (j.contains("test")) s.test = role_from_json(j.at("test"), defaults.test, "data.synthetic.test");
  if (j.contains("extrapolation")) {
    s.extrapolation = role_from_json(j.at("extrapolation"), defaults.extrapolation,
                                     "data.synthetic.extrapolation");
  }
  return s;
}

CsvSource csv_from_json(const nlohmann::json& j) {
  require_keys(j, {"train", "calibration", "test", "extrapolation", "n_inputs"},
               "data.csv");
  CsvSource src;
  src.train = j.at("train").get<std::string>();
  src.calibration = j.at("calibration").get<std::string>();
  src.test = j.at("test").get<std::string>();
  if (j.contains("extrapolation")) {
    src.extrapolation = fs::path(j.at("extrapolation").get<std::string>());
  }
  if (j.contains("n_inputs")) src.n_inputs = j.at("n_inputs").get<Eigen::Index>();
  return src;
}

nlohmann::json csv_to_json(const CsvSource& src) {
  nlohmann::json j{{"train", src.train.string()},
                   {"calibration", src.calibration.string()},
                   {"test", src.test.string()},
                   {"n_inputs", src.n_inputs}};
  if (src.extrapolation) j["extrapolation"] = src.extrapolation->string();
  return j;
}

BoostedParams cqr_from_json(const nlohmann::json& j, const BoostedParams& defaults) {
  require_keys(j, {"n_stages", "max_depth", "learning_rate", "min_samples_leaf"}, "cqr");
  BoostedParams p = defaults;
  if (j.contains("n_stages")) p.n_stages = j.at("n_stages").get<int>();
  if (j.contains("max_depth")) p.max_depth = j.at("max_depth").get<int>();
  if (j.contains("learning_rate")) p.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("min_samples_leaf")) {
    p.min_samples_leaf = j.at("min_samples_leaf").get<Eigen::Index>();
  }
  return p;
}

nlohmann::json cqr_to_json(const BoostedParams& p) {
  return {{"n_stages", p.n_stages},
          {"max_depth", p.max_depth},
          {"learning_rate", p.learning_rate},
          {"min_samples_leaf", p.min_samples_leaf}};
}

ModelSpec spec_from_json(const nlohmann::json& j, std::size_t index) {
  const std::string where = "models[" + std::to_string(index) + "]";
  require_keys(j, {"id", "kind", "hyper"}, where);
  ModelSpec spec;
  spec.id = j.at("id").get<std::string>();
  spec.kind = j.at("kind").get<std::string>();
  if (j.contains("hyper")) {
    if (!j.at("hyper").is_object()) throw ConfigError(where + ".hyper must be an object");
    spec.hyper = j.at("hyper");
  }
  return spec;
}

bool filename_safe(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

void write_text_file(const std::string& text, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += ", ";
    s += parts[i];
  }
  return s;
}

// --- model fitting ---------------------------------------------------------

std::shared_ptr<Regressor> fit_spec(const ModelSpec& spec, const Dataset& train,
                                    const RunConfig& cfg) {
  const nlohmann::json& h = spec.hyper;
  const std::string where = "models." + spec.id + ".hyper";

  std::optional<Standardizer> scaler;
  Dataset fit_data = train;
  if (cfg.standardize) {
    scaler = fit_standardizer(train);
    fit_data = scaler->apply(train);
  }

  std::shared_ptr<Regressor> inner;
  if (spec.kind == "linear") {
    require_keys(h, {}, where);
    inner = std::make_shared<LinearModel>(fit_linear(fit_data));
  } else if (spec.kind == "lasso") {
    require_keys(h, {"lambda", "max_iter", "tol"}, where);
    LassoParams p;
    p.lambda = h.value("lambda", 0.01);
    p.max_iter = h.value("max_iter", 10000);
    p.tol = h.value("tol", 1e-6);
    LassoResult r = fit_lasso(fit_data, p);
    if (!r.converged) {
      log::warn(spec.id + ": coordinate descent stopped at the sweep limit");
    }
    inner = std::make_shared<LinearModel>(std::move(r.model));
  } else if (spec.kind == "forest") {
    require_keys(h, {"n_trees", "max_depth", "min_samples_leaf", "feature_fraction",
                     "bootstrap", "seed"},
                 where);
    ForestParams p;
    p.n_trees = h.value("n_trees", 200);
    p.tree.max_depth = h.value("max_depth", -1);
    p.tree.min_samples_leaf = h.value("min_samples_leaf", static_cast<Eigen::Index>(1));
    p.tree.feature_fraction = h.value("feature_fraction", 1.0);
    p.bootstrap = h.value("bootstrap", true);
    p.seed = h.value("seed", cfg.seed);
    inner = std::make_shared<ForestModel>(fit_forest(fit_data, p));
  } else if (spec.kind == "boosted") {
    require_keys(h, {"n_stages", "max_depth", "learning_rate", "min_samples_leaf"}, where);
    BoostedParams p;
    p.n_stages = h.value("n_stages", 300);
    p.max_depth = h.value("max_depth", 3);
    p.learning_rate = h.value("learning_rate", 0.1);
    p.min_samples_leaf = h.value("min_samples_leaf", static_cast<Eigen::Index>(1));
    inner = std::make_shared<BoostedModel>(fit_boosted(fit_data, p));
  } else {
    throw ConfigError("model '" + spec.id + "' has unknown kind '" + spec.kind + "'");
  }

  if (scaler) return std::make_shared<StandardizedRegressor>(*scaler, inner);
  return inner;
}

// --- artifact writers ------------------------------------------------------

std::string reports_to_csv(const std::vector<MetricReport>& reports) {
  std::string text = MetricReport::csv_header() + "\n";
  for (const MetricReport& r : reports) text += r.csv_row() + "\n";
  return text;
}

nlohmann::json reports_to_json(const std::vector<MetricReport>& reports) {
  nlohmann::json rows = nlohmann::json::array();
  for (const MetricReport& r : reports) rows.push_back(r.to_json());
  return rows;
}

void write_interval_csv(const fs::path& path, const std::vector<std::string>& names,
                        const IntervalBatch& b) {
  std::string text = "index";
  for (const std::string& n : names) {
    text += "," + n + "_lower," + n + "_center," + n + "_upper";
  }
  text += '\n';
  for (Eigen::Index i = 0; i < b.lower.rows(); ++i) {
    text += std::to_string(i);
    for (Eigen::Index d = 0; d < b.lower.cols(); ++d) {
      text += "," + format_double(b.lower(i, d));
      text += "," + format_double(b.center(i, d));
      text += "," + format_double(b.upper(i, d));
    }
    text += '\n';
  }
  write_text_file(text, path);
}

struct SplitRef {
  const char* name;
  const Dataset* data;
};

std::vector<SplitRef> named_splits(const SplitBundle& b) {
  return {{"train", &b.train},
          {"calibration", &b.calibration},
          {"test", &b.test},
          {"extrapolation", &b.extrapolation}};
}

void read_required(const fs::path& base, const std::vector<std::string>& rel,
                   std::vector<nlohmann::json>& out) {
  std::vector<std::string> missing;
  for (const std::string& r : rel) {
    if (!fs::exists(base / r)) missing.push_back(r);
  }
  if (!missing.empty()) {
    throw DataError("missing artifacts: " + join(missing) + "; run the earlier stages first");
  }
  for (const std::string& r : rel) out.push_back(read_json_file(base / r));
}

}  // namespace

// --- config ----------------------------------------------------------------

std::vector<ModelSpec> default_model_pool() {
  return {ModelSpec{"lr", "linear", nlohmann::json::object()},
          ModelSpec{"lasso", "lasso", nlohmann::json::object()},
          ModelSpec{"rf", "forest", nlohmann::json::object()},
          ModelSpec{"gb", "boosted", nlohmann::json::object()}};
}

SynthConfig default_synth_task() {
  SynthConfig s;
  s.noise_std = 0.05;
  s.train.count = 800;
  s.calibration.count = 500;
  s.test.count = 500;
  s.extrapolation.count = 500;
  s.extrapolation.ranges[0] = CommandRange{1.1, 1.6};
  return s;
}

void RunConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1), got " + format_double(alpha));
  }
  if (selection_metric != "rmse" && selection_metric != "mae") {
    throw ConfigError("selection_metric must be rmse or mae, got '" + selection_metric + "'");
  }
  if (models.empty()) throw ConfigError("the model pool is empty");
  std::set<std::string> ids;
  for (const ModelSpec& m : models) {
    if (!filename_safe(m.id)) {
      throw ConfigError("model id '" + m.id + "' must be nonempty [A-Za-z0-9_-]");
    }
    if (!ids.insert(m.id).second) throw ConfigError("duplicate model id '" + m.id + "'");
    if (m.kind != "linear" && m.kind != "lasso" && m.kind != "forest" &&
        m.kind != "boosted") {
      throw ConfigError("model '" + m.id + "' has unknown kind '" + m.kind + "'");
    }
  }
  if (cqr_gb.n_stages < 1) throw ConfigError("cqr.n_stages must be at least 1");
  if (out_dir.empty()) throw ConfigError("out_dir must be set");
  if (csv) {
    if (csv->n_inputs < 1) throw ConfigError("data.csv.n_inputs must be at least 1");
    std::vector<std::string> missing;
    for (const auto& [label, path] :
         {std::pair<std::string, fs::path>{"train", csv->train},
          {"calibration", csv->calibration},
          {"test", csv->test}}) {
      if (path.empty()) throw ConfigError("data.csv." + label + " is required");
      if (!fs::exists(path)) missing.push_back(path.string());
    }
    if (csv->extrapolation && !fs::exists(*csv->extrapolation)) {
      missing.push_back(csv->extrapolation->string());
    }
    if (!missing.empty()) throw ConfigError("missing data files: " + join(missing));
  } else {
    synth.validate();
    if (synth.train.count < 2) {
      throw ConfigError("synthetic training split needs at least 2 samples");
    }
  }
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json data;
  if (csv) {
    data["csv"] = csv_to_json(*csv);
  } else {
    data["synthetic"] = synth_to_json(synth);
  }
  nlohmann::json specs = nlohmann::json::array();
  for (const ModelSpec& m : models) {
    specs.push_back({{"id", m.id}, {"kind", m.kind}, {"hyper", m.hyper}});
  }
  return {{"seed", seed},
          {"alpha", alpha},
          {"standardize", standardize},
          {"selection_metric", selection_metric},
          {"joint_bonferroni", joint_bonferroni},
          {"out_dir", out_dir.string()},
          {"data", data},
          {"models", specs},
          {"cqr", cqr_to_json(cqr_gb)}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  require_keys(j,
               {"seed", "alpha", "standardize", "selection_metric",
                "joint_bonferroni", "out_dir", "data", "models", "cqr"},
               "config");
  RunConfig cfg;
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
  if (j.contains("standardize")) cfg.standardize = j.at("standardize").get<bool>();
  if (j.contains("selection_metric")) {
    cfg.selection_metric = j.at("selection_metric").get<std::string>();
  }
  if (j.contains("joint_bonferroni")) {
    cfg.joint_bonferroni = j.at("joint_bonferroni").get<bool>();
  }
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();

  cfg.synth.seed = cfg.seed;
  if (j.contains("data")) {
    const auto& data = j.at("data");
    require_keys(data, {"synthetic", "csv"}, "data");
    if (data.contains("synthetic") && data.contains("csv")) {
      throw ConfigError("data.synthetic and data.csv are mutually exclusive");
    }
    if (data.contains("csv")) {
      cfg.csv = csv_from_json(data.at("csv"));
    } else if (data.contains("synthetic")) {
      SynthConfig defaults = default_synth_task();
      defaults.seed = cfg.seed;
      cfg.synth = synth_from_json(data.at("synthetic"), defaults);
    }
  }
  if (j.contains("models")) {
    if (!j.at("models").is_array()) throw ConfigError("models must be an array");
    cfg.models.clear();
    std::size_t i = 0;
    for (const auto& spec : j.at("models")) cfg.models.push_back(spec_from_json(spec, i++));
  }
  if (j.contains("cqr")) cfg.cqr_gb = cqr_from_json(j.at("cqr"), BoostedParams{});
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file " + path.string() + " does not exist");
  try {
    return from_json(read_json_file(path));
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
}

// --- data ------------------------------------------------------------------

SplitBundle load_run_data(const RunConfig& cfg) {
  cfg.validate();
  if (!cfg.csv) return generate_synthetic(cfg.synth);
  const CsvSource& src = *cfg.csv;
  SplitBundle b;
  b.train = load_csv(src.train, src.n_inputs);
  b.calibration = load_csv(src.calibration, src.n_inputs);
  b.test = load_csv(src.test, src.n_inputs);
  if (src.extrapolation) b.extrapolation = load_csv(*src.extrapolation, src.n_inputs);
  for (const SplitRef& ref : named_splits(b)) {
    if (ref.data->empty() || ref.data == &b.train) continue;
    if (ref.data->input_names() != b.train.input_names() ||
        ref.data->output_names() != b.train.output_names()) {
      throw DataError(std::string("column names in the ") + ref.name +
                      " split do not match the training split");
    }
  }
  return b;
}

// --- subcommands -----------------------------------------------------------

void cmd_generate(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.csv) throw ConfigError("generate needs a synthetic data source, not csv");
  SplitBundle b = generate_synthetic(cfg.synth);
  BundleManifest manifest;
  manifest.seed = cfg.synth.seed;
  manifest.extra = {{"synthetic", synth_to_json(cfg.synth)}};
  fs::create_directories(cfg.out_dir / "data");
  save_bundle(b, cfg.out_dir / "data", manifest);
  log::info("wrote data splits to " + (cfg.out_dir / "data").string());
}

TrainOutcome cmd_train(const RunConfig& cfg) {
  cfg.validate();
  SplitBundle data = load_run_data(cfg);
  if (data.calibration.empty()) {
    throw DataError("model selection needs a nonempty calibration split");
  }
  fs::create_directories(cfg.out_dir / "models");
  fs::create_directories(cfg.out_dir / "metrics");

  std::vector<std::future<std::shared_ptr<Regressor>>> futures;
  futures.reserve(cfg.models.size());
  for (std::size_t i = 0; i < cfg.models.size(); ++i) {
    futures.push_back(std::async(std::launch::async, [&cfg, &data, i] {
      return fit_spec(cfg.models[i], data.train, cfg);
    }));
  }

  TrainOutcome outcome;
  std::vector<MetricReport> reports;
  nlohmann::json scores = nlohmann::json::object();
  nlohmann::json entries = nlohmann::json::array();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cfg.models.size(); ++i) {
    const ModelSpec& spec = cfg.models[i];
    std::shared_ptr<Regressor> model;
    try {
      model = futures[i].get();
    } catch (const std::exception& e) {
      outcome.failures[spec.id] = e.what();
      log::error(spec.id + ": fit failed: " + e.what());
      entries.push_back({{"id", spec.id}, {"kind", spec.kind}, {"hyper", spec.hyper},
                         {"trained", false}});
      continue;
    }
    outcome.trained.push_back(spec.id);

    Eigen::MatrixXd cal_pred = model->predict_batch(data.calibration.inputs());
    const double score = cfg.selection_metric == "mae"
                             ? mae(data.calibration.outputs(), cal_pred).mean
                             : rmse(data.calibration.outputs(), cal_pred).mean;
    scores[spec.id] = score;
    if (score < best) {
      best = score;
      outcome.best_id = spec.id;
    }

    for (const SplitRef& ref : {SplitRef{"train", &data.train}, SplitRef{"test", &data.test}}) {
      if (ref.data->empty()) continue;
      MetricReport r = evaluate_predictions(
          ref.data->outputs(), model->predict_batch(ref.data->inputs()));
      r.model_id = spec.id;
      r.split = ref.name;
      reports.push_back(std::move(r));
    }

    ModelDocument doc;
    doc.id = spec.id;
    doc.model = model;
    save_model_document(doc, cfg.out_dir / "models" / (spec.id + ".json"));
    entries.push_back({{"id", spec.id}, {"kind", spec.kind}, {"hyper", spec.hyper},
                       {"trained", true},
                       {"file", "models/" + spec.id + ".json"}});
  }

  if (outcome.trained.empty()) {
    throw FitError("every model in the pool failed; first error: " +
                   outcome.failures.begin()->second);
  }

  write_text_file(reports_to_csv(reports), cfg.out_dir / "metrics" / "train_metrics.csv");
  write_json_file({{"reports", reports_to_json(reports)}},
                  cfg.out_dir / "metrics" / "train_metrics.json");

  nlohmann::json failures = nlohmann::json::object();
  for (const auto& [id, why] : outcome.failures) failures[id] = why;
  write_json_file(
      {{"format_version", 1},
       {"selection",
        {{"metric", cfg.selection_metric},
         {"split", "calibration"},
         {"note", "the calibration split both ranks the pool and later calibrates "
                  "the selected model's intervals"},
         {"scores", scores},
         {"best", outcome.best_id}}},
       {"models", entries},
       {"failures", failures},
       {"config", cfg.to_json()}},
      cfg.out_dir / "models" / "manifest.json");
  log::info("best model by " + cfg.selection_metric + " on calibration: " + outcome.best_id);
  return outcome;
}

void cmd_conformal(const RunConfig& cfg, const std::string& model_id) {
  cfg.validate();
  const fs::path manifest_path = cfg.out_dir / "models" / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw DataError("missing artifacts: models/manifest.json; run train first");
  }
  const nlohmann::json manifest = read_json_file(manifest_path);
  const std::string id =
      model_id.empty() ? manifest.at("selection").at("best").get<std::string>() : model_id;
  const fs::path doc_path = cfg.out_dir / "models" / (id + ".json");
  if (!fs::exists(doc_path)) {
    throw DataError("model '" + id + "' has no trained document under models/");
  }
  ModelDocument doc = load_model_document(doc_path);

  SplitBundle data = load_run_data(cfg);
  if (data.calibration.empty()) {
    throw DataError("conformal calibration needs a nonempty calibration split");
  }

  doc.conformal =
      ConformalCalibrator::calibrate(*doc.model, data.calibration, cfg.alpha,
                                     cfg.joint_bonferroni);
  doc.cqr = CqrCalibrator::fit(data.train, data.calibration, cfg.alpha, cfg.cqr_gb);
  save_model_document(doc, doc_path);

  fs::create_directories(cfg.out_dir / "conformal");
  std::vector<MetricReport> rows;
  nlohmann::json splits = nlohmann::json::array();
  for (const SplitRef& ref :
       {SplitRef{"test", &data.test}, SplitRef{"extrapolation", &data.extrapolation}}) {
    if (ref.data->empty()) continue;
    splits.push_back(ref.name);
    const Eigen::MatrixXd& inputs = ref.data->inputs();
    const IntervalBatch qr = raw_qr_intervals(doc.cqr->lower_model(),
                                              doc.cqr->upper_model(), inputs, cfg.alpha);
    const IntervalBatch cqr = doc.cqr->intervals(inputs);
    const IntervalBatch scp = doc.conformal->intervals(*doc.model, inputs);
    const std::vector<std::pair<std::string, const IntervalBatch*>> methods{
        {"qr", &qr}, {"cqr", &cqr}, {"scp", &scp}};
    for (const auto& [method, batch] : methods) {
      write_interval_csv(cfg.out_dir / "conformal" /
                             (id + "_" + method + "_" + ref.name + ".csv"),
                         ref.data->output_names(), *batch);
      MetricReport r = evaluate_intervals(ref.data->outputs(), *batch);
      r.model_id = method;
      r.split = ref.name;
      rows.push_back(std::move(r));
    }
  }

  write_text_file(reports_to_csv(rows), cfg.out_dir / "conformal" / "comparison.csv");
  write_json_file({{"model", id},
                   {"alpha", cfg.alpha},
                   {"splits", splits},
                   {"rows", reports_to_json(rows)}},
                  cfg.out_dir / "conformal" / "comparison.json");
  log::info("conformal artifacts written for model " + id);
}

void cmd_evaluate(const RunConfig& cfg) {
  cfg.validate();
  const fs::path manifest_path = cfg.out_dir / "models" / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw DataError("missing artifacts: models/manifest.json; run train first");
  }
  const nlohmann::json manifest = read_json_file(manifest_path);
  SplitBundle data = load_run_data(cfg);

  std::vector<MetricReport> reports;
  for (const auto& entry : manifest.at("models")) {
    if (!entry.at("trained").get<bool>()) continue;
    const std::string id = entry.at("id").get<std::string>();
    ModelDocument doc = load_model_document(cfg.out_dir / "models" / (id + ".json"));
    for (const SplitRef& ref : named_splits(data)) {
      if (ref.data->empty()) continue;
      MetricReport r = evaluate_predictions(
          ref.data->outputs(), doc.model->predict_batch(ref.data->inputs()));
      r.model_id = id;
      r.split = ref.name;
      reports.push_back(std::move(r));
    }
  }
  if (reports.empty()) throw DataError("no trained models to evaluate");

  fs::create_directories(cfg.out_dir / "metrics");
  write_text_file(reports_to_csv(reports), cfg.out_dir / "metrics" / "evaluation.csv");
  write_json_file({{"reports", reports_to_json(reports)}},
                  cfg.out_dir / "metrics" / "evaluation.json");
  log::info("recomputed metrics for " + std::to_string(reports.size()) + " model-split pairs");
}

void cmd_report(const RunConfig& cfg) {
  cfg.validate();
  std::vector<nlohmann::json> loaded;
  read_required(cfg.out_dir,
                {"models/manifest.json", "metrics/train_metrics.json",
                 "metrics/evaluation.json", "conformal/comparison.json"},
                loaded);
  const nlohmann::json& manifest = loaded[0];
  const nlohmann::json& train_metrics = loaded[1];
  const nlohmann::json& evaluation = loaded[2];
  const nlohmann::json& comparison = loaded[3];

  const std::string conformal_id = comparison.at("model").get<std::string>();
  std::vector<std::string> missing;
  std::vector<std::string> files{"models/manifest.json", "metrics/train_metrics.csv",
                                 "metrics/train_metrics.json", "metrics/evaluation.csv",
                                 "metrics/evaluation.json", "conformal/comparison.csv",
                                 "conformal/comparison.json"};
  for (const auto& split : comparison.at("splits")) {
    for (const std::string method : {"qr", "cqr", "scp"}) {
      files.push_back("conformal/" + conformal_id + "_" + method + "_" +
                      split.get<std::string>() + ".csv");
    }
  }

  // Every trained model document is both referenced and reloaded for the
  // prediction curves.
  std::vector<std::pair<std::string, ModelDocument>> docs;
  for (const auto& entry : manifest.at("models")) {
    if (!entry.at("trained").get<bool>()) continue;
    const std::string id = entry.at("id").get<std::string>();
    const std::string rel = "models/" + id + ".json";
    files.push_back(rel);
    if (!fs::exists(cfg.out_dir / rel)) {
      missing.push_back(rel);
      continue;
    }
    docs.emplace_back(id, load_model_document(cfg.out_dir / rel));
  }
  for (const std::string& rel : files) {
    if (!fs::exists(cfg.out_dir / rel)) missing.push_back(rel);
  }
  if (!missing.empty()) {
    throw DataError("missing artifacts: " + join(missing) + "; rerun the earlier stages");
  }

  const ModelDocument* best_doc = nullptr;
  for (const auto& [id, doc] : docs) {
    if (id == conformal_id) best_doc = &doc;
  }
  if (best_doc == nullptr || !best_doc->conformal || !best_doc->cqr) {
    throw DataError("model '" + conformal_id + "' lacks calibration state; rerun conformal");
  }

  SplitBundle data = load_run_data(cfg);
  fs::create_directories(cfg.out_dir / "report");

  // Command ECDF curves per split (the drift picture).
  {
    std::string text = "split,command,value,ecdf\n";
    for (const SplitRef& ref : named_splits(data)) {
      if (ref.data->empty()) continue;
      for (Eigen::Index c = 0; c < ref.data->input_dim(); ++c) {
        Eigen::VectorXd v = ref.data->inputs().col(c);
        std::sort(v.begin(), v.end());
        const double n = static_cast<double>(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
          text += std::string(ref.name) + "," + ref.data->input_names()[c] + "," +
                  format_double(v(i)) + "," +
                  format_double(static_cast<double>(i + 1) / n) + "\n";
        }
      }
    }
    write_text_file(text, cfg.out_dir / "report" / "ecdf_commands.csv");
    files.push_back("report/ecdf_commands.csv");
  }

  // Truth, per-model predictions, and the calibrated bands per sample.
  for (const SplitRef& ref :
       {SplitRef{"test", &data.test}, SplitRef{"extrapolation", &data.extrapolation}}) {
    if (ref.data->empty()) continue;
    const auto& names = ref.data->output_names();
    std::string header = "index";
    for (const auto& n : names) header += ",truth_" + n;
    for (const auto& [id, doc] : docs) {
      for (const auto& n : names) header += ",pred_" + id + "_" + n;
    }
    for (const auto& n : names) header += ",scp_lower_" + n + ",scp_upper_" + n;
    for (const auto& n : names) header += ",cqr_lower_" + n + ",cqr_upper_" + n;

    std::vector<Eigen::MatrixXd> preds;
    preds.reserve(docs.size());
    for (const auto& [id, doc] : docs) {
      preds.push_back(doc.model->predict_batch(ref.data->inputs()));
    }
    const IntervalBatch scp =
        best_doc->conformal->intervals(*best_doc->model, ref.data->inputs());
    const IntervalBatch cqr = best_doc->cqr->intervals(ref.data->inputs());

    std::string text = header + "\n";
    for (Eigen::Index i = 0; i < ref.data->size(); ++i) {
      text += std::to_string(i);
      for (Eigen::Index d = 0; d < ref.data->output_dim(); ++d) {
        text += "," + format_double(ref.data->outputs()(i, d));
      }
      for (const Eigen::MatrixXd& p : preds) {
        for (Eigen::Index d = 0; d < p.cols(); ++d) text += "," + format_double(p(i, d));
      }
      for (Eigen::Index d = 0; d < scp.lower.cols(); ++d) {
        text += "," + format_double(scp.lower(i, d)) + "," + format_double(scp.upper(i, d));
      }
      for (Eigen::Index d = 0; d < cqr.lower.cols(); ++d) {
        text += "," + format_double(cqr.lower(i, d)) + "," + format_double(cqr.upper(i, d));
      }
      text += '\n';
    }
    const std::string rel = std::string("report/positions_") + ref.name + ".csv";
    write_text_file(text, cfg.out_dir / rel);
    files.push_back(rel);
  }

  write_json_file({{"format_version", 1},
                   {"config", cfg.to_json()},
                   {"selection", manifest.at("selection")},
                   {"point_metrics", train_metrics.at("reports")},
                   {"evaluation", evaluation.at("reports")},
                   {"comparison", comparison},
                   {"files", files}},
                  cfg.out_dir / "report" / "report.json");
  log::info("report written to " + (cfg.out_dir / "report").string());
}

}  // namespace ckm
