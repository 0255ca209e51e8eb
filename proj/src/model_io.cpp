#include "ckm/model_io.hpp"

#include <fstream>
#include <utility>
#include <vector>

#include "ckm/ensemble.hpp"
#include "ckm/errors.hpp"
#include "ckm/linear.hpp"
#include "ckm/tree.hpp"

namespace ckm {

namespace {

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw DataError("expected a JSON array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

std::vector<std::vector<RegressionTree>> trees_from_json(const nlohmann::json& j) {
  std::vector<std::vector<RegressionTree>> trees;
  for (const auto& per_dim : j) {
    std::vector<RegressionTree> list;
    for (const auto& entry : per_dim) list.push_back(RegressionTree::from_json(entry));
    trees.push_back(std::move(list));
  }
  return trees;
}

}  // namespace

nlohmann::json standardizer_to_json(const Standardizer& s) {
  return {{"mean", vector_to_json(s.mean())}, {"std", vector_to_json(s.stddev())}};
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
  return Standardizer(vector_from_json(j.at("mean")), vector_from_json(j.at("std")));
}

StandardizedRegressor::StandardizedRegressor(Standardizer standardizer,
                                             std::shared_ptr<Regressor> inner)
    : Regressor(standardizer.dim(), inner ? inner->output_dim() : 0),
      standardizer_(std::move(standardizer)),
      inner_(std::move(inner)) {
  if (!inner_) throw DataError("standardized regressor needs an inner model");
  if (inner_->input_dim() != standardizer_.dim()) {
    throw DataError("standardizer and inner model disagree on input dimension");
  }
}

Eigen::VectorXd StandardizedRegressor::predict_one(const Eigen::VectorXd& u) const {
  return inner_->predict(standardizer_.apply(u));
}

Eigen::MatrixXd StandardizedRegressor::predict_rows(const Eigen::MatrixXd& inputs) const {
  return inner_->predict_batch(standardizer_.apply(inputs));
}

nlohmann::json StandardizedRegressor::to_json() const {
  return {{"kind", "standardized"},
          {"standardizer", standardizer_to_json(standardizer_)},
          {"inner", inner_->to_json()}};
}

std::shared_ptr<Regressor> regressor_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") {
    const auto& rows = j.at("weights");
    const auto n_out = static_cast<Eigen::Index>(rows.size());
    if (n_out == 0) throw DataError("linear model has no weight rows");
    const auto n_in = static_cast<Eigen::Index>(rows[0].size());
    Eigen::MatrixXd w(n_out, n_in);
    for (Eigen::Index r = 0; r < n_out; ++r) {
      const auto& row = rows[static_cast<std::size_t>(r)];
      if (static_cast<Eigen::Index>(row.size()) != n_in) {
        throw DataError("ragged linear weight matrix");
      }
      for (Eigen::Index c = 0; c < n_in; ++c) {
        w(r, c) = row[static_cast<std::size_t>(c)].get<double>();
      }
    }
    return std::make_shared<LinearModel>(std::move(w),
                                         vector_from_json(j.at("intercept")));
  }
  if (kind == "forest") {
    return std::make_shared<ForestModel>(j.at("input_dim").get<Eigen::Index>(),
                                         trees_from_json(j.at("trees")));
  }
  if (kind == "boosted") {
    return std::make_shared<BoostedModel>(
        j.at("input_dim").get<Eigen::Index>(), vector_from_json(j.at("init")),
        j.at("learning_rate").get<double>(),
        loss_from_name(j.at("loss").get<std::string>()), j.at("tau").get<double>(),
        trees_from_json(j.at("trees")), std::vector<std::vector<double>>{});
  }
  if (kind == "standardized") {
    return std::make_shared<StandardizedRegressor>(
        standardizer_from_json(j.at("standardizer")),
        regressor_from_json(j.at("inner")));
  }
  throw DataError("unknown model kind '" + kind + "'");
}

nlohmann::json ModelDocument::to_json() const {
  if (!model) throw DataError("model document has no model");
  nlohmann::json j{{"format_version", kModelFormatVersion},
                   {"id", id},
                   {"model", model->to_json()}};
  if (conformal) j["conformal"] = conformal->to_json();
  if (cqr) {
    j["cqr"] = {{"lower", cqr->lower_model().to_json()},
                {"upper", cqr->upper_model().to_json()},
                {"state", cqr->to_json()}};
  }
  return j;
}

ModelDocument ModelDocument::from_json(const nlohmann::json& j) {
  const int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion) {
    throw DataError("unsupported model document version " + std::to_string(version));
  }
  ModelDocument doc;
  doc.id = j.at("id").get<std::string>();
  doc.model = regressor_from_json(j.at("model"));
  if (j.contains("conformal")) {
    doc.conformal = ConformalCalibrator::from_json(j.at("conformal"));
  }
  if (j.contains("cqr")) {
    const auto& c = j.at("cqr");
    doc.cqr = CqrCalibrator::from_json(c.at("state"),
                                       regressor_from_json(c.at("lower")),
                                       regressor_from_json(c.at("upper")));
  }
  return doc;
}

void save_model_document(const ModelDocument& doc, const std::filesystem::path& path) {
  write_json_file(doc.to_json(), path);
}

ModelDocument load_model_document(const std::filesystem::path& path) {
  return ModelDocument::from_json(read_json_file(path));
}

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("failed to parse " + path.string() + ": " + e.what());
  }
}

}  // namespace ckm
