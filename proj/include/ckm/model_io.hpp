#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "ckm/conformal.hpp"
#include "ckm/dataset.hpp"
#include "ckm/regressor.hpp"

namespace ckm {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json standardizer_to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

// Input-standardizing wrapper: predict(u) = inner(standardize(u)). Keeps the
// scaling fused to the fitted weights so a saved model cannot be applied to
// raw inputs by mistake.
class StandardizedRegressor : public Regressor {
 public:
  StandardizedRegressor(Standardizer standardizer, std::shared_ptr<Regressor> inner);

  const Standardizer& standardizer() const { return standardizer_; }
  const std::shared_ptr<Regressor>& inner() const { return inner_; }

  std::string kind() const override { return "standardized"; }
  nlohmann::json to_json() const override;

 protected:
  Eigen::VectorXd predict_one(const Eigen::VectorXd& u) const override;
  Eigen::MatrixXd predict_rows(const Eigen::MatrixXd& inputs) const override;

 private:
  Standardizer standardizer_;
  std::shared_ptr<Regressor> inner_;
};

// Rebuilds any serialized regressor from its JSON form.
std::shared_ptr<Regressor> regressor_from_json(const nlohmann::json& j);

// On-disk unit: one fitted model plus whatever calibration it carries.
struct ModelDocument {
  std::string id;
  std::shared_ptr<Regressor> model;
  std::optional<ConformalCalibrator> conformal;
  std::optional<CqrCalibrator> cqr;

  nlohmann::json to_json() const;
  static ModelDocument from_json(const nlohmann::json& j);
};

void save_model_document(const ModelDocument& doc, const std::filesystem::path& path);
ModelDocument load_model_document(const std::filesystem::path& path);

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace ckm
