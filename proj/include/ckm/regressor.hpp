#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>

#include <json.hpp>

namespace ckm {

enum class LossKind { squared, pinball };

std::string loss_name(LossKind loss);
LossKind loss_from_name(const std::string& name);

// Fitted forward-kinematics map u -> x. Implementations are immutable after
// fitting; predict is a pure function of (model, u).
class Regressor {
 public:
  virtual ~Regressor() = default;

  Eigen::Index input_dim() const { return input_dim_; }
  Eigen::Index output_dim() const { return output_dim_; }

  // Throws DataError on dimension mismatch.
  Eigen::VectorXd predict(const Eigen::VectorXd& u) const;
  Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& inputs) const;

  virtual std::string kind() const = 0;
  virtual nlohmann::json to_json() const = 0;

 protected:
  Regressor(Eigen::Index input_dim, Eigen::Index output_dim);
  virtual Eigen::VectorXd predict_one(const Eigen::VectorXd& u) const = 0;
  virtual Eigen::MatrixXd predict_rows(const Eigen::MatrixXd& inputs) const;

 private:
  Eigen::Index input_dim_ = 0;
  Eigen::Index output_dim_ = 0;
};

}  // namespace ckm
