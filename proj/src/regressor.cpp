#include "ckm/regressor.hpp"

#include "ckm/errors.hpp"

namespace ckm {

std::string loss_name(LossKind loss) {
  return loss == LossKind::squared ? "squared" : "pinball";
}

LossKind loss_from_name(const std::string& name) {
  if (name == "squared") return LossKind::squared;
  if (name == "pinball") return LossKind::pinball;
  throw ConfigError("unknown loss '" + name + "'");
}

Regressor::Regressor(Eigen::Index input_dim, Eigen::Index output_dim)
    : input_dim_(input_dim), output_dim_(output_dim) {}

Eigen::VectorXd Regressor::predict(const Eigen::VectorXd& u) const {
  if (u.size() != input_dim_) {
    throw DataError("predict expected " + std::to_string(input_dim_) +
                    " inputs, got " + std::to_string(u.size()));
  }
  return predict_one(u);
}

Eigen::MatrixXd Regressor::predict_batch(const Eigen::MatrixXd& inputs) const {
  if (inputs.cols() != input_dim_) {
    throw DataError("predict expected " + std::to_string(input_dim_) +
                    " inputs, got " + std::to_string(inputs.cols()));
  }
  return predict_rows(inputs);
}

Eigen::MatrixXd Regressor::predict_rows(const Eigen::MatrixXd& inputs) const {
  Eigen::MatrixXd out(inputs.rows(), output_dim_);
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    out.row(i) = predict_one(inputs.row(i).transpose()).transpose();
  }
  return out;
}

}  // namespace ckm
