#pragma once

#include <Eigen/Core>
#include <vector>

#include "ckm/dataset.hpp"
#include "ckm/regressor.hpp"

namespace ckm {

// Affine map predict(u) = W*u + b.
class LinearModel : public Regressor {
 public:
  LinearModel(Eigen::MatrixXd weights, Eigen::VectorXd intercept);

  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& intercept() const { return intercept_; }

  std::string kind() const override { return "linear"; }
  nlohmann::json to_json() const override;

 protected:
  Eigen::VectorXd predict_one(const Eigen::VectorXd& u) const override;
  Eigen::MatrixXd predict_rows(const Eigen::MatrixXd& inputs) const override;

 private:
  Eigen::MatrixXd weights_;    // 3m x n
  Eigen::VectorXd intercept_;  // 3m
};

// Least-squares fit of W, b via an orthogonal decomposition of the centered
// design matrix (rank-revealing; minimum-norm solution with a warning when
// the design is rank-deficient).
LinearModel fit_linear(const Dataset& train);

struct LassoParams {
  double lambda = 0.0;
  int max_iter = 10000;  // coordinate-descent sweeps
  double tol = 1e-6;     // max weight change per sweep, standardized scale
};

struct LassoResult {
  LinearModel model;
  bool converged = true;
  int sweeps = 0;  // largest sweep count over output dimensions
  // Per output dimension: objective value before any sweep and after each
  // sweep, on the standardized problem. Nonincreasing by construction.
  std::vector<std::vector<double>> objective_trace;
};

// Cyclic coordinate descent with soft-thresholding on
//   (1/2N) sum ||x - W u - b||^2 + lambda * ||W||_1,
// fit on internally standardized inputs and centered targets, then mapped
// back to the raw scale. lambda = 0 reduces to the least-squares solution.
LassoResult fit_lasso(const Dataset& train, const LassoParams& params);

// Smallest lambda at which every LASSO weight is exactly zero.
double lasso_lambda_max(const Dataset& train);

}  // namespace ckm
