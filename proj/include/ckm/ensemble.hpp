#pragma once

#include <cstdint>
#include <vector>

#include "ckm/dataset.hpp"
#include "ckm/regressor.hpp"
#include "ckm/tree.hpp"

namespace ckm {

struct ForestParams {
  int n_trees = 200;
  TreeParams tree;  // defaults: unbounded depth, all features
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

// Bagged trees, one ensemble per output dimension; prediction is the mean
// over trees.
class ForestModel : public Regressor {
 public:
  ForestModel(Eigen::Index input_dim,
              std::vector<std::vector<RegressionTree>> trees);

  const std::vector<std::vector<RegressionTree>>& trees() const { return trees_; }

  std::string kind() const override { return "forest"; }
  nlohmann::json to_json() const override;

 protected:
  Eigen::VectorXd predict_one(const Eigen::VectorXd& u) const override;

 private:
  std::vector<std::vector<RegressionTree>> trees_;  // [output dim][tree]
};

// Each tree trains on a bootstrap resample (size N, with replacement) drawn
// from seed + dim*n_trees + tree index, so results are reproducible and
// independent of any fitting parallelism.
ForestModel fit_forest(const Dataset& train, const ForestParams& params);

struct BoostedParams {
  int n_stages = 300;
  int max_depth = 3;
  double learning_rate = 0.1;  // in (0, 1]
  Eigen::Index min_samples_leaf = 1;
  LossKind loss = LossKind::squared;
  double tau = 0.5;  // pinball mode only
};

// Stagewise additive trees: prediction = init + learning_rate * sum of tree
// outputs per output dimension. Squared mode boosts residuals from the mean;
// pinball mode starts at the tau-quantile, fits each stage to the pinball
// negative gradient and relabels leaves with the in-leaf residual
// tau-quantile.
class BoostedModel : public Regressor {
 public:
  BoostedModel(Eigen::Index input_dim, Eigen::VectorXd init,
               double learning_rate, LossKind loss, double tau,
               std::vector<std::vector<RegressionTree>> trees,
               std::vector<std::vector<double>> loss_curve);

  const Eigen::VectorXd& init() const { return init_; }
  double learning_rate() const { return learning_rate_; }
  LossKind loss() const { return loss_; }
  double tau() const { return tau_; }
  const std::vector<std::vector<RegressionTree>>& trees() const { return trees_; }

  // Mean training loss per output dimension; entry s is the loss after s
  // stages, entry 0 the init-only baseline. Nonincreasing in s.
  const std::vector<std::vector<double>>& loss_curve() const { return loss_curve_; }

  std::string kind() const override { return "boosted"; }
  nlohmann::json to_json() const override;

 protected:
  Eigen::VectorXd predict_one(const Eigen::VectorXd& u) const override;

 private:
  Eigen::VectorXd init_;
  double learning_rate_ = 0.1;
  LossKind loss_ = LossKind::squared;
  double tau_ = 0.5;
  std::vector<std::vector<RegressionTree>> trees_;  // [output dim][stage]
  std::vector<std::vector<double>> loss_curve_;
};

BoostedModel fit_boosted(const Dataset& train, const BoostedParams& params);

}  // namespace ckm
