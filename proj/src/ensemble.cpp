#include "ckm/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "ckm/errors.hpp"
#include "ckm/quantiles.hpp"

namespace ckm {

namespace {

nlohmann::json trees_to_json(const std::vector<std::vector<RegressionTree>>& trees) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& per_dim : trees) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& tree : per_dim) list.push_back(tree.to_json());
    dims.push_back(std::move(list));
  }
  return dims;
}

}  // namespace

ForestModel::ForestModel(Eigen::Index input_dim,
                         std::vector<std::vector<RegressionTree>> trees)
    : Regressor(input_dim, static_cast<Eigen::Index>(trees.size())),
      trees_(std::move(trees)) {
  if (trees_.empty()) throw FitError("forest has no output dimensions");
  for (const auto& per_dim : trees_) {
    if (per_dim.empty()) throw FitError("forest output dimension has no trees");
  }
}

Eigen::VectorXd ForestModel::predict_one(const Eigen::VectorXd& u) const {
  Eigen::VectorXd out(output_dim());
  const Eigen::RowVectorXd row = u.transpose();
  for (Eigen::Index d = 0; d < output_dim(); ++d) {
    double sum = 0.0;
    const auto& per_dim = trees_[static_cast<std::size_t>(d)];
    for (const auto& tree : per_dim) sum += tree.predict(row);
    out(d) = sum / static_cast<double>(per_dim.size());
  }
  return out;
}

nlohmann::json ForestModel::to_json() const {
  return {{"kind", "forest"},
          {"input_dim", input_dim()},
          {"trees", trees_to_json(trees_)}};
}

ForestModel fit_forest(const Dataset& train, const ForestParams& params) {
  if (params.n_trees < 1) throw ConfigError("forest needs at least 1 tree");
  if (train.size() < 1) throw FitError("cannot fit a forest on no samples");

  const Eigen::Index n = train.size();
  const Eigen::Index n_out = train.output_dim();
  std::vector<std::vector<RegressionTree>> trees(static_cast<std::size_t>(n_out));

  for (Eigen::Index d = 0; d < n_out; ++d) {
    const Eigen::VectorXd targets = train.outputs().col(d);
    for (int t = 0; t < params.n_trees; ++t) {
      // One generator per tree, seeded independently of fitting order.
      std::mt19937_64 rng(params.seed +
                          static_cast<std::uint64_t>(d) *
                              static_cast<std::uint64_t>(params.n_trees) +
                          static_cast<std::uint64_t>(t));
      Eigen::MatrixXd inputs;
      Eigen::VectorXd y;
      if (params.bootstrap) {
        std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
        inputs.resize(n, train.input_dim());
        y.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          const Eigen::Index r = pick(rng);
          inputs.row(i) = train.inputs().row(r);
          y(i) = targets(r);
        }
      } else {
        inputs = train.inputs();
        y = targets;
      }
      trees[static_cast<std::size_t>(d)].push_back(
          fit_tree(inputs, y, params.tree, &rng).tree);
    }
  }
  return ForestModel(train.input_dim(), std::move(trees));
}

BoostedModel::BoostedModel(Eigen::Index input_dim, Eigen::VectorXd init,
                           double learning_rate, LossKind loss, double tau,
                           std::vector<std::vector<RegressionTree>> trees,
                           std::vector<std::vector<double>> loss_curve)
    : Regressor(input_dim, init.size()),
      init_(std::move(init)),
      learning_rate_(learning_rate),
      loss_(loss),
      tau_(tau),
      trees_(std::move(trees)),
      loss_curve_(std::move(loss_curve)) {
  if (static_cast<Eigen::Index>(trees_.size()) != init_.size()) {
    throw FitError("boosted trees and init disagree on output dimensions");
  }
}

Eigen::VectorXd BoostedModel::predict_one(const Eigen::VectorXd& u) const {
  Eigen::VectorXd out = init_;
  const Eigen::RowVectorXd row = u.transpose();
  for (Eigen::Index d = 0; d < output_dim(); ++d) {
    for (const auto& tree : trees_[static_cast<std::size_t>(d)]) {
      out(d) += learning_rate_ * tree.predict(row);
    }
  }
  return out;
}

nlohmann::json BoostedModel::to_json() const {
  nlohmann::json init = nlohmann::json::array();
  for (Eigen::Index d = 0; d < init_.size(); ++d) init.push_back(init_(d));
  return {{"kind", "boosted"},
          {"input_dim", input_dim()},
          {"init", std::move(init)},
          {"learning_rate", learning_rate_},
          {"loss", loss_name(loss_)},
          {"tau", tau_},
          {"trees", trees_to_json(trees_)}};
}

namespace {

double mean_loss(const Eigen::VectorXd& y, const Eigen::VectorXd& pred,
                 LossKind loss, double tau) {
  if (loss == LossKind::squared) {
    return (y - pred).squaredNorm() / static_cast<double>(y.size());
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    total += pinball_loss(y(i), pred(i), tau);
  }
  return total / static_cast<double>(y.size());
}

}  // namespace

BoostedModel fit_boosted(const Dataset& train, const BoostedParams& params) {
  if (params.n_stages < 1) throw ConfigError("boosting needs at least 1 stage");
  if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0)) {
    throw ConfigError("learning_rate must lie in (0, 1]");
  }
  if (params.loss == LossKind::pinball &&
      !(params.tau > 0.0 && params.tau < 1.0)) {
    throw ConfigError("boosting tau must lie in (0, 1)");
  }
  if (train.size() < 1) throw FitError("cannot boost on no samples");

  const Eigen::Index n = train.size();
  const Eigen::Index n_out = train.output_dim();
  const bool squared = params.loss == LossKind::squared;

  TreeParams tree_params;
  tree_params.max_depth = params.max_depth;
  tree_params.min_samples_leaf = params.min_samples_leaf;
  tree_params.loss = LossKind::squared;  // stages fit squared to (pseudo)residuals

  Eigen::VectorXd init(n_out);
  std::vector<std::vector<RegressionTree>> trees(static_cast<std::size_t>(n_out));
  std::vector<std::vector<double>> curve(static_cast<std::size_t>(n_out));

  for (Eigen::Index d = 0; d < n_out; ++d) {
    const Eigen::VectorXd y = train.outputs().col(d);
    std::vector<double> y_vec(y.data(), y.data() + y.size());
    init(d) = squared ? y.mean() : quantile(std::move(y_vec), params.tau);

    Eigen::VectorXd pred = Eigen::VectorXd::Constant(n, init(d));
    auto& dim_curve = curve[static_cast<std::size_t>(d)];
    dim_curve.push_back(mean_loss(y, pred, params.loss, params.tau));

    for (int stage = 0; stage < params.n_stages; ++stage) {
      if (squared) {
        const Eigen::VectorXd residual = y - pred;
        TreeFit fit = fit_tree(train.inputs(), residual, tree_params);
        for (Eigen::Index i = 0; i < n; ++i) {
          pred(i) += params.learning_rate *
                     fit.tree.nodes()[static_cast<std::size_t>(
                                          fit.leaf_of_row[static_cast<std::size_t>(i)])]
                         .value;
        }
        trees[static_cast<std::size_t>(d)].push_back(std::move(fit.tree));
      } else {
        // Tree structure from the pinball negative gradient, leaf values
        // relabeled as the tau-quantile of the in-leaf residuals.
        Eigen::VectorXd gradient(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          gradient(i) = params.tau - (y(i) < pred(i) ? 1.0 : 0.0);
        }
        TreeFit fit = fit_tree(train.inputs(), gradient, tree_params);
        std::map<std::int32_t, std::vector<double>> residuals_by_leaf;
        for (Eigen::Index i = 0; i < n; ++i) {
          residuals_by_leaf[fit.leaf_of_row[static_cast<std::size_t>(i)]]
              .push_back(y(i) - pred(i));
        }
        for (auto& [leaf, residuals] : residuals_by_leaf) {
          fit.tree.leaf_value(leaf) = quantile(std::move(residuals), params.tau);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          pred(i) += params.learning_rate *
                     fit.tree.nodes()[static_cast<std::size_t>(
                                          fit.leaf_of_row[static_cast<std::size_t>(i)])]
                         .value;
        }
        trees[static_cast<std::size_t>(d)].push_back(std::move(fit.tree));
      }
      dim_curve.push_back(mean_loss(y, pred, params.loss, params.tau));
    }
  }
  return BoostedModel(train.input_dim(), std::move(init), params.learning_rate,
                      params.loss, params.tau, std::move(trees), std::move(curve));
}

}  // namespace ckm
