#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <vector>

#include <json.hpp>

#include "ckm/dataset.hpp"
#include "ckm/regressor.hpp"

namespace ckm {

struct TreeParams {
  int max_depth = -1;                // -1 = unbounded
  Eigen::Index min_samples_leaf = 1;
  LossKind loss = LossKind::squared;
  double tau = 0.5;                  // pinball mode only
  double feature_fraction = 1.0;     // per-split candidate-feature share
};

// Single-output binary regression tree, nodes flattened into an array.
// Splits route queries with value < threshold to the left child.
class RegressionTree {
 public:
  struct Node {
    Eigen::Index feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;  // leaf prediction
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes);

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& u) const;
  std::int32_t leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& u) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  double& leaf_value(std::int32_t node);  // for leaf relabeling
  int depth() const;

  nlohmann::json to_json() const;
  static RegressionTree from_json(const nlohmann::json& j);

 private:
  std::vector<Node> nodes_;  // nodes_[0] is the root
};

struct TreeFit {
  RegressionTree tree;
  std::vector<std::int32_t> leaf_of_row;  // training row -> leaf node index
};

// Greedy best-first construction: split candidates are midpoints between
// consecutive sorted distinct feature values; best split maximizes variance
// reduction (squared loss) or pinball-loss reduction (pinball mode); ties
// broken toward the lowest feature index, then the lowest threshold. Leaf
// values are the in-leaf target mean (squared) or tau-quantile (pinball).
// feature_rng drives the per-split feature subsample; pass nullptr to
// consider every feature.
TreeFit fit_tree(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                 const TreeParams& params, std::mt19937_64* feature_rng = nullptr);

// Convenience overload fitting to one output column of a dataset.
RegressionTree fit_tree(const Dataset& train, Eigen::Index output_dim,
                        const TreeParams& params);

}  // namespace ckm
