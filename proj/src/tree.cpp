#include "ckm/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ckm/errors.hpp"
#include "ckm/quantiles.hpp"

namespace ckm {

RegressionTree::RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw FitError("tree has no nodes");
  for (const Node& n : nodes_) {
    if (n.feature >= 0) {
      const auto count = static_cast<std::int32_t>(nodes_.size());
      if (n.left < 0 || n.left >= count || n.right < 0 || n.right >= count) {
        throw FitError("tree node child index out of range");
      }
    }
  }
}

std::int32_t RegressionTree::leaf_index(
    const Eigen::Ref<const Eigen::RowVectorXd>& u) const {
  std::int32_t idx = 0;
  while (nodes_[static_cast<std::size_t>(idx)].feature >= 0) {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    if (n.feature >= u.size()) throw DataError("tree feature index out of range");
    idx = u(n.feature) < n.threshold ? n.left : n.right;
  }
  return idx;
}

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& u) const {
  return nodes_[static_cast<std::size_t>(leaf_index(u))].value;
}

double& RegressionTree::leaf_value(std::int32_t node) {
  Node& n = nodes_.at(static_cast<std::size_t>(node));
  if (n.feature >= 0) throw FitError("node is not a leaf");
  return n.value;
}

int RegressionTree::depth() const {
  int max_depth = 0;
  std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [idx, d] = stack.back();
    stack.pop_back();
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    if (n.feature < 0) {
      max_depth = std::max(max_depth, d);
    } else {
      stack.push_back({n.left, d + 1});
      stack.push_back({n.right, d + 1});
    }
  }
  return max_depth;
}

nlohmann::json RegressionTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const Node& n : nodes_) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  }
  return {{"nodes", std::move(nodes)}};
}

RegressionTree RegressionTree::from_json(const nlohmann::json& j) {
  std::vector<Node> nodes;
  for (const auto& entry : j.at("nodes")) {
    if (!entry.is_array() || entry.size() != 5) {
      throw DataError("malformed tree node record");
    }
    Node n;
    n.feature = entry[0].get<Eigen::Index>();
    n.threshold = entry[1].get<double>();
    n.left = entry[2].get<std::int32_t>();
    n.right = entry[3].get<std::int32_t>();
    n.value = entry[4].get<double>();
    nodes.push_back(n);
  }
  return RegressionTree(std::move(nodes));
}

namespace {

struct SplitChoice {
  bool found = false;
  Eigen::Index feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // improvement over not splitting; larger is better
};

double leaf_prediction(const TreeParams& params, std::vector<double> values) {
  if (params.loss == LossKind::squared) {
    double sum = std::accumulate(values.begin(), values.end(), 0.0);
    return sum / static_cast<double>(values.size());
  }
  return quantile(std::move(values), params.tau);
}

// Total pinball loss of values against their own tau-quantile.
double pinball_total(const std::vector<double>& sorted, double tau) {
  const double q = sorted_quantile(sorted, tau);
  double total = 0.0;
  for (double v : sorted) total += pinball_loss(v, q, tau);
  return total;
}

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
              const TreeParams& params, std::mt19937_64* rng)
      : inputs_(inputs), targets_(targets), params_(params), rng_(rng) {}

  TreeFit build() {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(inputs_.rows()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    leaf_of_row_.assign(rows.size(), -1);
    build_node(rows, 0);
    return {RegressionTree(std::move(nodes_)), std::move(leaf_of_row_)};
  }

 private:
  std::int32_t build_node(std::vector<Eigen::Index>& rows, int depth) {
    const auto idx = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();

    SplitChoice split;
    if (can_split(rows, depth)) split = best_split(rows);
    if (!split.found) {
      std::vector<double> values;
      values.reserve(rows.size());
      for (Eigen::Index r : rows) values.push_back(targets_(r));
      nodes_[static_cast<std::size_t>(idx)].value =
          leaf_prediction(params_, std::move(values));
      for (Eigen::Index r : rows) {
        leaf_of_row_[static_cast<std::size_t>(r)] = idx;
      }
      return idx;
    }

    std::vector<Eigen::Index> left, right;
    for (Eigen::Index r : rows) {
      (inputs_(r, split.feature) < split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    nodes_[static_cast<std::size_t>(idx)].feature = split.feature;
    nodes_[static_cast<std::size_t>(idx)].threshold = split.threshold;
    const std::int32_t l = build_node(left, depth + 1);
    const std::int32_t r = build_node(right, depth + 1);
    nodes_[static_cast<std::size_t>(idx)].left = l;
    nodes_[static_cast<std::size_t>(idx)].right = r;
    return idx;
  }

  bool can_split(const std::vector<Eigen::Index>& rows, int depth) const {
    if (params_.max_depth >= 0 && depth >= params_.max_depth) return false;
    if (static_cast<Eigen::Index>(rows.size()) < 2 * params_.min_samples_leaf) {
      return false;
    }
    double lo = targets_(rows.front()), hi = lo;
    for (Eigen::Index r : rows) {
      lo = std::min(lo, targets_(r));
      hi = std::max(hi, targets_(r));
    }
    return hi > lo;
  }

  std::vector<Eigen::Index> candidate_features() const {
    const Eigen::Index n_feat = inputs_.cols();
    std::vector<Eigen::Index> features(static_cast<std::size_t>(n_feat));
    std::iota(features.begin(), features.end(), Eigen::Index{0});
    if (rng_ == nullptr || params_.feature_fraction >= 1.0) return features;
    const auto k = std::max<Eigen::Index>(
        1, ceil_index(params_.feature_fraction * static_cast<double>(n_feat)));
    for (Eigen::Index i = 0; i < k; ++i) {
      std::uniform_int_distribution<Eigen::Index> pick(i, n_feat - 1);
      std::swap(features[static_cast<std::size_t>(i)],
                features[static_cast<std::size_t>(pick(*rng_))]);
    }
    features.resize(static_cast<std::size_t>(k));
    std::sort(features.begin(), features.end());
    return features;
  }

  // Scans features in ascending order and thresholds in ascending value
  // order, replacing the incumbent only on strict improvement, so gain ties
  // resolve toward the lowest feature index, then the lowest threshold.
  SplitChoice best_split(const std::vector<Eigen::Index>& rows) const {
    SplitChoice best;
    for (Eigen::Index f : candidate_features()) {
      std::vector<std::pair<double, double>> ordered;  // (feature value, target)
      ordered.reserve(rows.size());
      for (Eigen::Index r : rows) ordered.emplace_back(inputs_(r, f), targets_(r));
      std::sort(ordered.begin(), ordered.end());
      if (params_.loss == LossKind::squared) {
        scan_squared(f, ordered, best);
      } else {
        scan_pinball(f, ordered, best);
      }
    }
    return best;
  }

  void scan_squared(Eigen::Index f,
                    const std::vector<std::pair<double, double>>& ordered,
                    SplitChoice& best) const {
    const auto n = static_cast<Eigen::Index>(ordered.size());
    double total = 0.0;
    for (const auto& [v, t] : ordered) total += t;

    double left_sum = 0.0;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      left_sum += ordered[static_cast<std::size_t>(i)].second;
      const double lo = ordered[static_cast<std::size_t>(i)].first;
      const double hi = ordered[static_cast<std::size_t>(i + 1)].first;
      if (!(lo < hi)) continue;
      const Eigen::Index n_left = i + 1, n_right = n - n_left;
      if (n_left < params_.min_samples_leaf || n_right < params_.min_samples_leaf) {
        continue;
      }
      const double right_sum = total - left_sum;
      // Variance reduction up to the constant parent term.
      const double score = left_sum * left_sum / static_cast<double>(n_left) +
                           right_sum * right_sum / static_cast<double>(n_right) -
                           total * total / static_cast<double>(n);
      if (score > best.score) {
        best = {true, f, split_threshold(lo, hi), score};
      }
    }
  }

  void scan_pinball(Eigen::Index f,
                    const std::vector<std::pair<double, double>>& ordered,
                    SplitChoice& best) const {
    const auto n = static_cast<Eigen::Index>(ordered.size());
    std::vector<double> right_sorted;
    right_sorted.reserve(ordered.size());
    for (const auto& [v, t] : ordered) right_sorted.push_back(t);
    std::sort(right_sorted.begin(), right_sorted.end());
    const double parent = pinball_total(right_sorted, params_.tau);

    std::vector<double> left_sorted;
    left_sorted.reserve(ordered.size());
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double t = ordered[static_cast<std::size_t>(i)].second;
      left_sorted.insert(
          std::upper_bound(left_sorted.begin(), left_sorted.end(), t), t);
      right_sorted.erase(
          std::lower_bound(right_sorted.begin(), right_sorted.end(), t));
      const double lo = ordered[static_cast<std::size_t>(i)].first;
      const double hi = ordered[static_cast<std::size_t>(i + 1)].first;
      if (!(lo < hi)) continue;
      const Eigen::Index n_left = i + 1, n_right = n - n_left;
      if (n_left < params_.min_samples_leaf || n_right < params_.min_samples_leaf) {
        continue;
      }
      const double score = parent - pinball_total(left_sorted, params_.tau) -
                           pinball_total(right_sorted, params_.tau);
      if (score > best.score) {
        best = {true, f, split_threshold(lo, hi), score};
      }
    }
  }

  // Any threshold in (lo, hi] routes the two values apart; the midpoint can
  // collapse onto lo for adjacent doubles, in which case hi itself is used.
  static double split_threshold(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    return mid > lo ? mid : hi;
  }

  const Eigen::MatrixXd& inputs_;
  const Eigen::VectorXd& targets_;
  const TreeParams& params_;
  std::mt19937_64* rng_;
  std::vector<RegressionTree::Node> nodes_;
  std::vector<std::int32_t> leaf_of_row_;
};

void check_params(const TreeParams& params) {
  if (params.min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  if (params.loss == LossKind::pinball &&
      !(params.tau > 0.0 && params.tau < 1.0)) {
    throw ConfigError("tree tau must lie in (0, 1)");
  }
  if (!(params.feature_fraction > 0.0 && params.feature_fraction <= 1.0)) {
    throw ConfigError("feature_fraction must lie in (0, 1]");
  }
}

}  // namespace

TreeFit fit_tree(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                 const TreeParams& params, std::mt19937_64* feature_rng) {
  check_params(params);
  if (inputs.rows() != targets.size()) {
    throw DataError("tree inputs and targets disagree on sample count");
  }
  if (inputs.rows() < 1) throw FitError("cannot fit a tree on no samples");
  return TreeBuilder(inputs, targets, params, feature_rng).build();
}

RegressionTree fit_tree(const Dataset& train, Eigen::Index output_dim,
                        const TreeParams& params) {
  if (output_dim < 0 || output_dim >= train.output_dim()) {
    throw DataError("output dimension out of range");
  }
  return fit_tree(train.inputs(), train.outputs().col(output_dim), params).tree;
}

}  // namespace ckm
