#include <doctest.h>

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "ckm/dataset.hpp"
#include "ckm/ensemble.hpp"
#include "ckm/errors.hpp"
#include "ckm/linear.hpp"
#include "ckm/quantiles.hpp"
#include "ckm/tree.hpp"

using namespace ckm;

namespace {

Dataset make_dataset(const Eigen::MatrixXd& in, const Eigen::MatrixXd& out) {
  std::vector<std::string> in_names, out_names;
  for (Eigen::Index j = 0; j < in.cols(); ++j) in_names.push_back("u" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < out.cols(); ++j) out_names.push_back("x" + std::to_string(j + 1));
  return Dataset(in, out, in_names, out_names);
}

Dataset random_dataset(Eigen::Index n, Eigen::Index n_in, Eigen::Index n_out,
                       unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  Eigen::MatrixXd in(n, n_in), out(n, n_out);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n_in; ++j) in(i, j) = dist(rng);
    for (Eigen::Index j = 0; j < n_out; ++j) out(i, j) = dist(rng);
  }
  return make_dataset(in, out);
}

double training_mse(const Regressor& model, const Dataset& d) {
  return (model.predict_batch(d.inputs()) - d.outputs()).squaredNorm() /
         static_cast<double>(d.size());
}

// Walks a flattened tree by hand, independent of RegressionTree::predict.
double traverse(const std::vector<RegressionTree::Node>& nodes,
                const Eigen::RowVectorXd& u) {
  std::size_t idx = 0;
  while (nodes[idx].feature >= 0) {
    idx = static_cast<std::size_t>(u(nodes[idx].feature) < nodes[idx].threshold
                                       ? nodes[idx].left
                                       : nodes[idx].right);
  }
  return nodes[idx].value;
}

double sse(const std::vector<double>& values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double total = 0.0;
  for (double v : values) total += (v - mean) * (v - mean);
  return total;
}

double pinball_total_at_quantile(std::vector<double> values, double tau) {
  const double q = quantile(values, tau);
  double total = 0.0;
  for (double v : values) total += pinball_loss(v, q, tau);
  return total;
}

struct OracleSplit {
  Eigen::Index feature = -1;
  double threshold = 0.0;
  double reduction = 0.0;
};

// Exhaustive split enumeration: every feature, every boundary between
// consecutive distinct sorted values, loss recomputed from scratch. Returns
// the candidates whose reduction ties the best one within float noise; two
// distinct splits can induce the same target partition and tie exactly, in
// which case summation order decides which looks "best".
std::vector<OracleSplit> brute_force_splits(const Eigen::MatrixXd& in,
                                            const Eigen::VectorXd& y,
                                            LossKind loss, double tau) {
  std::vector<OracleSplit> candidates;
  std::vector<double> all(y.data(), y.data() + y.size());
  const double parent = loss == LossKind::squared
                            ? sse(all)
                            : pinball_total_at_quantile(all, tau);
  for (Eigen::Index f = 0; f < in.cols(); ++f) {
    std::vector<std::pair<double, double>> order;
    for (Eigen::Index i = 0; i < in.rows(); ++i) order.emplace_back(in(i, f), y(i));
    std::sort(order.begin(), order.end());
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      if (!(order[i].first < order[i + 1].first)) continue;
      std::vector<double> left, right;
      for (std::size_t k = 0; k < order.size(); ++k) {
        (k <= i ? left : right).push_back(order[k].second);
      }
      const double child = loss == LossKind::squared
                               ? sse(left) + sse(right)
                               : pinball_total_at_quantile(left, tau) +
                                     pinball_total_at_quantile(right, tau);
      const double reduction = parent - child;
      if (reduction <= 0.0) continue;
      double mid = order[i].first + (order[i + 1].first - order[i].first) / 2.0;
      if (!(mid > order[i].first)) mid = order[i + 1].first;
      candidates.push_back({f, mid, reduction});
    }
  }
  double best = 0.0;
  for (const OracleSplit& c : candidates) best = std::max(best, c.reduction);
  std::vector<OracleSplit> ties;
  for (const OracleSplit& c : candidates) {
    if (c.reduction >= best - 1e-9 * std::max(1.0, std::abs(best))) {
      ties.push_back(c);
    }
  }
  return ties;
}

bool oracle_contains(const std::vector<OracleSplit>& ties, Eigen::Index feature,
                     double threshold) {
  for (const OracleSplit& c : ties) {
    if (c.feature == feature && c.threshold == threshold) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("linear fit recovers exact affine data") {
  Eigen::MatrixXd in(6, 1), out(6, 1);
  in << 0, 1, 2, 3, 4, 5;
  out = 2.0 * in.array() + 1.0;
  LinearModel m = fit_linear(make_dataset(in, out));
  CHECK(std::abs(m.weights()(0, 0) - 2.0) < 1e-10);
  CHECK(std::abs(m.intercept()(0) - 1.0) < 1e-10);
  Eigen::VectorXd u(1);
  u << 10.0;
  CHECK(m.predict(u)(0) == doctest::Approx(21.0).epsilon(1e-10));
}

TEST_CASE("linear fit on constant targets returns zero weights") {
  Dataset d = random_dataset(20, 3, 2, 1);
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(20, 2, 4.5);
  Dataset constant = make_dataset(d.inputs(), out);
  LinearModel m = fit_linear(constant);
  CHECK(m.weights().cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.intercept()(0) == doctest::Approx(4.5));
  CHECK(m.intercept()(1) == doctest::Approx(4.5));
}

TEST_CASE("linear fit beats random perturbations of its parameters") {
  Dataset d = random_dataset(50, 3, 2, 2);
  LinearModel m = fit_linear(d);
  const double fitted = training_mse(m, d);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> delta(0.0, 1.0);
  std::uniform_real_distribution<double> scale(1e-4, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double eps = scale(rng);
    Eigen::MatrixXd W = m.weights();
    Eigen::VectorXd b = m.intercept();
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      b(r) += eps * delta(rng);
      for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) += eps * delta(rng);
    }
    LinearModel perturbed(W, b);
    CHECK(training_mse(perturbed, d) >= fitted - 1e-12);
  }
}

TEST_CASE("linear predictions scale linearly with the targets") {
  Dataset d = random_dataset(30, 2, 3, 4);
  LinearModel base = fit_linear(d);
  Dataset scaled = make_dataset(d.inputs(), 2.5 * d.outputs());
  LinearModel twice = fit_linear(scaled);
  Eigen::VectorXd u(2);
  u << 0.7, -1.2;
  Eigen::VectorXd a = base.predict(u), b = twice.predict(u);
  CHECK((b - 2.5 * a).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identity linear model passes inputs through and checks dimensions") {
  LinearModel m(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3));
  Eigen::VectorXd u(3);
  u << 1.0, -2.0, 0.5;
  CHECK(m.predict(u) == u);
  CHECK(m.predict(u) == m.predict(u));
  Eigen::VectorXd bad(2);
  bad << 1.0, 2.0;
  CHECK_THROWS_AS(m.predict(bad), DataError);
  CHECK_THROWS_AS(m.predict_batch(Eigen::MatrixXd::Zero(4, 2)), DataError);
}

TEST_CASE("lasso at full shrinkage zeroes all weights") {
  Dataset d = random_dataset(40, 3, 2, 5);
  const double lambda_max = lasso_lambda_max(d);
  LassoParams p;
  p.lambda = lambda_max;
  LassoResult r = fit_lasso(d, p);
  CHECK(r.model.weights().cwiseAbs().maxCoeff() == 0.0);
  for (Eigen::Index j = 0; j < 2; ++j) {
    CHECK(r.model.intercept()(j) ==
          doctest::Approx(d.outputs().col(j).mean()).epsilon(1e-12));
  }
  CHECK(r.converged);

  // Slightly below lambda_max some weight must survive.
  p.lambda = lambda_max * 0.9;
  CHECK(fit_lasso(d, p).model.weights().cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("lasso at lambda zero reduces to least squares") {
  Eigen::MatrixXd in(6, 1), out(6, 1);
  in << 0, 1, 2, 3, 4, 5;
  out = 2.0 * in.array() + 1.0;
  LassoParams p;
  p.lambda = 0.0;
  p.tol = 1e-10;
  LassoResult r = fit_lasso(make_dataset(in, out), p);
  CHECK(std::abs(r.model.weights()(0, 0) - 2.0) < 1e-6);
  CHECK(std::abs(r.model.intercept()(0) - 1.0) < 1e-6);

  Dataset d = random_dataset(60, 4, 2, 6);
  LinearModel ols = fit_linear(d);
  LassoResult l0 = fit_lasso(d, p);
  CHECK((l0.model.weights() - ols.weights()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((l0.model.intercept() - ols.intercept()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("one-feature lasso matches the closed-form soft-threshold solution") {
  Eigen::MatrixXd in(8, 1), out(8, 1);
  in << -2.0, -1.5, -0.3, 0.2, 0.9, 1.4, 2.2, 3.1;
  out << -3.8, -3.1, -0.4, 0.6, 1.7, 2.6, 4.5, 6.4;
  Dataset d = make_dataset(in, out);
  const double lambda = 0.1;

  // Independent path: standardize the single feature (population std),
  // center the target; the one-dimensional coordinate solution is then
  // S(z.y/N, lambda) because z has unit variance, mapped back by 1/sigma.
  const double mu = in.col(0).mean();
  const double sigma = std::sqrt((in.col(0).array() - mu).square().sum() / 8.0);
  Eigen::VectorXd z = (in.col(0).array() - mu) / sigma;
  const double y_mean = out.col(0).mean();
  Eigen::VectorXd yc = out.col(0).array() - y_mean;
  const double c = z.dot(yc) / 8.0;
  const double w_std = c > lambda ? c - lambda : (c < -lambda ? c + lambda : 0.0);
  const double w_expected = w_std / sigma;
  const double b_expected = y_mean - w_expected * mu;

  LassoParams p;
  p.lambda = lambda;
  p.tol = 1e-12;
  LassoResult r = fit_lasso(d, p);
  CHECK(r.model.weights()(0, 0) == doctest::Approx(w_expected).epsilon(1e-9));
  CHECK(r.model.intercept()(0) == doctest::Approx(b_expected).epsilon(1e-9));
}

TEST_CASE("lasso objective trace is nonincreasing") {
  Dataset d = random_dataset(50, 4, 2, 7);
  LassoParams p;
  p.lambda = 0.05;
  LassoResult r = fit_lasso(d, p);
  for (const auto& trace : r.objective_trace) {
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i) {
      CHECK(trace[i] <= trace[i - 1] + 1e-12);
    }
  }
}

TEST_CASE("lasso reports non-convergence when starved of sweeps") {
  Dataset d = random_dataset(50, 4, 2, 8);
  LassoParams p;
  p.lambda = 1e-9;
  p.max_iter = 1;
  p.tol = 1e-14;
  CHECK(!fit_lasso(d, p).converged);
}

TEST_CASE("depth-1 tree finds the step split chosen by exhaustive search") {
  Eigen::MatrixXd in(4, 1);
  Eigen::VectorXd y(4);
  in << 0, 1, 2, 3;
  y << 0, 0, 1, 1;
  TreeParams params;
  params.max_depth = 1;
  TreeFit fit = fit_tree(in, y, params);

  const auto& nodes = fit.tree.nodes();
  REQUIRE(nodes.size() == 3);
  CHECK(nodes[0].feature == 0);
  CHECK(nodes[0].threshold > 1.0);
  CHECK(nodes[0].threshold <= 2.0);
  const double left = nodes[static_cast<std::size_t>(nodes[0].left)].value;
  const double right = nodes[static_cast<std::size_t>(nodes[0].right)].value;
  CHECK(left == 0.0);
  CHECK(right == 1.0);

  std::vector<OracleSplit> oracle = brute_force_splits(in, y, LossKind::squared, 0.5);
  REQUIRE(oracle.size() == 1);
  CHECK(nodes[0].feature == oracle[0].feature);
  CHECK(nodes[0].threshold == doctest::Approx(oracle[0].threshold));
}

TEST_CASE("tree split agrees with the exhaustive oracle on random data") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::MatrixXd in(15, 2);
    Eigen::VectorXd y(15);
    for (Eigen::Index i = 0; i < 15; ++i) {
      in(i, 0) = dist(rng);
      in(i, 1) = dist(rng);
      y(i) = dist(rng);
    }
    TreeParams params;
    params.max_depth = 1;
    TreeFit fit = fit_tree(in, y, params);
    std::vector<OracleSplit> oracle = brute_force_splits(in, y, LossKind::squared, 0.5);
    REQUIRE(!oracle.empty());
    CHECK(oracle_contains(oracle, fit.tree.nodes()[0].feature,
                          fit.tree.nodes()[0].threshold));
    if (oracle.size() == 1) {
      CHECK(fit.tree.nodes()[0].feature == oracle[0].feature);
      CHECK(fit.tree.nodes()[0].threshold == oracle[0].threshold);
    }
  }
}

TEST_CASE("pinball tree split agrees with the exhaustive oracle") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (double tau : {0.1, 0.5, 0.9}) {
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::MatrixXd in(12, 2);
      Eigen::VectorXd y(12);
      for (Eigen::Index i = 0; i < 12; ++i) {
        in(i, 0) = dist(rng);
        in(i, 1) = dist(rng);
        y(i) = dist(rng);
      }
      TreeParams params;
      params.max_depth = 1;
      params.loss = LossKind::pinball;
      params.tau = tau;
      TreeFit fit = fit_tree(in, y, params);
      std::vector<OracleSplit> oracle = brute_force_splits(in, y, LossKind::pinball, tau);
      if (oracle.empty()) {
        CHECK(fit.tree.nodes().size() == 1);
        continue;
      }
      CHECK(oracle_contains(oracle, fit.tree.nodes()[0].feature,
                            fit.tree.nodes()[0].threshold));
      if (oracle.size() == 1) {
        CHECK(fit.tree.nodes()[0].feature == oracle[0].feature);
        CHECK(fit.tree.nodes()[0].threshold == oracle[0].threshold);
      }
    }
  }
}

TEST_CASE("pinball leaf holds the tau-quantile of its targets") {
  Eigen::MatrixXd in(5, 1);
  Eigen::VectorXd y(5);
  in << 1, 2, 3, 4, 5;
  y << 10, 30, 20, 50, 40;
  TreeParams params;
  params.max_depth = 0;
  params.loss = LossKind::pinball;
  params.tau = 0.2;
  TreeFit fit = fit_tree(in, y, params);
  REQUIRE(fit.tree.nodes().size() == 1);
  CHECK(fit.tree.nodes()[0].value == quantile({10, 30, 20, 50, 40}, 0.2));
}

TEST_CASE("constant targets produce a bare leaf") {
  Eigen::MatrixXd in(6, 2);
  in.setRandom();
  Eigen::VectorXd y = Eigen::VectorXd::Constant(6, 3.25);
  TreeFit fit = fit_tree(in, y, TreeParams{});
  CHECK(fit.tree.nodes().size() == 1);
  CHECK(fit.tree.nodes()[0].value == 3.25);
}

TEST_CASE("unbounded tree memorizes distinct inputs") {
  Dataset d = random_dataset(40, 2, 1, 11);
  TreeFit fit = fit_tree(d.inputs(), d.outputs().col(0), TreeParams{});
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    CHECK(fit.tree.predict(d.inputs().row(i)) ==
          doctest::Approx(d.outputs()(i, 0)).epsilon(1e-12));
    CHECK(fit.tree.leaf_index(d.inputs().row(i)) ==
          fit.leaf_of_row[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("min_samples_leaf bounds every leaf's row count") {
  Dataset d = random_dataset(30, 2, 1, 12);
  TreeParams params;
  params.min_samples_leaf = 4;
  TreeFit fit = fit_tree(d.inputs(), d.outputs().col(0), params);
  std::map<std::int32_t, int> counts;
  for (std::int32_t leaf : fit.leaf_of_row) ++counts[leaf];
  for (const auto& [leaf, count] : counts) CHECK(count >= 4);
}

TEST_CASE("gain ties break toward the lowest feature index") {
  // Two identical columns: every split gain is duplicated across features.
  Eigen::MatrixXd in(4, 2);
  in << 0, 0, 1, 1, 2, 2, 3, 3;
  Eigen::VectorXd y(4);
  y << 0, 0, 1, 1;
  TreeParams params;
  params.max_depth = 1;
  TreeFit fit = fit_tree(in, y, params);
  CHECK(fit.tree.nodes()[0].feature == 0);
}

TEST_CASE("tree splits are invariant to monotone feature transforms") {
  Dataset d = random_dataset(25, 2, 1, 13);
  TreeParams params;
  params.max_depth = 3;
  TreeFit base = fit_tree(d.inputs(), d.outputs().col(0), params);

  Eigen::MatrixXd warped = d.inputs();
  warped.col(0) = warped.col(0).array().exp();
  TreeFit transformed = fit_tree(warped, d.outputs().col(0), params);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    CHECK(base.tree.predict(d.inputs().row(i)) ==
          transformed.tree.predict(warped.row(i)));
  }
}

TEST_CASE("tree JSON round-trip preserves predictions bit-for-bit") {
  Dataset d = random_dataset(30, 2, 1, 14);
  TreeFit fit = fit_tree(d.inputs(), d.outputs().col(0), TreeParams{});
  RegressionTree back = RegressionTree::from_json(fit.tree.to_json());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    CHECK(back.predict(d.inputs().row(i)) == fit.tree.predict(d.inputs().row(i)));
  }
}

TEST_CASE("single-tree forest without bootstrap equals a plain tree") {
  Dataset d = random_dataset(30, 2, 2, 15);
  ForestParams params;
  params.n_trees = 1;
  params.bootstrap = false;
  ForestModel forest = fit_forest(d, params);
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int q = 0; q < 20; ++q) {
    Eigen::VectorXd u(2);
    u << dist(rng), dist(rng);
    Eigen::VectorXd got = forest.predict(u);
    for (Eigen::Index dim = 0; dim < 2; ++dim) {
      RegressionTree tree = fit_tree(d, dim, params.tree);
      CHECK(got(dim) == tree.predict(u.transpose()));
    }
  }
}

TEST_CASE("forest on constant targets predicts the constant") {
  Dataset d = random_dataset(20, 2, 1, 17);
  Dataset constant = make_dataset(d.inputs(), Eigen::MatrixXd::Constant(20, 1, -1.5));
  ForestParams params;
  params.n_trees = 10;
  ForestModel forest = fit_forest(constant, params);
  Eigen::VectorXd u(2);
  u << 0.0, 0.0;
  CHECK(forest.predict(u)(0) == doctest::Approx(-1.5));
}

TEST_CASE("forest fitting is deterministic under its seed") {
  Dataset d = random_dataset(60, 2, 2, 18);
  ForestParams params;
  params.n_trees = 12;
  params.seed = 5;
  ForestModel a = fit_forest(d, params);
  ForestModel b = fit_forest(d, params);
  params.seed = 6;
  ForestModel c = fit_forest(d, params);
  Eigen::MatrixXd queries = random_dataset(15, 2, 1, 19).inputs();
  CHECK(a.predict_batch(queries) == b.predict_batch(queries));
  CHECK(a.predict_batch(queries) != c.predict_batch(queries));
  CHECK(a.trees().size() == 2);
  CHECK(a.trees()[0].size() == 12);
}

TEST_CASE("one full-depth stage at unit learning rate boosts to zero error") {
  Dataset d = random_dataset(30, 2, 2, 20);
  BoostedParams params;
  params.n_stages = 1;
  params.max_depth = -1;
  params.learning_rate = 1.0;
  BoostedModel m = fit_boosted(d, params);
  CHECK(std::sqrt(training_mse(m, d)) < 1e-8);
}

TEST_CASE("squared boosting loss curve is monotone nonincreasing") {
  Dataset d = random_dataset(80, 2, 2, 21);
  BoostedParams params;
  params.n_stages = 40;
  BoostedModel m = fit_boosted(d, params);
  for (const auto& curve : m.loss_curve()) {
    REQUIRE(curve.size() == 41);
    for (std::size_t s = 1; s < curve.size(); ++s) {
      CHECK(curve[s] <= curve[s - 1] + 1e-12);
    }
    CHECK(curve.back() < curve.front());
  }
}

TEST_CASE("pinball boosting improves on its init-only baseline") {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> noise(0.0, 0.3);
  Eigen::MatrixXd in(120, 1);
  Eigen::MatrixXd out(120, 1);
  for (Eigen::Index i = 0; i < 120; ++i) {
    in(i, 0) = static_cast<double>(i) / 120.0 * 4.0 - 2.0;
    out(i, 0) = std::sin(in(i, 0)) + noise(rng);
  }
  Dataset d = make_dataset(in, out);
  BoostedParams params;
  params.loss = LossKind::pinball;
  params.tau = 0.5;
  params.n_stages = 60;
  BoostedModel m = fit_boosted(d, params);
  const auto& curve = m.loss_curve()[0];
  for (std::size_t s = 1; s < curve.size(); ++s) {
    CHECK(curve[s] <= curve[s - 1] + 1e-12);
  }
  CHECK(curve.back() < 0.5 * curve.front());
}

TEST_CASE("pinball boosting at extreme quantiles brackets the median fit") {
  Dataset d = random_dataset(100, 2, 1, 23);
  BoostedParams params;
  params.loss = LossKind::pinball;
  params.n_stages = 30;
  params.tau = 0.05;
  BoostedModel lo = fit_boosted(d, params);
  params.tau = 0.95;
  BoostedModel hi = fit_boosted(d, params);
  // On average the upper-quantile model sits above the lower one.
  Eigen::MatrixXd q = random_dataset(40, 2, 1, 24).inputs();
  CHECK((hi.predict_batch(q) - lo.predict_batch(q)).mean() > 0.0);
}

TEST_CASE("boosted prediction equals init plus scaled manual traversals") {
  Dataset d = random_dataset(50, 2, 2, 25);
  BoostedParams params;
  params.n_stages = 15;
  BoostedModel m = fit_boosted(d, params);
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd u(2);
    u << dist(rng), dist(rng);
    Eigen::VectorXd got = m.predict(u);
    for (Eigen::Index dim = 0; dim < 2; ++dim) {
      double expected = m.init()(dim);
      for (const auto& tree : m.trees()[static_cast<std::size_t>(dim)]) {
        expected += m.learning_rate() * traverse(tree.nodes(), u.transpose());
      }
      CHECK(got(dim) == expected);
    }
  }
}

TEST_CASE("model fitting rejects invalid hyperparameters") {
  Dataset d = random_dataset(20, 2, 1, 27);
  LassoParams lp;
  lp.lambda = -1.0;
  CHECK_THROWS_AS(fit_lasso(d, lp), ConfigError);

  TreeParams tp;
  tp.min_samples_leaf = 0;
  CHECK_THROWS_AS(fit_tree(d.inputs(), d.outputs().col(0), tp), ConfigError);
  tp = TreeParams{};
  tp.loss = LossKind::pinball;
  tp.tau = 1.0;
  CHECK_THROWS_AS(fit_tree(d.inputs(), d.outputs().col(0), tp), ConfigError);

  ForestParams fp;
  fp.n_trees = 0;
  CHECK_THROWS_AS(fit_forest(d, fp), ConfigError);

  BoostedParams bp;
  bp.learning_rate = 0.0;
  CHECK_THROWS_AS(fit_boosted(d, bp), ConfigError);
  bp = BoostedParams{};
  bp.loss = LossKind::pinball;
  bp.tau = 0.0;
  CHECK_THROWS_AS(fit_boosted(d, bp), ConfigError);
}
