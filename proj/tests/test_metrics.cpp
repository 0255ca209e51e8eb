#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "ckm/errors.hpp"
#include "ckm/metrics.hpp"

using namespace ckm;

namespace {

Eigen::MatrixXd column(std::vector<double> v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, 0) = v[static_cast<std::size_t>(i)];
  return m;
}

IntervalBatch constant_batch(Eigen::Index n, double lo, double hi, double alpha) {
  IntervalBatch b;
  b.lower = Eigen::MatrixXd::Constant(n, 1, lo);
  b.upper = Eigen::MatrixXd::Constant(n, 1, hi);
  b.center = Eigen::MatrixXd::Constant(n, 1, (lo + hi) / 2.0);
  b.alpha = alpha;
  return b;
}

// Winkler score written as width plus one-sided hinge penalties, for
// cross-checking the case-split implementation.
double hinge_winkler(double y, double lo, double hi, double alpha) {
  return (hi - lo) + (2.0 / alpha) * std::max(0.0, lo - y) +
         (2.0 / alpha) * std::max(0.0, y - hi);
}

}  // namespace

TEST_CASE("point metrics match the worked single-dimension example") {
  Eigen::MatrixXd truth = column({1, 2, 3});
  Eigen::MatrixXd pred = column({2, 2, 2});
  CHECK(rmse(truth, pred).mean == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));
  CHECK(mae(truth, pred).mean == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  // Predicting the truth mean gives exactly zero explained variance.
  CHECK(r2(truth, pred).per_dim(0) == doctest::Approx(0.0));
  CHECK_FALSE(r2(truth, pred).any_undefined);
  const MapeMetric m = mape(truth, pred);
  CHECK(m.per_dim(0) == doctest::Approx((100.0 + 0.0 + 100.0 / 3.0) / 3.0).epsilon(1e-14));
  CHECK(m.excluded_total == 0);
}

TEST_CASE("perfect predictions score perfectly") {
  Eigen::MatrixXd truth(4, 2);
  truth << 1, -2, 3, 0.5, -1, 4, 2, 2;
  CHECK(rmse(truth, truth).mean == 0.0);
  CHECK(mae(truth, truth).mean == 0.0);
  CHECK(r2(truth, truth).per_dim(0) == 1.0);
  CHECK(r2(truth, truth).per_dim(1) == 1.0);
  CHECK(mape(truth, truth).mean == 0.0);
}

TEST_CASE("r2 goes negative for predictions worse than the mean") {
  Eigen::MatrixXd truth = column({-2, -1, 0, 1, 2});
  Eigen::MatrixXd pred = -2.0 * truth;
  CHECK(r2(truth, pred).per_dim(0) < -1.0);
}

TEST_CASE("zero-variance truth leaves r2 undefined rather than NaN") {
  Eigen::MatrixXd truth(3, 2);
  truth << 1, 5, 2, 5, 3, 5;
  Eigen::MatrixXd pred(3, 2);
  pred << 1, 5, 2, 5, 3, 4;
  const R2Metric r = r2(truth, pred);
  CHECK(r.defined[0]);
  CHECK_FALSE(r.defined[1]);
  CHECK(r.any_undefined);
  CHECK(std::isfinite(r.mean));
  CHECK(r.mean == doctest::Approx(1.0));  // mean over the defined dimension only
}

TEST_CASE("mape excludes exact-zero truth entries and counts them") {
  Eigen::MatrixXd truth = column({0.0, 1.0, 2.0});
  Eigen::MatrixXd pred = column({5.0, 1.1, 1.8});
  const MapeMetric m = mape(truth, pred);
  CHECK(m.excluded(0) == 1);
  CHECK(m.excluded_total == 1);
  CHECK(m.per_dim(0) == doctest::Approx((10.0 + 10.0) / 2.0).epsilon(1e-12));

  Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(3, 1);
  const MapeMetric all_zero = mape(zeros, pred);
  CHECK_FALSE(all_zero.defined[0]);
  CHECK(all_zero.excluded_total == 3);
}

TEST_CASE("coverage counts inclusive bounds") {
  Eigen::MatrixXd truth = column({0.5, 0.5, 2.0});
  const MetricVector cov = coverage(truth, constant_batch(3, 0.0, 1.0, 0.1));
  CHECK(cov.per_dim(0) == doctest::Approx(2.0 / 3.0));
  CHECK(cov.mean == doctest::Approx(2.0 / 3.0));

  Eigen::MatrixXd edges = column({0.0, 1.0});
  CHECK(coverage(edges, constant_batch(2, 0.0, 1.0, 0.1)).mean == 1.0);
}

TEST_CASE("winkler matches its worked examples") {
  CHECK(winkler(0.0, -1.0, 1.0, 0.1) == doctest::Approx(2.0));
  CHECK(winkler(2.0, -1.0, 1.0, 0.1) == doctest::Approx(22.0));
  CHECK(winkler(1.0, -1.0, 1.0, 0.1) == doctest::Approx(2.0));   // boundary is covered
  CHECK(winkler(-1.0, -1.0, 1.0, 0.1) == doctest::Approx(2.0));
  CHECK(winkler(0.0, 0.0, 0.0, 0.1) == 0.0);                     // degenerate interval
  CHECK_THROWS_AS(winkler(0.0, 1.0, -1.0, 0.1), DataError);
  CHECK_THROWS_AS(winkler(0.0, -1.0, 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(winkler(0.0, -1.0, 1.0, 1.0), ConfigError);
}

TEST_CASE("winkler is continuous at the interval boundary") {
  const double eps = 1e-9;
  CHECK(winkler(1.0 + eps, -1.0, 1.0, 0.1) ==
        doctest::Approx(2.0 + 20.0 * eps).epsilon(1e-12));
  CHECK(winkler(-1.0 - eps, -1.0, 1.0, 0.1) ==
        doctest::Approx(2.0 + 20.0 * eps).epsilon(1e-12));
}

TEST_CASE("winkler agrees with a hinge-form evaluator on random tuples") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> val(-10.0, 10.0);
  std::uniform_real_distribution<double> a(0.01, 0.99);
  for (int i = 0; i < 10000; ++i) {
    double lo = val(rng), hi = val(rng);
    if (lo > hi) std::swap(lo, hi);
    const double y = val(rng);
    const double alpha = a(rng);
    const double got = winkler(y, lo, hi, alpha);
    const double want = hinge_winkler(y, lo, hi, alpha);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("winkler invariants hold") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    double lo = val(rng), hi = val(rng);
    if (lo > hi) std::swap(lo, hi);
    const double y = val(rng);
    const double shift = val(rng);
    const double base = winkler(y, lo, hi, 0.1);
    CHECK(base >= hi - lo);  // never below the width
    CHECK(winkler(y + shift, lo + shift, hi + shift, 0.1) ==
          doctest::Approx(base).epsilon(1e-12));
    if (y < lo || y > hi) {
      // Widening toward the miss strictly reduces the penalty side.
      CHECK(winkler(y, lo - 0.5, hi + 0.5, 0.1) < base + 1.0);
    }
  }
}

TEST_CASE("mean winkler averages the worked examples to 12") {
  Eigen::MatrixXd truth = column({0.0, 2.0});
  const MetricVector w = mean_winkler(truth, constant_batch(2, -1.0, 1.0, 0.1));
  CHECK(w.per_dim(0) == doctest::Approx(12.0));
  CHECK(w.mean == doctest::Approx(12.0));
}

TEST_CASE("rmse dominates mae on random data") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd truth(50, 3), pred(50, 3);
    for (Eigen::Index i = 0; i < 50; ++i) {
      for (Eigen::Index d = 0; d < 3; ++d) {
        truth(i, d) = dist(rng);
        pred(i, d) = dist(rng);
      }
    }
    const MetricVector r = rmse(truth, pred);
    const MetricVector m = mae(truth, pred);
    for (Eigen::Index d = 0; d < 3; ++d) CHECK(r.per_dim(d) >= m.per_dim(d));
  }
}

TEST_CASE("per-dimension metrics match independent column computations") {
  std::mt19937_64 rng(24);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd truth(40, 2), pred(40, 2);
  for (Eigen::Index i = 0; i < 40; ++i) {
    truth(i, 0) = dist(rng);
    truth(i, 1) = 100.0 * dist(rng);
    pred(i, 0) = dist(rng);
    pred(i, 1) = 100.0 * dist(rng);
  }
  const MetricVector joint = rmse(truth, pred);
  for (Eigen::Index d = 0; d < 2; ++d) {
    const MetricVector single = rmse(truth.col(d), pred.col(d));
    CHECK(joint.per_dim(d) == doctest::Approx(single.per_dim(0)).epsilon(1e-15));
  }
  CHECK(joint.mean == doctest::Approx((joint.per_dim(0) + joint.per_dim(1)) / 2.0));
}

TEST_CASE("metric functions reject mismatched shapes") {
  Eigen::MatrixXd a(3, 2), b(2, 2), c(3, 1);
  a.setZero();
  b.setZero();
  c.setZero();
  CHECK_THROWS_AS(rmse(a, b), DataError);
  CHECK_THROWS_AS(mae(a, c), DataError);
  CHECK_THROWS_AS(r2(Eigen::MatrixXd(0, 1), Eigen::MatrixXd(0, 1)), DataError);
  IntervalBatch batch = constant_batch(3, 0.0, 1.0, 0.1);
  CHECK_THROWS_AS(coverage(a, batch), DataError);
  batch.upper(1, 0) = -5.0;  // upper below lower
  CHECK_THROWS_AS(mean_winkler(c, batch), DataError);
}

TEST_CASE("evaluate_predictions fills a report without interval metrics") {
  Eigen::MatrixXd truth = column({1, 2, 3});
  Eigen::MatrixXd pred = column({2, 2, 2});
  MetricReport rep = evaluate_predictions(truth, pred);
  rep.model_id = "lr";
  rep.split = "test";
  CHECK(rep.n_samples == 3);
  CHECK_FALSE(rep.coverage.has_value());
  CHECK_FALSE(rep.winkler.has_value());
  CHECK(MetricReport::csv_header() ==
        "method,split,rmse,mae,r2,mape,coverage,winkler");
  const std::string row = rep.csv_row();
  CHECK(row.rfind("lr,test,", 0) == 0);
  // Interval columns stay present but empty.
  CHECK(row.substr(row.size() - 2) == ",,");
  CHECK(std::count(row.begin(), row.end(), ',') == 7);
}

TEST_CASE("evaluate_intervals reports coverage and winkler from the batch") {
  Eigen::MatrixXd truth = column({0.0, 2.0});
  MetricReport rep = evaluate_intervals(truth, constant_batch(2, -1.0, 1.0, 0.1));
  rep.model_id = "scp";
  rep.split = "test";
  CHECK(rep.alpha == 0.1);
  REQUIRE(rep.coverage.has_value());
  REQUIRE(rep.winkler.has_value());
  CHECK(rep.coverage->mean == doctest::Approx(0.5));
  CHECK(rep.winkler->mean == doctest::Approx(12.0));
  const std::string row = rep.csv_row();
  CHECK(std::count(row.begin(), row.end(), ',') == 7);

  const nlohmann::json j = rep.to_json();
  CHECK(j.at("model") == "scp");
  CHECK(j.at("split") == "test");
  CHECK(j.at("n_samples") == 2);
  CHECK(j.at("coverage").at("mean") == doctest::Approx(0.5));
  CHECK(j.at("winkler").at("mean") == doctest::Approx(12.0));
  CHECK(j.at("aggregation") == "unweighted mean over output dimensions");
}

TEST_CASE("report json marks undefined dimensions as null") {
  Eigen::MatrixXd truth(3, 2);
  truth << 1, 5, 2, 5, 3, 5;  // second dimension constant
  Eigen::MatrixXd pred = truth;
  pred(2, 1) = 4.0;
  MetricReport rep = evaluate_predictions(truth, pred);
  const nlohmann::json j = rep.to_json();
  CHECK(j.at("r2").at("per_dim")[0].is_number());
  CHECK(j.at("r2").at("per_dim")[1].is_null());
}
