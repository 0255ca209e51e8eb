#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ckm/conformal.hpp"

namespace ckm {

// Per-output-dimension values plus their unweighted mean.
struct MetricVector {
  Eigen::VectorXd per_dim;
  double mean = 0.0;
};

// Coefficient of determination; a dimension with zero truth variance has no
// defined value and is excluded from the mean.
struct R2Metric {
  Eigen::VectorXd per_dim;  // meaningful only where defined
  std::vector<bool> defined;
  double mean = 0.0;        // over defined dimensions
  bool any_undefined = false;
};

// Mean absolute percentage error (percent). Entries whose true value is
// exactly zero are excluded from the mean and counted; a dimension with no
// usable entries at all is undefined, like a zero-variance R2 dimension.
struct MapeMetric {
  Eigen::VectorXd per_dim;
  Eigen::VectorXi excluded;
  std::vector<bool> defined;
  double mean = 0.0;  // over defined dimensions
  Eigen::Index excluded_total = 0;
};

MetricVector rmse(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred);
MetricVector mae(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred);
R2Metric r2(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred);
MapeMetric mape(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred);

// Fraction of entries with lower <= truth <= upper, bounds inclusive.
MetricVector coverage(const Eigen::MatrixXd& truth, const IntervalBatch& intervals);

// Interval score: width, plus (2/alpha) times the distance by which the
// truth escapes the band.
double winkler(double y, double v_l, double v_u, double alpha);

MetricVector mean_winkler(const Eigen::MatrixXd& truth, const IntervalBatch& intervals);

// One model x split evaluation. Interval metrics are present only when the
// evaluation had intervals.
struct MetricReport {
  std::string model_id;
  std::string split;
  Eigen::Index n_samples = 0;
  double alpha = 0.0;  // meaningful when intervals were evaluated

  MetricVector rmse;
  MetricVector mae;
  R2Metric r2;
  MapeMetric mape;
  std::optional<MetricVector> coverage;
  std::optional<MetricVector> winkler;

  nlohmann::json to_json() const;
  std::string csv_row() const;
  static std::string csv_header();
};

MetricReport evaluate_predictions(const Eigen::MatrixXd& truth,
                                  const Eigen::MatrixXd& pred);
MetricReport evaluate_intervals(const Eigen::MatrixXd& truth,
                                const IntervalBatch& intervals);

}  // namespace ckm
