#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include <json.hpp>

#include "ckm/dataset.hpp"
#include "ckm/ensemble.hpp"
#include "ckm/regressor.hpp"

namespace ckm {

// Componentwise absolute error |x - x_hat|.
Eigen::VectorXd nonconformity(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat);

// (|{s in cal_scores : s >= new_score}| + 1) / (N + 1); ties count.
double p_value(const std::vector<double>& cal_scores, double new_score);

// Finite-sample quantile rank k = ceil((n_cal + 1) * (1 - alpha)).
Eigen::Index conformal_rank(Eigen::Index n_cal, double alpha);

// k-th smallest element of the sorted scores, or +infinity when k exceeds
// the calibration size (too little data for the requested confidence).
double conformal_quantile(const std::vector<double>& sorted_scores, double alpha);

// Componentwise interval for one command.
struct PredictionInterval {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd center;
  double alpha = 0.1;
};

// Intervals for a batch of commands, one row per sample.
struct IntervalBatch {
  Eigen::MatrixXd lower;
  Eigen::MatrixXd upper;
  Eigen::MatrixXd center;
  double alpha = 0.1;
};

// Split conformal calibration: per output dimension, mu is the rank-k
// smallest absolute calibration error, and every interval is the fixed-width
// band [x_hat - mu, x_hat + mu]. With joint_bonferroni the per-dimension
// significance is alpha / output_dim, making the band simultaneous.
class ConformalCalibrator {
 public:
  static ConformalCalibrator calibrate(const Regressor& model, const Dataset& cal,
                                       double alpha, bool joint_bonferroni = false);

  double alpha() const { return alpha_; }
  bool joint_bonferroni() const { return joint_; }
  Eigen::Index calibration_size() const { return n_cal_; }
  const Eigen::VectorXd& mu() const { return mu_; }
  const std::vector<std::vector<double>>& scores() const { return scores_; }

  PredictionInterval predict(const Regressor& model, const Eigen::VectorXd& u) const;
  IntervalBatch intervals(const Regressor& model, const Eigen::MatrixXd& inputs) const;

  nlohmann::json to_json() const;
  static ConformalCalibrator from_json(const nlohmann::json& j);

 private:
  ConformalCalibrator() = default;

  double alpha_ = 0.1;
  bool joint_ = false;
  Eigen::Index n_cal_ = 0;
  Eigen::VectorXd mu_;
  std::vector<std::vector<double>> scores_;  // sorted, one list per dimension
};

// Conformalized quantile regression: a lower and an upper pinball model plus
// a per-dimension additive correction from the calibration set. Negative
// corrections (raw intervals already too wide) shrink the band; if shrinking
// crosses the bounds they collapse to their midpoint.
class CqrCalibrator {
 public:
  // Fits pinball-boosted models at tau = alpha/2 and 1 - alpha/2 (gb.loss
  // and gb.tau are overridden), then calibrates.
  static CqrCalibrator fit(const Dataset& train, const Dataset& cal, double alpha,
                           const BoostedParams& gb);

  // Calibrates pre-fitted quantile models.
  static CqrCalibrator calibrate(std::shared_ptr<const Regressor> lower_model,
                                 std::shared_ptr<const Regressor> upper_model,
                                 const Dataset& cal, double alpha);

  double alpha() const { return alpha_; }
  Eigen::Index calibration_size() const { return n_cal_; }
  const Eigen::VectorXd& correction() const { return correction_; }
  const Regressor& lower_model() const { return *lower_; }
  const Regressor& upper_model() const { return *upper_; }
  std::shared_ptr<const Regressor> lower_ptr() const { return lower_; }
  std::shared_ptr<const Regressor> upper_ptr() const { return upper_; }

  PredictionInterval predict(const Eigen::VectorXd& u) const;
  IntervalBatch intervals(const Eigen::MatrixXd& inputs) const;

  // Serializes the correction state only; the models are stored separately.
  nlohmann::json to_json() const;
  static CqrCalibrator from_json(const nlohmann::json& j,
                                 std::shared_ptr<const Regressor> lower_model,
                                 std::shared_ptr<const Regressor> upper_model);

 private:
  CqrCalibrator() = default;

  double alpha_ = 0.1;
  Eigen::Index n_cal_ = 0;
  Eigen::VectorXd correction_;
  std::shared_ptr<const Regressor> lower_;
  std::shared_ptr<const Regressor> upper_;
};

// Uncorrected quantile-regression band [q_lo(u), q_hi(u)]; crossing bounds
// are swapped (and counted in the log) before use.
IntervalBatch raw_qr_intervals(const Regressor& lower_model,
                               const Regressor& upper_model,
                               const Eigen::MatrixXd& inputs, double alpha);

}  // namespace ckm
