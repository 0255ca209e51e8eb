#include "ckm/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ckm/errors.hpp"
#include "ckm/format.hpp"
#include "ckm/log.hpp"
#include "ckm/quantiles.hpp"

namespace ckm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1)");
  }
}

// JSON has no infinity literal; encode it as a string.
nlohmann::json encode_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double decode_double(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw DataError("unexpected numeric string '" + s + "'");
  }
  return j.get<double>();
}

}  // namespace

Eigen::VectorXd nonconformity(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat) {
  if (x.size() != x_hat.size()) {
    throw DataError("nonconformity dimension mismatch: " + std::to_string(x.size()) +
                    " vs " + std::to_string(x_hat.size()));
  }
  return (x - x_hat).cwiseAbs();
}

double p_value(const std::vector<double>& cal_scores, double new_score) {
  if (cal_scores.empty()) throw DataError("p_value needs calibration scores");
  std::size_t count = 0;
  for (double s : cal_scores) {
    if (s >= new_score) ++count;
  }
  return static_cast<double>(count + 1) /
         static_cast<double>(cal_scores.size() + 1);
}

Eigen::Index conformal_rank(Eigen::Index n_cal, double alpha) {
  check_alpha(alpha);
  if (n_cal < 1) throw DataError("calibration set is empty");
  return ceil_index(static_cast<double>(n_cal + 1) * (1.0 - alpha));
}

double conformal_quantile(const std::vector<double>& sorted_scores, double alpha) {
  const auto n = static_cast<Eigen::Index>(sorted_scores.size());
  const Eigen::Index k = conformal_rank(n, alpha);
  if (k > n) return kInf;
  return sorted_scores[static_cast<std::size_t>(k - 1)];
}

ConformalCalibrator ConformalCalibrator::calibrate(const Regressor& model,
                                                   const Dataset& cal, double alpha,
                                                   bool joint_bonferroni) {
  check_alpha(alpha);
  if (cal.empty()) throw DataError("calibration set is empty");
  if (cal.input_dim() != model.input_dim() || cal.output_dim() != model.output_dim()) {
    throw DataError("calibration set and model disagree on dimensions");
  }

  ConformalCalibrator c;
  c.alpha_ = alpha;
  c.joint_ = joint_bonferroni;
  c.n_cal_ = cal.size();

  const double dim_alpha =
      joint_bonferroni ? alpha / static_cast<double>(cal.output_dim()) : alpha;
  const Eigen::MatrixXd residuals =
      (cal.outputs() - model.predict_batch(cal.inputs())).cwiseAbs();

  c.mu_.resize(cal.output_dim());
  c.scores_.resize(static_cast<std::size_t>(cal.output_dim()));
  for (Eigen::Index d = 0; d < cal.output_dim(); ++d) {
    auto& scores = c.scores_[static_cast<std::size_t>(d)];
    scores.assign(residuals.col(d).data(), residuals.col(d).data() + cal.size());
    std::sort(scores.begin(), scores.end());
    c.mu_(d) = conformal_quantile(scores, dim_alpha);
  }
  if (!c.mu_.allFinite()) {
    log::warn("conformal: calibration set too small for alpha " +
              format_double(dim_alpha) + " (needs rank " +
              std::to_string(conformal_rank(c.n_cal_, dim_alpha)) + " of " +
              std::to_string(c.n_cal_) + "); intervals are unbounded");
  }
  return c;
}

PredictionInterval ConformalCalibrator::predict(const Regressor& model,
                                                const Eigen::VectorXd& u) const {
  if (mu_.size() != model.output_dim()) {
    throw DataError("calibrator and model disagree on output dimensions");
  }
  PredictionInterval iv;
  iv.center = model.predict(u);
  iv.lower = iv.center - mu_;
  iv.upper = iv.center + mu_;
  iv.alpha = alpha_;
  return iv;
}

IntervalBatch ConformalCalibrator::intervals(const Regressor& model,
                                             const Eigen::MatrixXd& inputs) const {
  if (mu_.size() != model.output_dim()) {
    throw DataError("calibrator and model disagree on output dimensions");
  }
  IntervalBatch batch;
  batch.center = model.predict_batch(inputs);
  batch.lower = batch.center.rowwise() - mu_.transpose();
  batch.upper = batch.center.rowwise() + mu_.transpose();
  batch.alpha = alpha_;
  return batch;
}

nlohmann::json ConformalCalibrator::to_json() const {
  nlohmann::json mu = nlohmann::json::array();
  for (Eigen::Index d = 0; d < mu_.size(); ++d) mu.push_back(encode_double(mu_(d)));
  nlohmann::json scores = nlohmann::json::array();
  for (const auto& dim_scores : scores_) {
    scores.push_back(nlohmann::json(dim_scores));
  }
  return {{"kind", "split_conformal"},
          {"alpha", alpha_},
          {"joint_bonferroni", joint_},
          {"n_cal", n_cal_},
          {"mu", std::move(mu)},
          {"scores", std::move(scores)}};
}

ConformalCalibrator ConformalCalibrator::from_json(const nlohmann::json& j) {
  if (j.at("kind").get<std::string>() != "split_conformal") {
    throw DataError("not a split-conformal calibrator document");
  }
  ConformalCalibrator c;
  c.alpha_ = j.at("alpha").get<double>();
  check_alpha(c.alpha_);
  c.joint_ = j.at("joint_bonferroni").get<bool>();
  c.n_cal_ = j.at("n_cal").get<Eigen::Index>();
  const auto& mu = j.at("mu");
  c.mu_.resize(static_cast<Eigen::Index>(mu.size()));
  for (Eigen::Index d = 0; d < c.mu_.size(); ++d) {
    c.mu_(d) = decode_double(mu[static_cast<std::size_t>(d)]);
  }
  for (const auto& dim_scores : j.at("scores")) {
    c.scores_.push_back(dim_scores.get<std::vector<double>>());
    if (!std::is_sorted(c.scores_.back().begin(), c.scores_.back().end())) {
      throw DataError("calibrator score list is not sorted");
    }
  }
  if (c.scores_.size() != static_cast<std::size_t>(c.mu_.size())) {
    throw DataError("calibrator score lists and mu disagree on dimensions");
  }
  return c;
}

namespace {

// Swaps any crossing (lower > upper) prediction pairs in place; returns the
// number of crossings.
Eigen::Index fix_crossings(Eigen::MatrixXd& lower, Eigen::MatrixXd& upper) {
  Eigen::Index crossings = 0;
  for (Eigen::Index i = 0; i < lower.rows(); ++i) {
    for (Eigen::Index d = 0; d < lower.cols(); ++d) {
      if (lower(i, d) > upper(i, d)) {
        std::swap(lower(i, d), upper(i, d));
        ++crossings;
      }
    }
  }
  return crossings;
}

void warn_crossings(const char* tag, Eigen::Index crossings, Eigen::Index total) {
  if (crossings > 0) {
    log::warn(std::string(tag) + ": swapped " + std::to_string(crossings) +
              " crossing quantile pairs of " + std::to_string(total));
  }
}

}  // namespace

CqrCalibrator CqrCalibrator::fit(const Dataset& train, const Dataset& cal,
                                 double alpha, const BoostedParams& gb) {
  check_alpha(alpha);
  BoostedParams lower_params = gb;
  lower_params.loss = LossKind::pinball;
  lower_params.tau = alpha / 2.0;
  BoostedParams upper_params = lower_params;
  upper_params.tau = 1.0 - alpha / 2.0;
  auto lower = std::make_shared<BoostedModel>(fit_boosted(train, lower_params));
  auto upper = std::make_shared<BoostedModel>(fit_boosted(train, upper_params));
  return calibrate(std::move(lower), std::move(upper), cal, alpha);
}

CqrCalibrator CqrCalibrator::calibrate(std::shared_ptr<const Regressor> lower_model,
                                       std::shared_ptr<const Regressor> upper_model,
                                       const Dataset& cal, double alpha) {
  check_alpha(alpha);
  if (!lower_model || !upper_model) throw ConfigError("cqr models must be set");
  if (cal.empty()) throw DataError("calibration set is empty");
  if (cal.input_dim() != lower_model->input_dim() ||
      cal.output_dim() != lower_model->output_dim() ||
      cal.input_dim() != upper_model->input_dim() ||
      cal.output_dim() != upper_model->output_dim()) {
    throw DataError("calibration set and quantile models disagree on dimensions");
  }

  Eigen::MatrixXd lo = lower_model->predict_batch(cal.inputs());
  Eigen::MatrixXd hi = upper_model->predict_batch(cal.inputs());
  warn_crossings("cqr", fix_crossings(lo, hi), lo.size());

  CqrCalibrator c;
  c.alpha_ = alpha;
  c.n_cal_ = cal.size();
  c.lower_ = std::move(lower_model);
  c.upper_ = std::move(upper_model);
  c.correction_.resize(cal.output_dim());
  for (Eigen::Index d = 0; d < cal.output_dim(); ++d) {
    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(cal.size()));
    for (Eigen::Index i = 0; i < cal.size(); ++i) {
      const double y = cal.outputs()(i, d);
      scores.push_back(std::max(lo(i, d) - y, y - hi(i, d)));
    }
    std::sort(scores.begin(), scores.end());
    c.correction_(d) = conformal_quantile(scores, alpha);
  }
  if (!c.correction_.allFinite()) {
    log::warn("cqr: calibration set too small for alpha " + format_double(alpha) +
              "; intervals are unbounded");
  }
  return c;
}

IntervalBatch CqrCalibrator::intervals(const Eigen::MatrixXd& inputs) const {
  Eigen::MatrixXd lo = lower_->predict_batch(inputs);
  Eigen::MatrixXd hi = upper_->predict_batch(inputs);
  warn_crossings("cqr", fix_crossings(lo, hi), lo.size());

  IntervalBatch batch;
  batch.alpha = alpha_;
  batch.lower = lo.rowwise() - correction_.transpose();
  batch.upper = hi.rowwise() + correction_.transpose();
  // A strongly negative correction can push the bounds past each other;
  // collapse such intervals to their midpoint.
  Eigen::Index collapsed = 0;
  for (Eigen::Index i = 0; i < batch.lower.rows(); ++i) {
    for (Eigen::Index d = 0; d < batch.lower.cols(); ++d) {
      if (batch.lower(i, d) > batch.upper(i, d)) {
        const double mid = (batch.lower(i, d) + batch.upper(i, d)) / 2.0;
        batch.lower(i, d) = mid;
        batch.upper(i, d) = mid;
        ++collapsed;
      }
    }
  }
  if (collapsed > 0) {
    log::warn("cqr: collapsed " + std::to_string(collapsed) +
              " over-shrunk intervals to their midpoints");
  }
  batch.center = (batch.lower + batch.upper) / 2.0;
  return batch;
}

PredictionInterval CqrCalibrator::predict(const Eigen::VectorXd& u) const {
  Eigen::MatrixXd row = u.transpose();
  IntervalBatch batch = intervals(row);
  PredictionInterval iv;
  iv.lower = batch.lower.row(0).transpose();
  iv.upper = batch.upper.row(0).transpose();
  iv.center = batch.center.row(0).transpose();
  iv.alpha = alpha_;
  return iv;
}

nlohmann::json CqrCalibrator::to_json() const {
  nlohmann::json correction = nlohmann::json::array();
  for (Eigen::Index d = 0; d < correction_.size(); ++d) {
    correction.push_back(encode_double(correction_(d)));
  }
  return {{"kind", "cqr"},
          {"alpha", alpha_},
          {"n_cal", n_cal_},
          {"correction", std::move(correction)}};
}

CqrCalibrator CqrCalibrator::from_json(const nlohmann::json& j,
                                       std::shared_ptr<const Regressor> lower_model,
                                       std::shared_ptr<const Regressor> upper_model) {
  if (j.at("kind").get<std::string>() != "cqr") {
    throw DataError("not a cqr calibrator document");
  }
  if (!lower_model || !upper_model) throw ConfigError("cqr models must be set");
  CqrCalibrator c;
  c.alpha_ = j.at("alpha").get<double>();
  check_alpha(c.alpha_);
  c.n_cal_ = j.at("n_cal").get<Eigen::Index>();
  const auto& correction = j.at("correction");
  c.correction_.resize(static_cast<Eigen::Index>(correction.size()));
  for (Eigen::Index d = 0; d < c.correction_.size(); ++d) {
    c.correction_(d) = decode_double(correction[static_cast<std::size_t>(d)]);
  }
  if (c.correction_.size() != lower_model->output_dim()) {
    throw DataError("cqr correction and model disagree on dimensions");
  }
  c.lower_ = std::move(lower_model);
  c.upper_ = std::move(upper_model);
  return c;
}

IntervalBatch raw_qr_intervals(const Regressor& lower_model,
                               const Regressor& upper_model,
                               const Eigen::MatrixXd& inputs, double alpha) {
  check_alpha(alpha);
  IntervalBatch batch;
  batch.lower = lower_model.predict_batch(inputs);
  batch.upper = upper_model.predict_batch(inputs);
  warn_crossings("qr", fix_crossings(batch.lower, batch.upper), batch.lower.size());
  batch.center = (batch.lower + batch.upper) / 2.0;
  batch.alpha = alpha;
  return batch;
}

}  // namespace ckm
