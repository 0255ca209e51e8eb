#include "ckm/metrics.hpp"

#include <cmath>

#include "ckm/errors.hpp"
#include "ckm/format.hpp"

namespace ckm {

namespace {

void check_pair(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred) {
  if (truth.rows() != pred.rows() || truth.cols() != pred.cols()) {
    throw DataError("truth and prediction shapes differ");
  }
  if (truth.rows() < 1) throw DataError("metrics need at least one sample");
}

void check_batch(const Eigen::MatrixXd& truth, const IntervalBatch& intervals) {
  check_pair(truth, intervals.lower);
  check_pair(truth, intervals.upper);
  if ((intervals.lower.array() > intervals.upper.array()).any()) {
    throw DataError("interval batch has lower > upper entries");
  }
}

double mean_over(const Eigen::VectorXd& per_dim) {
  return per_dim.mean();
}

}  // namespace

MetricVector rmse(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred) {
  check_pair(truth, pred);
  MetricVector m;
  m.per_dim = ((truth - pred).array().square().colwise().sum() /
               static_cast<double>(truth.rows()))
                  .sqrt()
                  .transpose();
  m.mean = mean_over(m.per_dim);
  return m;
}

MetricVector mae(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred) {
  check_pair(truth, pred);
  MetricVector m;
  m.per_dim = ((truth - pred).cwiseAbs().colwise().sum() /
               static_cast<double>(truth.rows()))
                  .transpose();
  m.mean = mean_over(m.per_dim);
  return m;
}

R2Metric r2(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred) {
  check_pair(truth, pred);
  R2Metric m;
  m.per_dim.setZero(truth.cols());
  m.defined.assign(static_cast<std::size_t>(truth.cols()), true);
  double total = 0.0;
  Eigen::Index n_defined = 0;
  for (Eigen::Index d = 0; d < truth.cols(); ++d) {
    const double t_mean = truth.col(d).mean();
    const double ss_tot = (truth.col(d).array() - t_mean).square().sum();
    if (ss_tot <= 0.0) {
      m.defined[static_cast<std::size_t>(d)] = false;
      m.any_undefined = true;
      continue;
    }
    const double ss_res = (truth.col(d) - pred.col(d)).squaredNorm();
    m.per_dim(d) = 1.0 - ss_res / ss_tot;
    total += m.per_dim(d);
    ++n_defined;
  }
  m.mean = n_defined > 0 ? total / static_cast<double>(n_defined) : 0.0;
  return m;
}

MapeMetric mape(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred) {
  check_pair(truth, pred);
  MapeMetric m;
  m.per_dim.setZero(truth.cols());
  m.excluded.setZero(truth.cols());
  m.defined.assign(static_cast<std::size_t>(truth.cols()), true);
  double total = 0.0;
  Eigen::Index n_defined = 0;
  for (Eigen::Index d = 0; d < truth.cols(); ++d) {
    double sum = 0.0;
    Eigen::Index used = 0;
    for (Eigen::Index i = 0; i < truth.rows(); ++i) {
      const double t = truth(i, d);
      if (t == 0.0) {
        ++m.excluded(d);
        continue;
      }
      sum += std::abs((t - pred(i, d)) / t);
      ++used;
    }
    m.excluded_total += m.excluded(d);
    if (used == 0) {
      m.defined[static_cast<std::size_t>(d)] = false;
      continue;
    }
    m.per_dim(d) = 100.0 * sum / static_cast<double>(used);
    total += m.per_dim(d);
    ++n_defined;
  }
  m.mean = n_defined > 0 ? total / static_cast<double>(n_defined) : 0.0;
  return m;
}

MetricVector coverage(const Eigen::MatrixXd& truth, const IntervalBatch& intervals) {
  check_batch(truth, intervals);
  MetricVector m;
  m.per_dim = ((truth.array() >= intervals.lower.array() &&
                truth.array() <= intervals.upper.array())
                   .cast<double>()
                   .colwise()
                   .sum() /
               static_cast<double>(truth.rows()))
                  .transpose();
  m.mean = mean_over(m.per_dim);
  return m;
}

double winkler(double y, double v_l, double v_u, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (v_l > v_u) throw DataError("winkler needs lower <= upper");
  double score = v_u - v_l;
  if (y < v_l) {
    score += 2.0 / alpha * (v_l - y);
  } else if (y > v_u) {
    score += 2.0 / alpha * (y - v_u);
  }
  return score;
}

MetricVector mean_winkler(const Eigen::MatrixXd& truth, const IntervalBatch& intervals) {
  check_batch(truth, intervals);
  MetricVector m;
  m.per_dim.setZero(truth.cols());
  for (Eigen::Index d = 0; d < truth.cols(); ++d) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < truth.rows(); ++i) {
      total += winkler(truth(i, d), intervals.lower(i, d), intervals.upper(i, d),
                       intervals.alpha);
    }
    m.per_dim(d) = total / static_cast<double>(truth.rows());
  }
  m.mean = mean_over(m.per_dim);
  return m;
}

namespace {

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

nlohmann::json metric_json(const MetricVector& m) {
  return {{"per_dim", vector_json(m.per_dim)}, {"mean", m.mean}};
}

}  // namespace

nlohmann::json MetricReport::to_json() const {
  nlohmann::json r2_per_dim = nlohmann::json::array();
  for (Eigen::Index d = 0; d < r2.per_dim.size(); ++d) {
    if (r2.defined[static_cast<std::size_t>(d)]) {
      r2_per_dim.push_back(r2.per_dim(d));
    } else {
      r2_per_dim.push_back(nullptr);  // undefined: zero-variance truth
    }
  }
  nlohmann::json mape_per_dim = nlohmann::json::array();
  nlohmann::json mape_excluded = nlohmann::json::array();
  for (Eigen::Index d = 0; d < mape.per_dim.size(); ++d) {
    if (mape.defined[static_cast<std::size_t>(d)]) {
      mape_per_dim.push_back(mape.per_dim(d));
    } else {
      mape_per_dim.push_back(nullptr);
    }
    mape_excluded.push_back(mape.excluded(d));
  }

  nlohmann::json j{
      {"model", model_id},
      {"split", split},
      {"n_samples", n_samples},
      {"aggregation", "unweighted mean over output dimensions"},
      {"rmse", metric_json(rmse)},
      {"mae", metric_json(mae)},
      {"r2",
       {{"per_dim", std::move(r2_per_dim)},
        {"mean", r2.mean},
        {"any_undefined", r2.any_undefined}}},
      {"mape",
       {{"per_dim", std::move(mape_per_dim)},
        {"mean", mape.mean},
        {"excluded", std::move(mape_excluded)},
        {"excluded_total", mape.excluded_total}}}};
  if (coverage) {
    j["alpha"] = alpha;
    j["coverage"] = metric_json(*coverage);
  }
  if (winkler) j["winkler"] = metric_json(*winkler);
  return j;
}

std::string MetricReport::csv_header() {
  return "method,split,rmse,mae,r2,mape,coverage,winkler";
}

std::string MetricReport::csv_row() const {
  std::string row = model_id + "," + split;
  row += "," + format_double(rmse.mean);
  row += "," + format_double(mae.mean);
  row += "," + format_double(r2.mean);
  row += "," + format_double(mape.mean);
  row += coverage ? "," + format_double(coverage->mean) : ",";
  row += winkler ? "," + format_double(winkler->mean) : ",";
  return row;
}

MetricReport evaluate_predictions(const Eigen::MatrixXd& truth,
                                  const Eigen::MatrixXd& pred) {
  MetricReport report;
  report.n_samples = truth.rows();
  report.rmse = rmse(truth, pred);
  report.mae = mae(truth, pred);
  report.r2 = r2(truth, pred);
  report.mape = mape(truth, pred);
  return report;
}

MetricReport evaluate_intervals(const Eigen::MatrixXd& truth,
                                const IntervalBatch& intervals) {
  MetricReport report = evaluate_predictions(truth, intervals.center);
  report.alpha = intervals.alpha;
  report.coverage = coverage(truth, intervals);
  report.winkler = mean_winkler(truth, intervals);
  return report;
}

}  // namespace ckm
