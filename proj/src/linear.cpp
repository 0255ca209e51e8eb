#include "ckm/linear.hpp"

#include <Eigen/QR>
#include <cmath>

#include "ckm/errors.hpp"
#include "ckm/log.hpp"

namespace ckm {

LinearModel::LinearModel(Eigen::MatrixXd weights, Eigen::VectorXd intercept)
    : Regressor(weights.cols(), weights.rows()),
      weights_(std::move(weights)),
      intercept_(std::move(intercept)) {
  if (weights_.rows() != intercept_.size()) {
    throw DataError("weight rows and intercept size differ");
  }
}

Eigen::VectorXd LinearModel::predict_one(const Eigen::VectorXd& u) const {
  return weights_ * u + intercept_;
}

Eigen::MatrixXd LinearModel::predict_rows(const Eigen::MatrixXd& inputs) const {
  return (inputs * weights_.transpose()).rowwise() + intercept_.transpose();
}

nlohmann::json LinearModel::to_json() const {
  nlohmann::json weights = nlohmann::json::array();
  for (Eigen::Index r = 0; r < weights_.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < weights_.cols(); ++c) row.push_back(weights_(r, c));
    weights.push_back(std::move(row));
  }
  nlohmann::json intercept = nlohmann::json::array();
  for (Eigen::Index r = 0; r < intercept_.size(); ++r) {
    intercept.push_back(intercept_(r));
  }
  return {{"kind", "linear"}, {"weights", weights}, {"intercept", intercept}};
}

namespace {

void require_trainable(const Dataset& train) {
  if (train.size() < 2) throw FitError("need at least 2 training samples");
}

}  // namespace

LinearModel fit_linear(const Dataset& train) {
  require_trainable(train);
  const Eigen::Index n = train.size();

  // Center both sides; the intercept absorbs the means. A rank-revealing
  // complete orthogonal decomposition gives the minimum-norm solution when
  // the design is rank-deficient.
  const Eigen::RowVectorXd u_mean = train.inputs().colwise().mean();
  const Eigen::RowVectorXd x_mean = train.outputs().colwise().mean();
  Eigen::MatrixXd U = train.inputs().rowwise() - u_mean;
  Eigen::MatrixXd X = train.outputs().rowwise() - x_mean;

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(U);
  if (cod.rank() < std::min<Eigen::Index>(train.input_dim(), n - 1)) {
    log::warn("linear: rank-deficient design (rank " +
              std::to_string(cod.rank()) + " of " +
              std::to_string(train.input_dim()) +
              "); using the minimum-norm solution");
  }
  Eigen::MatrixXd W = cod.solve(X).transpose();  // 3m x n
  Eigen::VectorXd b =
      x_mean.transpose() - W * u_mean.transpose();
  return LinearModel(std::move(W), std::move(b));
}

namespace {

// Standardized view of the LASSO problem: features scaled to unit population
// variance (constant columns dropped from the active set), targets centered.
struct LassoWorkspace {
  Eigen::MatrixXd z;        // N x n standardized inputs
  Eigen::RowVectorXd mean;  // feature means
  Eigen::RowVectorXd scale; // feature stds (1 where clamped)
  std::vector<Eigen::Index> active;  // columns with nonzero variance
};

LassoWorkspace standardize_features(const Eigen::MatrixXd& inputs) {
  LassoWorkspace w;
  const auto n = static_cast<double>(inputs.rows());
  w.mean = inputs.colwise().mean();
  Eigen::MatrixXd centered = inputs.rowwise() - w.mean;
  w.scale = (centered.array().square().colwise().sum() / n).sqrt();
  for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
    if (w.scale(j) > 1e-12) {
      w.active.push_back(j);
    } else {
      w.scale(j) = 1.0;  // constant column: keep weight at zero
    }
  }
  w.z = centered.array().rowwise() / w.scale.array();
  return w;
}

double lasso_objective(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& w, double lambda) {
  const auto n = static_cast<double>(z.rows());
  return (y - z * w).squaredNorm() / (2.0 * n) + lambda * w.lpNorm<1>();
}

double soft_threshold(double c, double lambda) {
  if (c > lambda) return c - lambda;
  if (c < -lambda) return c + lambda;
  return 0.0;
}

}  // namespace

LassoResult fit_lasso(const Dataset& train, const LassoParams& params) {
  require_trainable(train);
  if (!(params.lambda >= 0.0)) throw ConfigError("lasso lambda must be nonnegative");
  if (params.max_iter < 1) throw ConfigError("lasso max_iter must be >= 1");
  if (!(params.tol > 0.0)) throw ConfigError("lasso tol must be positive");

  const Eigen::Index n_rows = train.size();
  const Eigen::Index n_feat = train.input_dim();
  const Eigen::Index n_out = train.output_dim();
  const auto n = static_cast<double>(n_rows);

  LassoWorkspace ws = standardize_features(train.inputs());
  const Eigen::RowVectorXd y_mean = train.outputs().colwise().mean();
  Eigen::MatrixXd Y = train.outputs().rowwise() - y_mean;

  // Standardized columns have unit variance, so the coordinate update is
  // w_j <- S((1/N) z_j . r + w_j, lambda) with no denominator.
  Eigen::MatrixXd W_std = Eigen::MatrixXd::Zero(n_out, n_feat);
  LassoResult result{LinearModel(Eigen::MatrixXd::Zero(n_out, n_feat),
                                 Eigen::VectorXd::Zero(n_out)),
                     true, 0, {}};
  result.objective_trace.resize(static_cast<std::size_t>(n_out));

  for (Eigen::Index d = 0; d < n_out; ++d) {
    Eigen::VectorXd y = Y.col(d);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n_feat);
    Eigen::VectorXd residual = y;
    auto& trace = result.objective_trace[static_cast<std::size_t>(d)];
    trace.push_back(lasso_objective(ws.z, y, w, params.lambda));

    int sweep = 0;
    bool converged = false;
    for (; sweep < params.max_iter; ++sweep) {
      double max_change = 0.0;
      for (Eigen::Index j : ws.active) {
        const double old = w(j);
        const double c = ws.z.col(j).dot(residual) / n + old;
        const double updated = soft_threshold(c, params.lambda);
        if (updated != old) {
          residual += ws.z.col(j) * (old - updated);
          w(j) = updated;
          max_change = std::max(max_change, std::abs(updated - old));
        }
      }
      trace.push_back(lasso_objective(ws.z, y, w, params.lambda));
      if (max_change < params.tol) {
        converged = true;
        ++sweep;
        break;
      }
    }
    if (!converged) {
      result.converged = false;
      log::warn("lasso: output " + std::to_string(d) + " did not converge in " +
                std::to_string(params.max_iter) + " sweeps");
    }
    result.sweeps = std::max(result.sweeps, sweep);
    W_std.row(d) = w.transpose();
  }

  // Back to the raw feature scale: w_raw = w_std / sigma, b = y_mean - W mu.
  Eigen::MatrixXd W_raw =
      W_std.array().rowwise() / ws.scale.array();
  Eigen::VectorXd b = y_mean.transpose() - W_raw * ws.mean.transpose();
  result.model = LinearModel(std::move(W_raw), std::move(b));
  return result;
}

double lasso_lambda_max(const Dataset& train) {
  require_trainable(train);
  LassoWorkspace ws = standardize_features(train.inputs());
  Eigen::MatrixXd Y =
      train.outputs().rowwise() - train.outputs().colwise().mean();
  double lambda_max = 0.0;
  for (Eigen::Index j : ws.active) {
    for (Eigen::Index d = 0; d < Y.cols(); ++d) {
      lambda_max = std::max(
          lambda_max, std::abs(ws.z.col(j).dot(Y.col(d))) /
                          static_cast<double>(train.size()));
    }
  }
  return lambda_max;
}

}  // namespace ckm
