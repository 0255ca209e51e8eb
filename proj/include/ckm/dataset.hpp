#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ckm {

// One actuation-command / position pair.
struct Sample {
  Eigen::VectorXd u;  // actuation commands
  Eigen::VectorXd x;  // end-effector coordinates
};

// Column-labeled collection of command/position samples, one row per sample.
// Immutable after construction; construction rejects non-finite entries and
// dimension/name mismatches. Empty datasets (zero rows) are representable so
// that optional bundle parts can exist; operations that need data check for
// themselves.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Eigen::MatrixXd inputs, Eigen::MatrixXd outputs,
          std::vector<std::string> input_names,
          std::vector<std::string> output_names);

  Eigen::Index size() const { return inputs_.rows(); }
  Eigen::Index input_dim() const { return inputs_.cols(); }
  Eigen::Index output_dim() const { return outputs_.cols(); }
  bool empty() const { return size() == 0; }

  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::MatrixXd& outputs() const { return outputs_; }
  const std::vector<std::string>& input_names() const { return input_names_; }
  const std::vector<std::string>& output_names() const { return output_names_; }

  Sample sample(Eigen::Index i) const;

  // New dataset holding the given rows, in the given order.
  Dataset select(const std::vector<Eigen::Index>& rows) const;

 private:
  Eigen::MatrixXd inputs_;   // N x n
  Eigen::MatrixXd outputs_;  // N x 3m
  std::vector<std::string> input_names_;
  std::vector<std::string> output_names_;
};

// Train / calibration / test / extrapolation partition. All parts share
// column names and dimensions; any part but train may be empty.
struct SplitBundle {
  Dataset train;
  Dataset calibration;
  Dataset test;
  Dataset extrapolation;
};

struct SplitFractions {
  double train = 1.0;
  double calibration = 0.0;
  double test = 0.0;
  double extrapolation = 0.0;
};

// Disjoint partition of d covering every sample. Part sizes are
// floor(N*fraction) with the remainder assigned to train. Deterministic
// under a fixed seed; with shuffled=false the partition follows file order.
SplitBundle split(const Dataset& d, const SplitFractions& fractions,
                  std::uint64_t seed, bool shuffled = true);

// Per-column affine map of dataset inputs to zero mean, unit variance.
// Standard deviations below the floor are clamped (constant columns map
// to zero instead of blowing up); clamped column indices are recorded.
class Standardizer {
 public:
  static constexpr double kStdFloor = 1e-12;

  Standardizer() = default;
  Standardizer(Eigen::VectorXd mean, Eigen::VectorXd stddev);

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& stddev() const { return std_; }
  const std::vector<Eigen::Index>& clamped_columns() const { return clamped_; }
  Eigen::Index dim() const { return mean_.size(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& inputs) const;
  Dataset apply(const Dataset& d) const;

  Eigen::VectorXd invert(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& z) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd std_;
  std::vector<Eigen::Index> clamped_;
  friend Standardizer fit_standardizer(const Dataset& d);
};

// Fits mean/std on the dataset's inputs (population std). Requires N >= 2.
Standardizer fit_standardizer(const Dataset& d);

// Empirical CDF of the values at the query point: |{v <= query}| / |values|.
double ecdf(const Eigen::Ref<const Eigen::VectorXd>& values, double query);

// Two-sample Kolmogorov-Smirnov statistic: the largest gap between the two
// empirical CDFs. Used as the train-vs-extrapolation drift diagnostic.
double ks_statistic(const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b);

// CSV I/O. Format: RFC-4180 style, UTF-8, '.' decimal, header row required.
// The first n_inputs columns are actuation commands, the rest positions.
// Parse failures name the offending row and column.
Dataset load_csv(const std::filesystem::path& path, Eigen::Index n_inputs);
void save_csv(const Dataset& d, const std::filesystem::path& path);

// Bundle persistence: four CSVs plus manifest.json recording seed, fractions
// (when the bundle came from split()), column names and per-part files.
struct BundleManifest {
  std::uint64_t seed = 0;
  std::optional<SplitFractions> fractions;
  nlohmann::json extra;  // e.g. generator settings
};

void save_bundle(const SplitBundle& bundle, const std::filesystem::path& dir,
                 const BundleManifest& manifest);
SplitBundle load_bundle(const std::filesystem::path& dir);

}  // namespace ckm
