#include "ckm/synthetic.hpp"

#include <cmath>
#include <random>
#include <string>

#include "ckm/errors.hpp"

namespace ckm {

namespace {

bool disjoint(const CommandRange& a, const CommandRange& b) {
  return a.hi < b.lo || b.hi < a.lo;
}

bool strictly_wider(const CommandRange& outer, const CommandRange& inner) {
  return outer.lo <= inner.lo && outer.hi >= inner.hi &&
         (outer.lo < inner.lo || outer.hi > inner.hi);
}

void check_role(const SynthConfig::Role& role, const std::string& name) {
  if (role.count < 0) throw ConfigError("synthetic " + name + " size is negative");
  for (const auto& r : role.ranges) {
    if (!(r.lo <= r.hi)) {
      throw ConfigError("synthetic " + name + " command range has lo > hi");
    }
  }
}

}  // namespace

void SynthConfig::validate() const {
  if (!(segment_length > 0.0)) throw ConfigError("segment_length must be positive");
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be nonnegative");
  check_role(train, "train");
  check_role(calibration, "calibration");
  check_role(test, "test");
  check_role(extrapolation, "extrapolation");
  if (train.count < 1) throw ConfigError("synthetic train size must be >= 1");
  if (extrapolation.count > 0) {
    bool drifts = false;
    for (std::size_t c = 0; c < 2; ++c) {
      if (disjoint(extrapolation.ranges[c], train.ranges[c]) ||
          strictly_wider(extrapolation.ranges[c], train.ranges[c])) {
        drifts = true;
      }
    }
    if (!drifts) {
      throw ConfigError(
          "extrapolation command ranges must be disjoint from or strictly "
          "wider than the training ranges");
    }
  }
}

Eigen::Vector3d constant_curvature_tip(double u1, double u2, double segment_length,
                                       double curvature_gain, double plane_gain) {
  const double phi = curvature_gain * u1 * segment_length;
  const double psi = plane_gain * u2;
  double radial;  // r*(1 - cos phi), via the stable 2*sin^2(phi/2) identity
  double height;  // r*sin phi
  if (std::abs(phi) < 1e-8) {
    radial = segment_length * phi / 2.0;
    height = segment_length * (1.0 - phi * phi / 6.0);
  } else {
    const double s = std::sin(phi / 2.0);
    radial = segment_length * 2.0 * s * s / phi;
    height = segment_length * std::sin(phi) / phi;
  }
  return {radial * std::cos(psi), radial * std::sin(psi), height};
}

namespace {

Dataset generate_role(const SynthConfig& cfg, const SynthConfig::Role& role,
                      std::uint32_t role_index) {
  // Separate command and noise streams so toggling noise_std leaves the
  // command draws untouched. seed_seq keeps only the low 32 bits of each
  // entry, so the seed is split.
  const auto lo = static_cast<std::uint32_t>(cfg.seed);
  const auto hi = static_cast<std::uint32_t>(cfg.seed >> 32);
  std::seed_seq command_seq{lo, hi, role_index, 0u};
  std::seed_seq noise_seq{lo, hi, role_index, 1u};
  std::mt19937_64 rng(command_seq);
  std::mt19937_64 noise_rng(noise_seq);
  std::normal_distribution<double> noise(0.0, cfg.noise_std > 0.0 ? cfg.noise_std : 1.0);

  Eigen::MatrixXd inputs(role.count, 2);
  Eigen::MatrixXd outputs(role.count, 3);
  for (Eigen::Index i = 0; i < role.count; ++i) {
    double u[2];
    for (std::size_t c = 0; c < 2; ++c) {
      const auto& range = role.ranges[c];
      if (range.lo == range.hi) {
        u[c] = range.lo;
      } else {
        u[c] = std::uniform_real_distribution<double>(range.lo, range.hi)(rng);
      }
    }
    inputs(i, 0) = u[0];
    inputs(i, 1) = u[1];
    Eigen::Vector3d tip = constant_curvature_tip(
        u[0], u[1], cfg.segment_length, cfg.curvature_gain, cfg.plane_gain);
    if (cfg.noise_std > 0.0) {
      for (int k = 0; k < 3; ++k) tip[k] += noise(noise_rng);
    }
    outputs.row(i) = tip.transpose();
  }
  return Dataset(std::move(inputs), std::move(outputs), {"u1", "u2"},
                 {"x", "y", "z"});
}

}  // namespace

SplitBundle generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  SplitBundle bundle;
  bundle.train = generate_role(cfg, cfg.train, 0);
  bundle.calibration = generate_role(cfg, cfg.calibration, 1);
  bundle.test = generate_role(cfg, cfg.test, 2);
  bundle.extrapolation = generate_role(cfg, cfg.extrapolation, 3);
  return bundle;
}

}  // namespace ckm
