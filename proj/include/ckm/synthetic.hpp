#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>

#include "ckm/dataset.hpp"

namespace ckm {

struct CommandRange {
  double lo = 0.0;
  double hi = 1.0;
};

// Synthetic two-command soft-finger task: commands drive a single
// constant-curvature segment, optionally with additive Gaussian noise on the
// tip coordinates. Each split role draws its commands from its own ranges,
// which is how train-vs-extrapolation drift is produced.
struct SynthConfig {
  double segment_length = 1.0;
  double curvature_gain = 1.0;
  double plane_gain = 1.0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  struct Role {
    Eigen::Index count = 0;
    std::array<CommandRange, 2> ranges{CommandRange{0.0, 1.0},
                                       CommandRange{0.0, 1.0}};
  };
  Role train;
  Role calibration;
  Role test;
  Role extrapolation;

  // Throws ConfigError on invalid sizes, ranges or noise, including a
  // non-drifting extrapolation range when extrapolation samples are requested.
  void validate() const;
};

// Tip position of a single constant-curvature segment of length L.
// Bend angle phi = curvature_gain*u1*L, bend-plane angle psi = plane_gain*u2,
// bend radius r = L/phi:
//   x = (r*(1-cos phi)*cos psi, r*(1-cos phi)*sin psi, r*sin phi)
// Below |phi| = 1e-8 the r*phi series expansion is used, so the straight
// configuration maps to (0, 0, L) exactly.
Eigen::Vector3d constant_curvature_tip(double u1, double u2,
                                       double segment_length,
                                       double curvature_gain,
                                       double plane_gain);

// Deterministic under cfg.seed; commands uniform over each role's ranges.
SplitBundle generate_synthetic(const SynthConfig& cfg);

}  // namespace ckm
