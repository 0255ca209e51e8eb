#pragma once

#include <stdexcept>
#include <string>

namespace ckm {

// Invalid run configuration (bad file, bad value, missing spec).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or missing data (CSV parse failures, bad splits, dimension
// mismatches in stored artifacts).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model fitting or calibration failure.
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ckm
