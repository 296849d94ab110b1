// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include "qoct/detection.hpp"
#include "qoct/interferometer.hpp"
#include "qoct/pdc_source.hpp"
#include "qoct/sample.hpp"

namespace qoct {

/// Pump given as total power and split instead of explicit gains.
struct PumpConfig {
  double total_power_mw = 5.0;
  double gain_ratio = 1.0;       // g1^2 / g2^2
  double calibration_k = 0.02;   // gain per sqrt(mW)

  void validate() const;
  bool operator==(const PumpConfig&) const = default;
};

/// Explicit simulation grid; sized automatically when absent.
struct GridConfig {
  std::size_t n_points = 4096;
  double delta_omega = 1e-5;  // rad/fs

  bool operator==(const GridConfig&) const = default;
};

struct RunConfig {
  PdcSourceSpec source;
  SampleModel sample;
  InterferometerConfig interferometer;  // gains resolved from `pump` when present
  std::optional<PumpConfig> pump;
  std::optional<SpectrometerConfig> spectrometer;
  std::optional<StageScanConfig> stage;
  NoiseConfig noise;
  std::optional<GridConfig> grid;
  std::string output_dir = "out";

  /// Every section's own invariants plus the geometry/field rules.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError naming the offending field path, e.g.
/// "sample.layers[1].opd_um: expected a number".
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Pretty-printed JSON; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Gains g1, g2 splitting the pump power at the requested ratio.
std::pair<double, double> pump_gains(const PumpConfig& pump);

}  // namespace qoct
