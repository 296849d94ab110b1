// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "qoct/interferometer.hpp"
#include "qoct/pdc_source.hpp"
#include "qoct/sample.hpp"
#include "qoct/spectral.hpp"

namespace qoct {

/// Grating spectrometer with wavelength-uniform pixels. Each pixel is one
/// resolution element wide: delta_lambda = lambda_c^2 * resolution / c.
struct SpectrometerConfig {
  std::size_t n_pixels = 670;
  double resolution_ghz = 30.0;
  double center_lambda_nm = 832.0;
  double exposure_s = 1.0;
  double counts_scale = 1e4;  // expected counts per unit S per second

  void validate() const;
  double pixel_width_nm() const;
  /// Pixel centres, increasing.
  std::vector<double> wavelength_axis_nm() const;

  bool operator==(const SpectrometerConfig&) const = default;
};

/// Motorised idler-mirror stage. Position x (um) adds a delay 2x/c.
struct StageScanConfig {
  double start_um = 0.0;
  double step_um = 0.2;
  std::size_t n_steps = 10000;
  double dwell_s = 0.05;
  double counts_scale = 1e9;

  void validate() const;
  std::vector<double> positions_um() const;

  bool operator==(const StageScanConfig&) const = default;
};

struct NoiseConfig {
  bool enabled = false;
  std::uint64_t seed = 0;

  bool operator==(const NoiseConfig&) const = default;
};

/// Independent 64-bit seed for task `index` of a run seeded with `seed`
/// (SplitMix64 finaliser over the pair).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Poisson variates from a MT19937-64 stream. Inversion by multiplication
/// below mean 12, Hormann's PTRS transformed rejection above. Both the
/// engine and the samplers are fully specified here, so a seed gives the
/// same numbers on every platform.
class PoissonSampler {
 public:
  explicit PoissonSampler(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1), 53-bit resolution
  std::uint64_t operator()(double mean);

 private:
  std::uint64_t small_mean(double mean);
  std::uint64_t ptrs(double mean);

  std::mt19937_64 engine_;
};

struct PixelSpectrum {
  std::vector<double> wavelength_nm;
  std::vector<double> counts;
};

/// Bin-averages S over every pixel (in angular frequency), scales by
/// counts_scale * exposure_s and draws Poisson counts when noise is enabled.
/// Throws PhysicsError for negative S or pixels outside the grid.
PixelSpectrum acquire_spectrum(const RealSpectrum& s, const SpectrometerConfig& spec,
                               const NoiseConfig& noise);

struct TdTrace {
  std::vector<double> position_um;
  std::vector<double> counts;
  bool undersampled = false;  // step > lambda_idler / 4
};

/// Counts at every stage position, tau(x) = reference_delay_tau + 2x/c.
TdTrace acquire_td_trace(const InterferometerConfig& cfg, const PdcSourceSpec& source,
                         const SampleModel& sample, const FrequencyGrid& grid,
                         const StageScanConfig& scan, const NoiseConfig& noise);

/// Fixed-total-power pump split: g = k sqrt(P).
double pump_power_to_gain(double power_mw, double calibration_k);

/// Grid fine enough to resolve one pixel (8 samples per pixel) and wide
/// enough to hold both the source and every pixel.
FrequencyGrid fd_simulation_grid(const PdcSourceSpec& source, const SpectrometerConfig& spec);

/// Grid whose delay period 2 pi / delta_omega is at least four times the
/// largest delay seen during the scan, so no packet aliases into view.
FrequencyGrid td_simulation_grid(const InterferometerConfig& cfg, const PdcSourceSpec& source,
                                 const SampleModel& sample, const StageScanConfig& scan);

}  // namespace qoct
