// SPDX-License-Identifier: Apache-2.0
#include "qoct/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qoct/errors.hpp"
#include "qoct/kernels.hpp"
#include "qoct/units.hpp"

namespace qoct {

namespace {

constexpr double kSpeedOfLightNmPerFs = 299.792458;

bool flat_source(const PdcSourceSpec& s) {
  return s.envelope == Envelope::SincFromMismatch && s.mismatch_b1 == 0.0 && s.mismatch_b2 == 0.0 &&
         s.mismatch_b3 == 0.0;
}

// Half-span (rad/fs) of detuning needed to hold the source without
// tripping the truncation checks in jsa().
double source_halfspan(const PdcSourceSpec& source) {
  if (flat_source(source)) return 0.0;
  if (source.envelope == Envelope::IdealRectangle) return 3.1 * support_halfwidth(source);
  return 1.05 * support_halfwidth(source, 0.02);
}

FrequencyGrid sized_grid(const PdcSourceSpec& source, double halfspan, double target_step) {
  const auto n = std::max<std::size_t>(
      FrequencyGrid::kMinPoints,
      next_power_of_two(static_cast<std::size_t>(std::ceil(2.0 * halfspan / target_step)) + 1));
  if (n > (std::size_t{1} << 24)) {
    throw PhysicsError("simulation grid would need more than 2^24 points");
  }
  const double step = std::min(target_step, 2.0 * halfspan / static_cast<double>(n - 2));
  return make_source_grid(source, n, step);
}

}  // namespace

void SpectrometerConfig::validate() const {
  if (n_pixels < 2) throw ConfigError("spectrometer.n_pixels must be >= 2");
  if (!(resolution_ghz > 0.0)) throw ConfigError("spectrometer.resolution_ghz must be > 0");
  if (!(center_lambda_nm > 0.0)) throw ConfigError("spectrometer.center_lambda_nm must be > 0");
  if (!(exposure_s > 0.0)) throw ConfigError("spectrometer.exposure_s must be > 0");
  if (!(counts_scale >= 0.0)) throw ConfigError("spectrometer.counts_scale must be >= 0");
  if (pixel_width_nm() * static_cast<double>(n_pixels) >= 2.0 * center_lambda_nm) {
    throw ConfigError("spectrometer range reaches non-positive wavelengths");
  }
}

double SpectrometerConfig::pixel_width_nm() const {
  // delta_lambda = lambda^2 delta_nu / c with delta_nu in 1/fs.
  return center_lambda_nm * center_lambda_nm * units::ghz_to_per_fs(resolution_ghz) /
         kSpeedOfLightNmPerFs;
}

std::vector<double> SpectrometerConfig::wavelength_axis_nm() const {
  const double w = pixel_width_nm();
  const double mid = 0.5 * static_cast<double>(n_pixels - 1);
  std::vector<double> out(n_pixels);
  for (std::size_t k = 0; k < n_pixels; ++k) {
    out[k] = center_lambda_nm + (static_cast<double>(k) - mid) * w;
  }
  return out;
}

void StageScanConfig::validate() const {
  if (!(step_um > 0.0)) throw ConfigError("stage.step_um must be > 0");
  if (n_steps < 2) throw ConfigError("stage.n_steps must be >= 2");
  if (!(dwell_s > 0.0)) throw ConfigError("stage.dwell_s must be > 0");
  if (!(counts_scale >= 0.0)) throw ConfigError("stage.counts_scale must be >= 0");
  if (!std::isfinite(start_um)) throw ConfigError("stage.start_um must be finite");
}

std::vector<double> StageScanConfig::positions_um() const {
  std::vector<double> out(n_steps);
  for (std::size_t k = 0; k < n_steps; ++k) out[k] = start_um + static_cast<double>(k) * step_um;
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(seed) ^ index);
}

double PoissonSampler::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t PoissonSampler::operator()(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw PhysicsError("Poisson mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  return mean < 12.0 ? small_mean(mean) : ptrs(mean);
}

std::uint64_t PoissonSampler::small_mean(double mean) {
  const double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double prod = uniform();
  while (prod > limit) {
    ++k;
    prod *= uniform();
  }
  return k;
}

std::uint64_t PoissonSampler::ptrs(double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

PixelSpectrum acquire_spectrum(const RealSpectrum& s, const SpectrometerConfig& spec,
                               const NoiseConfig& noise) {
  spec.validate();
  if (s.values.size() != s.grid.size()) throw ConfigError("spectrum length does not match its grid");
  for (double v : s.values) {
    if (!(v >= 0.0)) throw PhysicsError("spectral interferogram has negative or non-finite values");
  }
  PixelSpectrum out;
  out.wavelength_nm = spec.wavelength_axis_nm();
  const double half = 0.5 * spec.pixel_width_nm();
  const double ws = s.grid.center_signal();
  std::vector<double> lo(spec.n_pixels);
  std::vector<double> hi(spec.n_pixels);
  for (std::size_t k = 0; k < spec.n_pixels; ++k) {
    // Longer wavelength edge is the lower frequency edge.
    lo[k] = units::angular_frequency(out.wavelength_nm[k] + half) - ws;
    hi[k] = units::angular_frequency(out.wavelength_nm[k] - half) - ws;
  }
  auto binned = kernels::bin_average_parallel(s.grid.samples(), s.values, lo, hi);
  const double scale = spec.counts_scale * spec.exposure_s;
  out.counts.resize(spec.n_pixels);
  if (!noise.enabled) {
    for (std::size_t k = 0; k < spec.n_pixels; ++k) out.counts[k] = scale * binned[k];
    return out;
  }
  PoissonSampler draw(noise.seed);
  for (std::size_t k = 0; k < spec.n_pixels; ++k) {
    out.counts[k] = static_cast<double>(draw(scale * binned[k]));
  }
  return out;
}

TdTrace acquire_td_trace(const InterferometerConfig& cfg, const PdcSourceSpec& source,
                         const SampleModel& sample, const FrequencyGrid& grid,
                         const StageScanConfig& scan, const NoiseConfig& noise) {
  scan.validate();
  TdTrace out;
  out.position_um = scan.positions_um();
  out.undersampled = scan.step_um > units::nm_to_um(source.lambda_idler_nm) / 4.0;
  std::vector<double> taus(scan.n_steps);
  for (std::size_t k = 0; k < scan.n_steps; ++k) {
    taus[k] = cfg.reference_delay_tau + units::single_trip_um_to_delay(out.position_um[k]);
  }
  const auto rate = temporal_count_rate(cfg, source, sample, grid, taus);
  const double scale = scan.counts_scale * scan.dwell_s;
  out.counts.resize(scan.n_steps);
  if (!noise.enabled) {
    for (std::size_t k = 0; k < scan.n_steps; ++k) out.counts[k] = scale * std::max(0.0, rate[k]);
    return out;
  }
  PoissonSampler draw(noise.seed);
  for (std::size_t k = 0; k < scan.n_steps; ++k) {
    out.counts[k] = static_cast<double>(draw(scale * std::max(0.0, rate[k])));
  }
  return out;
}

double pump_power_to_gain(double power_mw, double calibration_k) {
  if (!(power_mw >= 0.0)) throw ConfigError("pump power must be >= 0");
  if (!(calibration_k >= 0.0)) throw ConfigError("pump calibration constant must be >= 0");
  return calibration_k * std::sqrt(power_mw);
}

FrequencyGrid fd_simulation_grid(const PdcSourceSpec& source, const SpectrometerConfig& spec) {
  source.validate();
  spec.validate();
  const double ws = units::angular_frequency(source.lambda_signal_nm);
  const auto axis = spec.wavelength_axis_nm();
  const double half = 0.5 * spec.pixel_width_nm();
  const double w_lo = units::angular_frequency(axis.back() + half) - ws;
  const double w_hi = units::angular_frequency(axis.front() - half) - ws;
  const double pixel_halfspan = 1.05 * std::max(std::abs(w_lo), std::abs(w_hi));
  // Narrowest pixel sits at the long-wavelength end.
  const double narrowest = units::angular_frequency(axis.back() - half) -
                           units::angular_frequency(axis.back() + half);
  const double halfspan = std::max(pixel_halfspan, source_halfspan(source));
  return sized_grid(source, halfspan, narrowest / 8.0);
}

FrequencyGrid td_simulation_grid(const InterferometerConfig& cfg, const PdcSourceSpec& source,
                                 const SampleModel& sample, const StageScanConfig& scan) {
  source.validate();
  sample.validate();
  scan.validate();
  if (flat_source(source)) {
    throw PhysicsError("a flat (zero-mismatch) spectrum has no finite coherence length to scan");
  }
  const auto positions = scan.positions_um();
  double extent = 0.0;
  for (double x : {positions.front(), positions.back()}) {
    const double tau = cfg.reference_delay_tau + units::single_trip_um_to_delay(x);
    for (const auto& layer : sample.layers) {
      extent = std::max(extent, std::abs(tau + units::single_trip_um_to_delay(layer.opd_um)));
    }
  }
  const double halfspan = 2.0 * source_halfspan(source);
  const double step = extent > 0.0 ? units::kTwoPi / (4.0 * extent) : halfspan / 64.0;
  return sized_grid(source, halfspan, step);
}

}  // namespace qoct
