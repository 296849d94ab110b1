// SPDX-License-Identifier: Apache-2.0
#include "qoct/pdc_source.hpp"

#include <algorithm>
#include <cmath>

#include "qoct/errors.hpp"
#include "qoct/units.hpp"

namespace qoct {

namespace {

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

bool has_mismatch(const PdcSourceSpec& s) {
  return s.mismatch_b1 != 0.0 || s.mismatch_b2 != 0.0 || s.mismatch_b3 != 0.0;
}

struct Synthesis {
  FrequencyGrid grid;
  std::vector<double> intensity;
};

// |f|^2 on a grid wide and fine enough that both its spectral FWHM and the
// FWHM of its transform span many samples.
Synthesis synthesise_intensity(const PdcSourceSpec& spec) {
  const double half = support_halfwidth(spec);
  const double span = spec.envelope == Envelope::IdealRectangle ? 64.0 * half : 4.0 * half;
  constexpr std::size_t n = 1u << 16;
  FrequencyGrid grid = make_source_grid(spec, n, span / static_cast<double>(n));
  const auto f = jsa(spec, grid);
  std::vector<double> intensity(n);
  for (std::size_t k = 0; k < n; ++k) intensity[k] = std::norm(f.values[k]);
  return {std::move(grid), std::move(intensity)};
}

double omega_width_to_nm(const PdcSourceSpec& spec, double width_omega) {
  const double l = units::nm_to_um(spec.lambda_signal_nm);
  return units::um_to_nm(l * l * width_omega / (units::kTwoPi * units::kSpeedOfLight));
}

}  // namespace

std::string to_string(Envelope e) {
  return e == Envelope::IdealRectangle ? "IdealRectangle" : "SincFromMismatch";
}

Envelope envelope_from_string(const std::string& s) {
  if (s == "IdealRectangle") return Envelope::IdealRectangle;
  if (s == "SincFromMismatch") return Envelope::SincFromMismatch;
  throw ConfigError("unknown envelope '" + s + "' (expected IdealRectangle or SincFromMismatch)");
}

double PdcSourceSpec::energy_conserving_pump_nm() const {
  return 1.0 / (1.0 / lambda_signal_nm + 1.0 / lambda_idler_nm);
}

void PdcSourceSpec::validate() const {
  if (!(crystal_length_mm > 0.0)) throw ConfigError("crystal_length_mm must be > 0");
  if (!(lambda_signal_nm > 0.0) || !(lambda_idler_nm > 0.0)) {
    throw ConfigError("signal and idler wavelengths must be > 0");
  }
  if (envelope == Envelope::IdealRectangle && !(rect_bandwidth_nm > 0.0)) {
    throw ConfigError("rect_bandwidth_nm must be > 0 for the IdealRectangle envelope");
  }
  if (lambda_pump_nm != 0.0) {
    const double expected = energy_conserving_pump_nm();
    if (std::abs(lambda_pump_nm - expected) > 1e-3 * expected) {
      throw ConfigError("lambda_pump_nm violates energy conservation (expected " +
                        std::to_string(expected) + " nm)");
    }
  }
}

double PdcSourceSpec::phase_mismatch(double dw) const {
  return ((mismatch_b3 * dw + mismatch_b2) * dw + mismatch_b1) * dw;
}

FrequencyGrid make_source_grid(const PdcSourceSpec& spec, std::size_t n_points, double delta_omega) {
  return FrequencyGrid(n_points, delta_omega, units::angular_frequency(spec.lambda_signal_nm),
                       units::angular_frequency(spec.lambda_idler_nm));
}

double support_halfwidth(const PdcSourceSpec& spec, double level) {
  if (spec.envelope == Envelope::IdealRectangle) {
    return units::band_halfwidth_omega(spec.lambda_signal_nm, spec.rect_bandwidth_nm);
  }
  if (!has_mismatch(spec)) {
    throw PhysicsError("zero phase mismatch gives an unbounded sinc spectrum");
  }
  // |sinc(x)| <= 1/|x|, so the spectrum stays below `level` once
  // |dbeta L / 2| exceeds 1/level for good.
  const double target = 1.0 / level;
  auto reach = [&](double sign) {
    double d = 1e-6;
    while (d < 100.0) {
      if (std::abs(0.5 * spec.phase_mismatch(sign * d) * spec.crystal_length_mm) >= target) return d;
      d *= 1.005;
    }
    throw PhysicsError("phase mismatch too weak to bound the spectrum");
  };
  return std::max(reach(1.0), reach(-1.0));
}

ComplexSpectrum jsa(const PdcSourceSpec& spec, const FrequencyGrid& grid) {
  spec.validate();
  ComplexSpectrum out(grid);
  const auto n = grid.size();
  if (spec.envelope == Envelope::IdealRectangle) {
    const double half = units::band_halfwidth_omega(spec.lambda_signal_nm, spec.rect_bandwidth_nm);
    if (grid.max() - grid.min() < 6.0 * half) {
      throw PhysicsError("frequency grid spans less than 3x the source bandwidth");
    }
    for (std::size_t k = 0; k < n; ++k) out.values[k] = std::abs(grid[k]) <= half ? 1.0 : 0.0;
    return out;
  }

  double peak = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = 0.5 * spec.phase_mismatch(grid[k]) * spec.crystal_length_mm;
    out.values[k] = sinc(x) * std::polar(1.0, x);
    peak = std::max(peak, std::abs(out.values[k]));
  }
  for (auto& v : out.values) v /= peak;
  // A vanishing mismatch is the flat limit sinc(0) = 1; there is nothing to truncate.
  if (has_mismatch(spec)) {
    const double edge = std::max(std::abs(out.values.front()), std::abs(out.values.back()));
    if (edge > 0.05) {
      throw PhysicsError("frequency grid truncates the JSA (|f| at edge = " +
                         std::to_string(edge) + " of max)");
    }
  }
  return out;
}

double axial_resolution(double lambda0_nm, double delta_lambda_nm, double shape_factor) {
  return units::nm_to_um(0.5 * shape_factor * lambda0_nm * lambda0_nm / delta_lambda_nm);
}

double fd_scan_range(double lambda0_nm, double delta_lambda_nm, std::size_t n_pixels) {
  const double range_nm =
      0.25 * lambda0_nm * lambda0_nm / delta_lambda_nm * static_cast<double>(n_pixels);
  return units::um_to_mm(units::nm_to_um(range_nm));
}

double shape_factor_for_envelope(const PdcSourceSpec& spec) {
  if (spec.envelope == Envelope::IdealRectangle) return 1.2;
  return shape_factor_numeric(spec).shape_factor;
}

ShapeFactorMeasurement shape_factor_numeric(const PdcSourceSpec& spec) {
  const auto synth = synthesise_intensity(spec);
  const auto& grid = synth.grid;
  const std::size_t centre = grid.size() / 2;

  auto spectral_width = fwhm_at(synth.intensity, grid.samples(), centre);
  if (!spectral_width) {
    throw AnalysisError(AnalysisFailure::NoMeasurableWidth, "source spectrum has no measurable FWHM");
  }

  std::vector<Complex> x(synth.intensity.begin(), synth.intensity.end());
  const auto transformed = centered_fft(x);
  std::vector<double> amplitude(transformed.size());
  for (std::size_t m = 0; m < transformed.size(); ++m) amplitude[m] = std::abs(transformed[m]);
  const TimeAxis taxis(grid);
  auto time_width = fwhm_at(amplitude, taxis.samples(), centre);
  if (!time_width) {
    throw AnalysisError(AnalysisFailure::NoMeasurableWidth, "coherence function has no measurable FWHM");
  }

  ShapeFactorMeasurement m{};
  m.spectral_fwhm_nm = omega_width_to_nm(spec, *spectral_width);
  m.coherence_fwhm_um = units::delay_to_single_trip_um(*time_width);
  const double l = spec.lambda_signal_nm;
  m.shape_factor = 2.0 * units::um_to_nm(m.coherence_fwhm_um) * m.spectral_fwhm_nm / (l * l);
  return m;
}

double spectral_fwhm_nm(const PdcSourceSpec& spec) {
  if (spec.envelope == Envelope::IdealRectangle) return spec.rect_bandwidth_nm;
  return shape_factor_numeric(spec).spectral_fwhm_nm;
}

}  // namespace qoct
