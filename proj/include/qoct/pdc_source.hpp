// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

#include "qoct/spectral.hpp"

namespace qoct {

enum class Envelope { SincFromMismatch, IdealRectangle };

std::string to_string(Envelope e);
Envelope envelope_from_string(const std::string& s);

/// Single PDC process with a cw pump. Phase mismatch is a cubic polynomial
/// in detuning: dbeta(dw) = b1 dw + b2 dw^2 + b3 dw^3 (1/mm).
struct PdcSourceSpec {
  double crystal_length_mm = 40.0;
  double mismatch_b1 = 0.0;  // fs/mm
  double mismatch_b2 = 0.0;  // fs^2/mm
  double mismatch_b3 = 0.0;  // fs^3/mm
  Envelope envelope = Envelope::IdealRectangle;
  double rect_bandwidth_nm = 14.2;
  double lambda_signal_nm = 832.0;
  double lambda_idler_nm = 1360.0;
  double lambda_pump_nm = 0.0;  // derived from energy conservation when zero

  /// Throws ConfigError on a non-positive length, missing rectangle
  /// bandwidth, or a pump wavelength off energy conservation by > 0.1 %.
  void validate() const;

  /// Pump wavelength implied by 1/lp = 1/ls + 1/li.
  double energy_conserving_pump_nm() const;

  double phase_mismatch(double detuning) const;

  bool operator==(const PdcSourceSpec&) const = default;
};

struct Benchmarks {
  double axial_resolution_um;
  double coherence_length_um;
  double shape_factor;
  double scan_range_mm;
};

/// Grid centred on the source's signal and idler frequencies.
FrequencyGrid make_source_grid(const PdcSourceSpec& spec, std::size_t n_points, double delta_omega);

/// Normalised joint spectral amplitude, max |f| = 1. SincFromMismatch:
/// sinc(dbeta L / 2) exp(i dbeta L / 2). IdealRectangle: 1 inside the band,
/// 0 outside. Throws PhysicsError when the grid truncates the spectrum.
ComplexSpectrum jsa(const PdcSourceSpec& spec, const FrequencyGrid& grid);

/// (f/2) lambda0^2 / delta_lambda, in um.
double axial_resolution(double lambda0_nm, double delta_lambda_nm, double shape_factor);

/// (1/4) (lambda0^2 / delta_lambda) N, in mm.
double fd_scan_range(double lambda0_nm, double delta_lambda_nm, std::size_t n_pixels);

/// Tabulated shape factor for the rectangular envelope (1.2); computed
/// numerically for every other envelope.
double shape_factor_for_envelope(const PdcSourceSpec& spec);

struct ShapeFactorMeasurement {
  double shape_factor;
  double spectral_fwhm_nm;     // FWHM of |f|^2 in wavelength
  double coherence_fwhm_um;    // FWHM of |FT(|f|^2)| on the single-trip axis
};

/// Synthesises |f|^2 on a fine grid, transforms it, and inverts
/// dz = (f/2) lambda0^2 / delta_lambda from the two measured widths.
ShapeFactorMeasurement shape_factor_numeric(const PdcSourceSpec& spec);

/// Spectral FWHM of |f|^2 in nm (exact band width for the rectangle).
double spectral_fwhm_nm(const PdcSourceSpec& spec);

/// Half-width (rad/fs) outside of which |f| stays below `level`. Used to
/// size simulation grids.
double support_halfwidth(const PdcSourceSpec& spec, double level = 0.01);

}  // namespace qoct
