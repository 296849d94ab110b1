// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <numbers>

// Internal units: angular frequency in rad/fs, time in fs, length in um.
namespace qoct::units {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Vacuum speed of light in um/fs.
inline constexpr double kSpeedOfLight = 0.299792458;

inline constexpr double nm_to_um(double nm) { return nm * 1e-3; }
inline constexpr double um_to_nm(double um) { return um * 1e3; }
inline constexpr double um_to_mm(double um) { return um * 1e-3; }
inline constexpr double ghz_to_per_fs(double ghz) { return ghz * 1e-6; }

/// Angular frequency (rad/fs) of vacuum wavelength `lambda_nm`.
inline constexpr double angular_frequency(double lambda_nm) {
  return kTwoPi * kSpeedOfLight / nm_to_um(lambda_nm);
}

/// Vacuum wavelength (nm) of angular frequency `omega` (rad/fs).
inline constexpr double wavelength_nm(double omega) {
  return um_to_nm(kTwoPi * kSpeedOfLight / omega);
}

/// Half-width in rad/fs of a band of full width `delta_lambda_nm` centred at
/// `lambda_nm`, to first order in delta_lambda / lambda.
inline constexpr double band_halfwidth_omega(double lambda_nm, double delta_lambda_nm) {
  const double l = nm_to_um(lambda_nm);
  return kPi * kSpeedOfLight * nm_to_um(delta_lambda_nm) / (l * l);
}

/// Single-trip optical path (um) of a round-trip delay `t_fs`.
inline constexpr double delay_to_single_trip_um(double t_fs) { return 0.5 * kSpeedOfLight * t_fs; }

/// Round-trip delay (fs) of a single-trip optical path `z_um`.
inline constexpr double single_trip_um_to_delay(double z_um) { return 2.0 * z_um / kSpeedOfLight; }

}  // namespace qoct::units
