// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace qoct {

using Complex = std::complex<double>;

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

/// Uniform, zero-centred detuning grid around the signal/idler centre
/// frequencies. Sample k sits at (k - n/2) * delta_omega, so index n/2 is
/// exactly zero detuning.
class FrequencyGrid {
 public:
  static constexpr std::size_t kMinPoints = 64;

  /// Throws ConfigError unless n_points is a power of two >= kMinPoints and
  /// delta_omega > 0.
  FrequencyGrid(std::size_t n_points, double delta_omega, double center_signal,
                double center_idler);

  std::size_t size() const noexcept { return samples_.size(); }
  double delta_omega() const noexcept { return delta_omega_; }
  double center_signal() const noexcept { return center_signal_; }
  double center_idler() const noexcept { return center_idler_; }
  const std::vector<double>& samples() const noexcept { return samples_; }
  double operator[](std::size_t k) const noexcept { return samples_[k]; }
  double min() const noexcept { return samples_.front(); }
  double max() const noexcept { return samples_.back(); }

  bool operator==(const FrequencyGrid& other) const = default;

 private:
  double delta_omega_;
  double center_signal_;
  double center_idler_;
  std::vector<double> samples_;
};

/// Delay axis conjugate to a FrequencyGrid: dt = 2 pi / (n * delta_omega),
/// zero-centred the same way as the grid.
class TimeAxis {
 public:
  explicit TimeAxis(const FrequencyGrid& grid);
  TimeAxis(std::size_t n_points, double delta_t);

  std::size_t size() const noexcept { return samples_.size(); }
  double delta_t() const noexcept { return delta_t_; }
  const std::vector<double>& samples() const noexcept { return samples_; }
  double operator[](std::size_t k) const noexcept { return samples_[k]; }

 private:
  double delta_t_;
  std::vector<double> samples_;
};

struct ComplexSpectrum {
  FrequencyGrid grid;
  std::vector<Complex> values;

  ComplexSpectrum(FrequencyGrid g, std::vector<Complex> v);
  explicit ComplexSpectrum(FrequencyGrid g);
};

struct TimeSignal {
  TimeAxis axis;
  std::vector<Complex> values;
};

// Centred, unitary transform pair on zero-centred axes:
//   X(t_m) = N^-1/2 sum_k x(dw_k) exp(-i dw_k t_m)
//   x(dw_k) = N^-1/2 sum_m X(t_m) exp(+i dw_k t_m)
// Both require a power-of-two length (ConfigError otherwise).
std::vector<Complex> centered_fft(std::span<const Complex> input);
std::vector<Complex> centered_ifft(std::span<const Complex> input);

TimeSignal forward_fft(const ComplexSpectrum& spectrum);
ComplexSpectrum inverse_fft(const TimeSignal& signal, const FrequencyGrid& grid);

// Plain (uncentred, index-0-origin) unitary DFT of any length.
std::vector<Complex> dft(std::span<const Complex> input);
std::vector<Complex> idft(std::span<const Complex> input);

/// Analytic signal via the one-sided spectrum: negative-frequency bins
/// zeroed, positive bins doubled, DC and Nyquist kept. Even length only.
std::vector<Complex> hilbert_analytic(std::span<const double> real_sequence);

/// Full width at half maximum around the unique global maximum, with the
/// half-maximum crossings located by linear interpolation. Throws
/// AnalysisError(NoMeasurableWidth) for ties, boundary maxima, or missing
/// crossings.
double fwhm(std::span<const double> samples, std::span<const double> axis);

/// Width at half of samples[peak_index], searching outward from the peak.
/// Returns nullopt when either crossing is missing.
std::optional<double> fwhm_at(std::span<const double> samples, std::span<const double> axis,
                              std::size_t peak_index);

struct Peak {
  double position;
  double height;
  double prominence;
  std::optional<double> fwhm;
  std::size_t index;
};

/// Local maxima with topographic prominence >= min_prominence whose
/// position lies outside |axis| <= exclusion_halfwidth (no window when the
/// half-width is zero). Positions/heights refined by a 3-point parabola;
/// results sorted by position.
std::vector<Peak> find_peaks(std::span<const double> samples, std::span<const double> axis,
                             double min_prominence, double exclusion_halfwidth);

}  // namespace qoct
