// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qoct/kernels.hpp"
#include "qoct/pdc_source.hpp"
#include "qoct/sample.hpp"
#include "qoct/spectral.hpp"

namespace qoct {

enum class Geometry { SU11, IC };

std::string to_string(Geometry g);
Geometry geometry_from_string(const std::string& s);

/// Two cascaded low-gain PDC processes. SU11 uses t_signal; IC uses
/// t_signal_1 and t_signal_2 (fibre couplings of the two signal fields).
struct InterferometerConfig {
  static constexpr double kMaxGain = 0.3;

  Geometry geometry = Geometry::SU11;
  double gain_g1 = 0.1;
  double gain_g2 = 0.1;
  std::optional<double> t_signal;
  std::optional<double> t_signal_1;
  std::optional<double> t_signal_2;
  double t_idler = 1.0;
  double internal_phi2 = 0.0;  // fs^2
  double internal_phi3 = 0.0;  // fs^3
  double reference_delay_tau = 0.0;  // fs
  bool eq2_literal_mode = false;

  void validate() const;
  double gain_ratio() const { return gain_g1 * gain_g1 / (gain_g2 * gain_g2); }
  double total_gain_squared() const { return gain_g1 * gain_g1 + gain_g2 * gain_g2; }
  double internal_phase(double detuning) const {
    return (internal_phi3 * detuning + internal_phi2) * detuning * detuning;
  }

  bool operator==(const InterferometerConfig&) const = default;
};

struct RealSpectrum {
  FrequencyGrid grid;
  std::vector<double> values;
};

/// Amplitude weights of the two processes as seen at the detector.
struct PathWeights {
  double first;          // coherent first-process amplitude, idler loss included
  double second;         // second-process amplitude
  double first_signal;   // first-process signal power reaching the detector
  double denominator;    // first_signal + second^2
};

PathWeights path_weights(const InterferometerConfig& cfg);

/// Same total pump (g1^2 + g2^2) split to the requested g1^2/g2^2.
InterferometerConfig with_gain_ratio(const InterferometerConfig& cfg, double ratio);

/// f_int = first * f r exp(i[(w_i + dw) tau + phi_int]) + second * f.
/// The idler carrier w_i tau puts the temporal fringes at lambda_i / 2
/// of mirror travel.
ComplexSpectrum joint_amplitude_out(const InterferometerConfig& cfg, const PdcSourceSpec& source,
                                    const SampleModel& sample, const FrequencyGrid& grid);

/// Default: |f_int|^2 plus the incoherent first-process background
/// first_signal |f|^2 (1 - T_idler sum r^2) from signal photons whose idler
/// partner was lost. Literal mode: |f|^2 D [1 + V sum_j r_j^2 cos(...)] for
/// exactly two layers.
RealSpectrum spectral_interferogram(const InterferometerConfig& cfg, const PdcSourceSpec& source,
                                    const SampleModel& sample, const FrequencyGrid& grid);

/// Decomposition S(dw, tau) = a + 2 Re[b exp(i (carrier + dw) tau)], summed
/// with the grid spacing as quadrature weight.
kernels::CountRateTerms count_rate_terms(const InterferometerConfig& cfg, const PdcSourceSpec& source,
                                         const SampleModel& sample, const FrequencyGrid& grid);

/// C_s(tau) = integral of S(dw, tau) over the grid, one value per tau.
std::vector<double> temporal_count_rate(const InterferometerConfig& cfg, const PdcSourceSpec& source,
                                        const SampleModel& sample, const FrequencyGrid& grid,
                                        std::span<const double> tau_values,
                                        kernels::Execution execution = kernels::Execution::Parallel);

double visibility(const InterferometerConfig& cfg);
double optimal_gain_ratio(const InterferometerConfig& cfg);

struct VisibilityPoint {
  double gain_ratio;
  double visibility;
  double uncertainty;
};

struct VisibilityCurve {
  std::vector<VisibilityPoint> points;

  const VisibilityPoint& argmax() const;
};

/// Formula visibility at each ratio with g1^2 + g2^2 held at the config's value.
VisibilityCurve sweep_gain_ratio(const InterferometerConfig& cfg, std::span<const double> ratios);

/// n ratios log-spaced over [lo, hi].
std::vector<double> log_spaced(double lo, double hi, std::size_t n);

}  // namespace qoct
