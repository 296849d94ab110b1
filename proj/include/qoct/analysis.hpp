// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "qoct/detection.hpp"
#include "qoct/interferometer.hpp"
#include "qoct/optimize.hpp"
#include "qoct/spectral.hpp"

namespace qoct {

/// Depth profile on a symmetric single-trip OPD axis (um).
struct AScan {
  std::vector<double> axis_um;
  std::vector<double> amplitude;
  std::vector<Peak> peaks;  // both signs; the real input makes them mirror pairs
  double exclusion_um = 0.0;

  double pitch_um() const { return axis_um.size() > 1 ? axis_um[1] - axis_um[0] : 0.0; }
};

struct FdAscanOptions {
  double max_pitch_um = 1.0;
  std::optional<double> exclusion_um;  // default: 3x the transform-limited width
  double relative_prominence = 0.3;    // of the tallest peak outside the DC window
  std::optional<double> reference_lambda_nm;  // default: count-weighted centroid
};

/// Resample to frequency-uniform bins, subtract the mean, zero-pad, FFT and
/// map t to z = c t / 2. Throws ConfigError for fewer than 64 pixels or a
/// non-monotonic wavelength axis.
AScan fd_ascan(const PixelSpectrum& data, const FdAscanOptions& options = {});

/// Consecutive differences of the peaks at positive OPD.
std::vector<double> layer_separations(const std::vector<Peak>& peaks);

enum class CompensationObjective {
  Sharpness,  // maximise sum |a|^4 / (sum |a|^2)^2 beyond the DC window
  Fwhm,       // minimise the FWHM of the tallest peak
};

struct CompensationOptions {
  Bounds phi2{-50000.0, 50000.0};   // fs^2
  Bounds phi3{-200000.0, 200000.0};  // fs^3
  double phi2_tolerance = 1.0;
  double phi3_tolerance = 10.0;
  std::size_t max_iterations = 200;
  CompensationObjective objective = CompensationObjective::Sharpness;
  FdAscanOptions ascan;
};

/// phi2/phi3 are the applied correction: the analytic part of the
/// interferogram is multiplied by exp(i (phi2 dw^2 + phi3 dw^3)), so an
/// injected internal phase is recovered with the opposite sign.
struct CompensationResult {
  double phi2 = 0.0;
  double phi3 = 0.0;
  double fwhm_before = 0.0;  // um
  double fwhm_after = 0.0;   // um
  std::size_t iterations = 0;
  bool converged = false;
  bool at_bound = false;
};

struct CompensatedAScan {
  CompensationResult result;
  AScan ascan;
};

/// Hilbert transform (DC window removed) -> phase multiply -> real part ->
/// FFT, with (phi2, phi3) chosen by the configured objective. The FWHM of
/// the tallest non-DC peak is reported before and after either way.
/// Throws AnalysisError(NoResolvablePeak) when no peak has a width.
CompensatedAScan dispersion_compensate(const PixelSpectrum& data,
                                       const CompensationOptions& options = {});

/// The same transform chain at fixed phases, without any search.
AScan compensated_ascan(const PixelSpectrum& data, double phi2, double phi3,
                        const FdAscanOptions& options = {});

struct TdEnvelopeOptions {
  double fringe_lambda_nm = 1360.0;  // the trace oscillates with period lambda / 2
  double bandpass_halfwidth = 0.3;   // fraction of the fringe frequency
  double relative_prominence = 0.3;
  double phi2 = 0.0;  // optional correction of the band, fs^2
  double phi3 = 0.0;  // fs^3
};

struct TdEnvelope {
  std::vector<double> axis_um;  // mirror position
  std::vector<double> envelope;
  std::vector<Peak> peaks;
};

/// Fourier band-pass around 2 / fringe_lambda cycles/um on the positive
/// side only; the envelope is twice the modulus of what remains. Throws
/// AnalysisError(Undersampled) when the pass band reaches the Nyquist limit
/// and ConfigError for a non-uniform position axis.
TdEnvelope td_envelope(const TdTrace& trace, const TdEnvelopeOptions& options = {});

struct TdCompensation {
  CompensationResult result;
  TdEnvelope envelope;
};

/// Searches phi2/phi3 of the TD band correction with the configured
/// objective over the envelope. phi2/phi3 in `options` are ignored.
TdCompensation td_compensate(const TdTrace& trace, const TdEnvelopeOptions& options = {},
                             const CompensationOptions& search = {});

struct VisibilityEstimate {
  double visibility = 0.0;
  double uncertainty = 0.0;  // standard deviation over fringe periods
  std::size_t periods = 0;
  double fringe_delay_fs = 0.0;  // fringe period in angular frequency is 2 pi / delay
};

/// Fits offset + sinusoid over each full fringe period inside
/// [band_lo_nm, band_hi_nm]; V = amplitude / offset per period. The fringe
/// delay comes from a periodogram unless given. Throws
/// AnalysisError(TooFewFringes) for fewer than three periods.
VisibilityEstimate extract_visibility(const PixelSpectrum& data, double band_lo_nm, double band_hi_nm,
                                      std::optional<double> fringe_delay_fs = std::nullopt);

struct TransmissionFit {
  Geometry geometry = Geometry::SU11;
  double t_signal = 0.0;      // SU11: T_800. IC: T_800,2 / T_800,1
  double t_idler = 0.0;
  double rms_residual = 0.0;
};

/// Least-squares fit of the visibility formula over the free transmissions.
/// Throws AnalysisError(FitUnderdetermined) for fewer than three points or
/// a flat curve.
TransmissionFit fit_transmissions(const VisibilityCurve& curve, Geometry geometry);

struct SensitivityOptions {
  std::vector<double> t_idler_values;
  std::size_t repeats = 10;
  double band_lo_nm = 828.0;
  double band_hi_nm = 838.0;
  NoiseConfig noise;
};

struct SensitivityLevel {
  double t_idler = 0.0;
  double formula_visibility = 0.0;
  double mean_visibility = 0.0;
  double std_visibility = 0.0;
  bool detected = false;
};

struct SensitivityReport {
  std::vector<SensitivityLevel> levels;  // sorted by t_idler
  double noise_mean = 0.0;  // visibility extracted from fringe-free spectra
  double noise_std = 0.0;
  std::optional<double> threshold;  // smallest detected t_idler
};

/// Runs the FD chain at the optimal gain ratio (total gain held) for every
/// idler transmission, `repeats` times each. A level is detected when its
/// mean visibility exceeds the noise-only mean by 3 noise-only sigmas.
SensitivityReport sensitivity_sweep(const InterferometerConfig& cfg, const PdcSourceSpec& source,
                                    const SampleModel& sample, const SpectrometerConfig& spectrometer,
                                    const SensitivityOptions& options);

struct SnrReport {
  double signal_peak = 0.0;
  double noise_floor = 0.0;  // median |amplitude| outside +-3 FWHM of every peak
  double snr = 0.0;
};

SnrReport snr_report(std::span<const double> amplitude, std::span<const double> axis,
                     const std::vector<Peak>& peaks);

struct AveragedTrace {
  TdTrace trace;  // summed counts on the reference axis
  std::vector<long> shifts;  // aligned[n] = traces[i][(n + shift) mod N]
  SnrReport before;  // reference trace alone
  SnrReport after;
};

/// Aligns every trace to the reference by the integer lag maximising the
/// cross-correlation of the envelopes, then sums. Throws
/// AnalysisError(AlignmentAmbiguous) when a second correlation peak comes
/// within 1 % of the maximum.
AveragedTrace coherent_average(const std::vector<TdTrace>& traces, std::size_t reference_index,
                               const TdEnvelopeOptions& options = {});

}  // namespace qoct
