// SPDX-License-Identifier: Apache-2.0
#include "qoct/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qoct/errors.hpp"
#include "qoct/units.hpp"

namespace qoct {

namespace {

using units::kPi;
using units::kSpeedOfLight;
using units::kTwoPi;

// Transform-limited |FT| FWHM of a rectangle expressed through its RMS
// width: z = 3.7909 c / W with W = sqrt(12) sigma.
constexpr double kRmsWidthToFwhm = 1.0944;

void check_finite_counts(std::span<const double> counts) {
  for (double c : counts) {
    if (!std::isfinite(c)) throw ConfigError("counts contain non-finite values");
  }
}

// Windowed-sinc interpolation at fractional index u. Linear interpolation
// loses fringe contrast once a period spans only a few pixels.
double lanczos_at(std::span<const double> y, double u) {
  constexpr long kLobes = 8;
  const auto base = static_cast<long>(std::floor(u));
  const double frac = u - static_cast<double>(base);
  if (frac == 0.0) return y[static_cast<std::size_t>(base)];
  double sum = 0.0;
  double norm = 0.0;
  for (long i = base - kLobes + 1; i <= base + kLobes; ++i) {
    if (i < 0 || i >= static_cast<long>(y.size())) continue;
    const double x = u - static_cast<double>(i);
    const double px = kPi * x;
    const double wgt = std::sin(px) / px * std::sin(px / kLobes) / (px / kLobes);
    sum += wgt * y[static_cast<std::size_t>(i)];
    norm += wgt;
  }
  return sum / norm;
}

// Pixel spectrum resampled to uniform angular frequency, detuning measured
// from the reference frequency.
struct UniformSpectrum {
  std::vector<double> detuning;
  std::vector<double> values;
  double omega_ref = 0.0;
  double step = 0.0;
  double rms_width = 0.0;
};

UniformSpectrum resample_uniform(const PixelSpectrum& data, std::optional<double> reference_lambda_nm) {
  const auto n = data.wavelength_nm.size();
  if (n != data.counts.size()) throw ConfigError("wavelength and counts columns differ in length");
  if (n < 64) throw ConfigError("FD analysis needs at least 64 pixels, got " + std::to_string(n));
  check_finite_counts(data.counts);
  const bool increasing = data.wavelength_nm[1] > data.wavelength_nm[0];
  for (std::size_t k = 1; k < n; ++k) {
    const double d = data.wavelength_nm[k] - data.wavelength_nm[k - 1];
    if (!(increasing ? d > 0.0 : d < 0.0) || !(data.wavelength_nm[k] > 0.0)) {
      throw ConfigError("wavelength axis is not strictly monotonic at row " + std::to_string(k));
    }
  }
  std::vector<double> omega(n);
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    // Ascending frequency is descending wavelength.
    const std::size_t src = increasing ? n - 1 - k : k;
    omega[k] = units::angular_frequency(data.wavelength_nm[src]);
    y[k] = data.counts[src];
  }

  UniformSpectrum out;
  out.step = (omega.back() - omega.front()) / static_cast<double>(n - 1);
  out.values.resize(n);
  std::vector<double> grid(n);
  std::size_t j = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = k + 1 == n ? omega.back() : omega.front() + static_cast<double>(k) * out.step;
    grid[k] = w;
    while (j + 2 < n && omega[j + 1] < w) ++j;
    const double frac = std::clamp((w - omega[j]) / (omega[j + 1] - omega[j]), 0.0, 1.0);
    out.values[k] = lanczos_at(y, static_cast<double>(j) + frac);
  }

  double total = 0.0;
  double first = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double wgt = std::max(0.0, out.values[k]);
    total += wgt;
    first += wgt * grid[k];
  }
  const double centroid = total > 0.0 ? first / total : 0.5 * (grid.front() + grid.back());
  out.omega_ref = reference_lambda_nm ? units::angular_frequency(*reference_lambda_nm) : centroid;
  double second = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = grid[k] - centroid;
    second += std::max(0.0, out.values[k]) * d * d;
  }
  out.rms_width = total > 0.0 ? std::sqrt(second / total) : 0.0;
  out.detuning.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.detuning[k] = grid[k] - out.omega_ref;
  return out;
}

// Zero-padded centred layout shared by the plain and compensated A-scans.
struct FdTransform {
  std::size_t m = 0;       // padded length
  std::size_t offset = 0;  // index of the first data sample
  std::vector<double> z;   // single-trip OPD axis
  double exclusion = 0.0;
};

FdTransform fd_layout(const UniformSpectrum& spec, const FdAscanOptions& options) {
  if (!(options.max_pitch_um > 0.0)) throw ConfigError("max_pitch_um must be > 0");
  const auto n = spec.values.size();
  const double needed = kPi * kSpeedOfLight / (spec.step * options.max_pitch_um);
  FdTransform t;
  t.m = std::max(next_power_of_two(2 * n), next_power_of_two(static_cast<std::size_t>(std::ceil(needed))));
  const auto first = static_cast<long long>(std::llround(spec.detuning.front() / spec.step));
  const long long offset = static_cast<long long>(t.m / 2) + first;
  // The reference may sit off-centre; the offset only changes a global
  // phase of the transform, so clamp it into the array.
  t.offset = static_cast<std::size_t>(std::clamp<long long>(offset, 0, static_cast<long long>(t.m - n)));
  const double dt = kTwoPi / (static_cast<double>(t.m) * spec.step);
  t.z.resize(t.m);
  for (std::size_t k = 0; k < t.m; ++k) {
    t.z[k] = units::delay_to_single_trip_um((static_cast<double>(k) - static_cast<double>(t.m / 2)) * dt);
  }
  t.exclusion = options.exclusion_um.value_or(
      spec.rms_width > 0.0 ? 3.0 * kRmsWidthToFwhm * kSpeedOfLight / spec.rms_width : 0.0);
  if (t.exclusion < 0.0) throw ConfigError("exclusion_um must be >= 0");
  return t;
}

std::vector<double> modulus(const std::vector<Complex>& v) {
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = std::abs(v[k]);
  return out;
}

// Transform amplitudes below this are round-off from fringe-free input.
double roundoff_floor(const std::vector<double>& values) {
  double power = 0.0;
  for (double v : values) power += v * v;
  return 1e-9 * std::sqrt(power);
}

std::vector<Peak> significant_peaks(const std::vector<double>& amplitude, const std::vector<double>& axis,
                                    double exclusion, double relative, double floor = 0.0) {
  const auto candidates = find_peaks(amplitude, axis, 0.0, exclusion);
  double tallest = 0.0;
  for (const auto& p : candidates) tallest = std::max(tallest, p.height);
  std::vector<Peak> out;
  if (tallest <= floor) return out;
  for (const auto& p : candidates) {
    if (p.prominence >= relative * tallest) out.push_back(p);
  }
  return out;
}

// Tallest peak on the positive side beyond the exclusion window.
std::optional<Peak> tallest_positive(const std::vector<double>& amplitude, const std::vector<double>& axis,
                                     double exclusion) {
  std::optional<Peak> best;
  for (const auto& p : find_peaks(amplitude, axis, 0.0, exclusion)) {
    if (p.position <= exclusion) continue;
    if (!best || p.height > best->height) best = p;
  }
  return best;
}

struct Trial {
  std::optional<double> fwhm;  // tallest peak
  double sharpness = 0.0;
};

// sum |a|^4 / (sum |a|^2)^2 over the selected samples; largest for the most
// compact profile.
template <typename Select>
double sharpness(const std::vector<double>& a, Select select) {
  double s2 = 0.0;
  double s4 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!select(k)) continue;
    const double p = a[k] * a[k];
    s2 += p;
    s4 += p * p;
  }
  return s2 > 0.0 ? s4 / (s2 * s2) : 0.0;
}

// Keep positive delays beyond the DC window, doubled, and return to the
// spectral domain.
std::vector<Complex> one_sided_impl(std::vector<Complex> x, const std::vector<double>& z, double exclusion) {
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = z[k] > exclusion ? 2.0 * x[k] : Complex(0.0);
  return centered_ifft(x);
}

// Tukey weights over the band between the half-maximum crossings of the
// smooth background. Only the search objective sees them: tapering the band
// edges keeps sinc leakage from the DC term and the truncated mirror image
// out of the cubic-phase estimate.
std::vector<double> band_taper(std::span<const double> background, std::span<const double> detuning) {
  constexpr double kTaperFraction = 0.25;
  const auto n = background.size();
  const std::size_t top = static_cast<std::size_t>(std::max_element(background.begin(), background.end()) -
                                                   background.begin());
  const double half = 0.5 * background[top];
  auto crossing = [&](std::size_t inside, std::size_t outside) {
    const double a = background[inside] - half;
    const double b = background[outside] - half;
    return detuning[inside] + (detuning[outside] - detuning[inside]) * a / (a - b);
  };
  std::size_t k = top;
  while (k > 0 && background[k - 1] >= half) --k;
  const double lo = k > 0 ? crossing(k, k - 1) : detuning.front();
  k = top;
  while (k + 1 < n && background[k + 1] >= half) ++k;
  const double hi = k + 1 < n ? crossing(k, k + 1) : detuning.back();
  const double ramp = 0.5 * kTaperFraction * (hi - lo);
  std::vector<double> w(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double d = detuning[j];
    if (d <= lo || d >= hi) continue;
    const double edge = std::min(d - lo, hi - d);
    w[j] = edge >= ramp ? 1.0 : 0.5 - 0.5 * std::cos(kPi * edge / ramp);
  }
  return w;
}

// Precomputed analytic signals for repeated compensation trials.
class FdCompensator {
 public:
  FdCompensator(const PixelSpectrum& data, const FdAscanOptions& options)
      : spec_(resample_uniform(data, options.reference_lambda_nm)), layout_(fd_layout(spec_, options)) {
    const auto n = spec_.values.size();
    const double mean = std::accumulate(spec_.values.begin(), spec_.values.end(), 0.0) /
                        static_cast<double>(n);
    std::vector<Complex> padded(layout_.m);
    for (std::size_t k = 0; k < n; ++k) padded[layout_.offset + k] = spec_.values[k] - mean;
    const auto x = centered_fft(padded);
    analytic_ = one_sided(x);
    roundoff_ = roundoff_floor(spec_.values);

    std::vector<Complex> low(layout_.m);
    for (std::size_t k = 0; k < layout_.m; ++k) {
      if (std::abs(layout_.z[k]) <= layout_.exclusion) low[k] = x[k];
    }
    const auto smooth = centered_ifft(low);
    std::vector<double> background(n);
    for (std::size_t k = 0; k < n; ++k) background[k] = smooth[layout_.offset + k].real() + mean;
    const auto taper = band_taper(background, spec_.detuning);
    double inside = 0.0;
    double weight = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      inside += taper[k] * spec_.values[k];
      weight += taper[k];
    }
    const double level = weight > 0.0 ? inside / weight : mean;
    std::vector<Complex> tapered(layout_.m);
    for (std::size_t k = 0; k < n; ++k) {
      tapered[layout_.offset + k] = taper[k] * (spec_.values[k] - level);
    }
    tapered_ = one_sided(centered_fft(tapered));
  }

  // |FFT| of the tapered one-sided field after the trial phase; no real
  // projection, so the mirror image never returns.
  std::vector<double> search_amplitude(double phi2, double phi3) const {
    std::vector<Complex> field(layout_.m);
    for (std::size_t k = 0; k < spec_.values.size(); ++k) {
      const double d = spec_.detuning[k];
      const std::size_t i = layout_.offset + k;
      field[i] = tapered_[i] * std::polar(1.0, (phi3 * d + phi2) * d * d);
    }
    return modulus(centered_fft(field));
  }

  std::vector<double> amplitude(double phi2, double phi3) const {
    std::vector<Complex> field(layout_.m);
    for (std::size_t k = 0; k < spec_.values.size(); ++k) {
      const double d = spec_.detuning[k];
      const std::size_t i = layout_.offset + k;
      field[i] = Complex((analytic_[i] * std::polar(1.0, (phi3 * d + phi2) * d * d)).real(), 0.0);
    }
    return modulus(centered_fft(field));
  }

  Trial trial(double phi2, double phi3) const {
    const auto amp = amplitude(phi2, phi3);
    Trial t;
    // Peaks at round-off level come from fringe-free input and carry no width.
    const auto peak = tallest_positive(amp, layout_.z, layout_.exclusion);
    if (peak && peak->height > roundoff_) t.fwhm = peak->fwhm;
    t.sharpness = sharpness(search_amplitude(phi2, phi3), [&](std::size_t k) { return layout_.z[k] > layout_.exclusion; });
    return t;
  }

  const FdTransform& layout() const { return layout_; }
  double roundoff() const { return roundoff_; }

 private:
  UniformSpectrum spec_;
  FdTransform layout_;
  std::vector<Complex> one_sided(std::vector<Complex> x) const {
    return one_sided_impl(std::move(x), layout_.z, layout_.exclusion);
  }

  std::vector<Complex> analytic_;
  std::vector<Complex> tapered_;
  double roundoff_ = 0.0;
};

CompensationResult run_search(const std::function<Trial(double, double)>& trial,
                              const CompensationOptions& options, double penalty) {
  CompensationResult result;
  const auto before = trial(0.0, 0.0);
  if (!before.fwhm) throw AnalysisError(AnalysisFailure::NoResolvablePeak, "no peak with a measurable width");
  result.fwhm_before = *before.fwhm;
  const bool by_width = options.objective == CompensationObjective::Fwhm;
  auto score = [&](const Trial& t) { return by_width ? t.fwhm.value_or(penalty) : -t.sharpness; };
  auto objective = [&](const std::vector<double>& p) { return score(trial(p[0], p[1])); };
  CoordinateDescentOptions cd;
  cd.line_tolerance = {0.5 * options.phi2_tolerance, 0.5 * options.phi3_tolerance};
  cd.step_tolerance = {options.phi2_tolerance, options.phi3_tolerance};
  cd.max_iterations = options.max_iterations;
  const auto found = coordinate_descent(objective, {0.0, 0.0}, {options.phi2, options.phi3}, cd);
  result.iterations = found.iterations;
  result.converged = found.converged;
  result.at_bound = found.at_bound;
  // The search starts from zero, so it never ends worse than it began.
  if (found.value <= score(before)) {
    result.phi2 = found.x[0];
    result.phi3 = found.x[1];
  }
  result.fwhm_after = trial(result.phi2, result.phi3).fwhm.value_or(result.fwhm_before);
  return result;
}

// Positive-frequency band of a TD trace, ready for phase trials.
class TdBand {
 public:
  TdBand(const TdTrace& trace, const TdEnvelopeOptions& options) : options_(options) {
    const auto n = trace.position_um.size();
    if (n != trace.counts.size()) throw ConfigError("position and counts columns differ in length");
    if (n < 8) throw ConfigError("TD analysis needs at least 8 stage positions");
    check_finite_counts(trace.counts);
    if (!(options.fringe_lambda_nm > 0.0)) throw ConfigError("fringe_lambda_nm must be > 0");
    if (!(options.bandpass_halfwidth > 0.0 && options.bandpass_halfwidth < 1.0)) {
      throw ConfigError("bandpass_halfwidth must lie in (0, 1)");
    }
    step_ = (trace.position_um.back() - trace.position_um.front()) / static_cast<double>(n - 1);
    if (!(step_ > 0.0)) throw ConfigError("stage positions must increase");
    for (std::size_t k = 1; k < n; ++k) {
      const double d = trace.position_um[k] - trace.position_um[k - 1];
      if (std::abs(d - step_) > 1e-6 * step_ + 1e-9) {
        throw ConfigError("stage positions are not uniformly spaced at row " + std::to_string(k));
      }
    }
    const double nu0 = 2.0 / units::nm_to_um(options.fringe_lambda_nm);
    const double nu_hi = nu0 * (1.0 + options.bandpass_halfwidth);
    if (nu_hi >= 0.5 / step_) {
      throw AnalysisError(AnalysisFailure::Undersampled,
                          "stage step " + std::to_string(step_) +
                              " um undersamples the fringe pass band (Nyquist violated)");
    }
    n_ = n;
    axis_ = trace.position_um;
    m_ = next_power_of_two(2 * n);
    const double mean = std::accumulate(trace.counts.begin(), trace.counts.end(), 0.0) /
                        static_cast<double>(n);
    std::vector<Complex> padded(m_);
    for (std::size_t k = 0; k < n; ++k) padded[k] = trace.counts[k] - mean;
    auto x = dft(padded);
    const double nu_lo = nu0 * (1.0 - options.bandpass_halfwidth);
    const double omega_i = units::angular_frequency(options.fringe_lambda_nm);
    for (std::size_t m = 0; m < m_ / 2; ++m) {
      const double nu = static_cast<double>(m) / (static_cast<double>(m_) * step_);
      if (nu < nu_lo || nu > nu_hi) continue;
      index_.push_back(m);
      band_.push_back(x[m]);
      detuning_.push_back(kPi * kSpeedOfLight * nu - omega_i);
    }
  }

  std::vector<double> envelope(double phi2, double phi3) const {
    std::vector<Complex> x(m_);
    for (std::size_t j = 0; j < index_.size(); ++j) {
      const double d = detuning_[j];
      x[index_[j]] = band_[j] * std::polar(1.0, (phi3 * d + phi2) * d * d);
    }
    const auto a = idft(x);
    std::vector<double> env(n_);
    for (std::size_t k = 0; k < n_; ++k) env[k] = 2.0 * std::abs(a[k]);
    return env;
  }

  Trial trial(double phi2, double phi3) const {
    const auto env = envelope(phi2, phi3);
    Trial t;
    const auto it = std::max_element(env.begin(), env.end());
    if (*it > 0.0) t.fwhm = fwhm_at(env, axis_, static_cast<std::size_t>(it - env.begin()));
    t.sharpness = sharpness(env, [](std::size_t) { return true; });
    return t;
  }

  TdEnvelope result(double phi2, double phi3) const {
    TdEnvelope out;
    out.axis_um = axis_;
    out.envelope = envelope(phi2, phi3);
    out.peaks = significant_peaks(out.envelope, out.axis_um, 0.0, options_.relative_prominence);
    return out;
  }

  double span() const { return axis_.back() - axis_.front(); }

 private:
  TdEnvelopeOptions options_;
  double step_ = 0.0;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> axis_;
  std::vector<std::size_t> index_;
  std::vector<Complex> band_;
  std::vector<double> detuning_;
};

// Least squares for y ~ a + b cos + c sin via the 3x3 normal equations.
std::optional<std::array<double, 3>> fit_sinusoid(std::span<const double> w, std::span<const double> y,
                                                  double delay) {
  std::array<std::array<double, 4>, 3> m{};
  for (std::size_t k = 0; k < w.size(); ++k) {
    const std::array<double, 3> basis{1.0, std::cos(w[k] * delay), std::sin(w[k] * delay)};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += basis[r] * basis[c];
      m[r][3] += basis[r] * y[k];
    }
  }
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (std::abs(m[pivot][col]) < 1e-12 * static_cast<double>(w.size())) return std::nullopt;
    std::swap(m[col], m[pivot]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return std::array<double, 3>{m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

double periodogram(std::span<const double> w, std::span<const double> y, double delay) {
  Complex s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += y[k] * std::polar(1.0, -w[k] * delay);
  return std::norm(s);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

AScan fd_ascan(const PixelSpectrum& data, const FdAscanOptions& options) {
  const auto spec = resample_uniform(data, options.reference_lambda_nm);
  const auto layout = fd_layout(spec, options);
  const double mean = std::accumulate(spec.values.begin(), spec.values.end(), 0.0) /
                      static_cast<double>(spec.values.size());
  std::vector<Complex> padded(layout.m);
  for (std::size_t k = 0; k < spec.values.size(); ++k) padded[layout.offset + k] = spec.values[k] - mean;
  AScan out;
  out.axis_um = layout.z;
  out.amplitude = modulus(centered_fft(padded));
  out.exclusion_um = layout.exclusion;
  out.peaks = significant_peaks(out.amplitude, out.axis_um, layout.exclusion, options.relative_prominence,
                                roundoff_floor(spec.values));
  return out;
}

std::vector<double> layer_separations(const std::vector<Peak>& peaks) {
  std::vector<double> pos;
  for (const auto& p : peaks) {
    if (p.position > 0.0) pos.push_back(p.position);
  }
  std::sort(pos.begin(), pos.end());
  std::vector<double> out;
  for (std::size_t k = 1; k < pos.size(); ++k) out.push_back(pos[k] - pos[k - 1]);
  return out;
}

AScan compensated_ascan(const PixelSpectrum& data, double phi2, double phi3, const FdAscanOptions& options) {
  const FdCompensator comp(data, options);
  AScan out;
  out.axis_um = comp.layout().z;
  out.amplitude = comp.amplitude(phi2, phi3);
  out.exclusion_um = comp.layout().exclusion;
  out.peaks = significant_peaks(out.amplitude, out.axis_um, out.exclusion_um, options.relative_prominence,
                                comp.roundoff());
  return out;
}

CompensatedAScan dispersion_compensate(const PixelSpectrum& data, const CompensationOptions& options) {
  const FdCompensator comp(data, options.ascan);
  const double penalty = 2.0 * comp.layout().z.back();
  auto trial = [&](double p2, double p3) { return comp.trial(p2, p3); };
  CompensatedAScan out;
  out.result = run_search(trial, options, penalty);
  out.ascan.axis_um = comp.layout().z;
  out.ascan.amplitude = comp.amplitude(out.result.phi2, out.result.phi3);
  out.ascan.exclusion_um = comp.layout().exclusion;
  out.ascan.peaks = significant_peaks(out.ascan.amplitude, out.ascan.axis_um, out.ascan.exclusion_um,
                                      options.ascan.relative_prominence, comp.roundoff());
  return out;
}

TdEnvelope td_envelope(const TdTrace& trace, const TdEnvelopeOptions& options) {
  return TdBand(trace, options).result(options.phi2, options.phi3);
}

TdCompensation td_compensate(const TdTrace& trace, const TdEnvelopeOptions& options,
                             const CompensationOptions& search) {
  const TdBand band(trace, options);
  auto trial = [&](double p2, double p3) { return band.trial(p2, p3); };
  TdCompensation out;
  out.result = run_search(trial, search, 2.0 * band.span());
  out.envelope = band.result(out.result.phi2, out.result.phi3);
  return out;
}

VisibilityEstimate extract_visibility(const PixelSpectrum& data, double band_lo_nm, double band_hi_nm,
                                      std::optional<double> fringe_delay_fs) {
  if (data.wavelength_nm.size() != data.counts.size() || data.counts.empty()) {
    throw ConfigError("wavelength and counts columns differ in length or are empty");
  }
  check_finite_counts(data.counts);
  if (!(band_hi_nm > band_lo_nm)) throw ConfigError("visibility band must satisfy lo < hi");
  const auto [lo_it, hi_it] = std::minmax_element(data.wavelength_nm.begin(), data.wavelength_nm.end());
  if (band_lo_nm < *lo_it || band_hi_nm > *hi_it) {
    throw ConfigError("visibility band lies outside the measured wavelength range");
  }
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < data.counts.size(); ++k) {
    const double l = data.wavelength_nm[k];
    if (l >= band_lo_nm && l <= band_hi_nm) pts.emplace_back(units::angular_frequency(l), data.counts[k]);
  }
  std::sort(pts.begin(), pts.end());
  if (pts.size() < 12) {
    throw AnalysisError(AnalysisFailure::TooFewFringes, "visibility band holds fewer than 12 pixels");
  }
  std::vector<double> w(pts.size());
  std::vector<double> y(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) std::tie(w[k], y[k]) = pts[k];
  const double width = w.back() - w.front();
  const double pixel = width / static_cast<double>(w.size() - 1);

  double delay = 0.0;
  if (fringe_delay_fs) {
    delay = std::abs(*fringe_delay_fs);
  } else {
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    std::vector<double> yc(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) yc[k] = y[k] - mean;
    const double t_min = 3.0 * kTwoPi / width;
    const double t_max = kPi / pixel;
    if (!(t_max > t_min)) {
      throw AnalysisError(AnalysisFailure::TooFewFringes, "band too narrow for three resolvable fringes");
    }
    const double dt = kTwoPi / (8.0 * width);
    double best = t_min;
    double best_power = -1.0;
    for (double t = t_min; t <= t_max; t += dt) {
      const double p = periodogram(w, yc, t);
      if (p > best_power) {
        best_power = p;
        best = t;
      }
    }
    const auto refined = golden_section([&](double t) { return -periodogram(w, yc, t); },
                                        std::max(t_min, best - dt), std::min(t_max, best + dt), 1e-6 * dt);
    delay = refined.x;
  }
  if (!(delay > 0.0)) throw AnalysisError(AnalysisFailure::TooFewFringes, "fringe delay must be non-zero");

  const double period = kTwoPi / delay;
  const auto windows = static_cast<std::size_t>(std::floor((width + pixel) / period));
  if (windows < 3) {
    throw AnalysisError(AnalysisFailure::TooFewFringes,
                        "band holds " + std::to_string(windows) + " full fringe periods, need 3");
  }
  std::vector<double> vis;
  std::size_t start = 0;
  for (std::size_t win = 0; win < windows; ++win) {
    const double edge = w.front() - 0.5 * pixel + static_cast<double>(win + 1) * period;
    std::size_t stop = start;
    while (stop < w.size() && w[stop] < edge) ++stop;
    const std::size_t count = stop - start;
    if (count < 4) {
      throw AnalysisError(AnalysisFailure::TooFewFringes, "fringes sampled by fewer than 4 pixels per period");
    }
    const auto fit = fit_sinusoid(std::span(w).subspan(start, count), std::span(y).subspan(start, count), delay);
    if (fit && (*fit)[0] > 0.0) vis.push_back(std::hypot((*fit)[1], (*fit)[2]) / (*fit)[0]);
    start = stop;
  }
  if (vis.size() < 3) throw AnalysisError(AnalysisFailure::TooFewFringes, "fewer than 3 fringe periods fitted");
  const double mean = std::accumulate(vis.begin(), vis.end(), 0.0) / static_cast<double>(vis.size());
  double var = 0.0;
  for (double v : vis) var += (v - mean) * (v - mean);
  var /= static_cast<double>(vis.size() - 1);
  return {mean, std::sqrt(var), vis.size(), delay};
}

TransmissionFit fit_transmissions(const VisibilityCurve& curve, Geometry geometry) {
  const auto& pts = curve.points;
  if (pts.size() < 3) {
    throw AnalysisError(AnalysisFailure::FitUnderdetermined, "transmission fit needs at least 3 points");
  }
  double vmin = pts.front().visibility;
  double vmax = vmin;
  for (const auto& p : pts) {
    if (!(p.gain_ratio > 0.0) || !std::isfinite(p.visibility)) {
      throw AnalysisError(AnalysisFailure::InvalidInput, "curve points need positive ratios and finite V");
    }
    vmin = std::min(vmin, p.visibility);
    vmax = std::max(vmax, p.visibility);
  }
  if (vmax - vmin <= 1e-12 * std::max(1.0, std::abs(vmax))) {
    throw AnalysisError(AnalysisFailure::FitUnderdetermined, "flat visibility curve fixes no transmission");
  }
  // V(rho) = s h(rho), h = 2 sqrt(q rho) / (rho + q), s = sqrt(T_idler);
  // q = 1 / T_800 (SU11) or T_800,2 / T_800,1 (IC). s is linear, so only
  // log q needs a search.
  struct Profile {
    double s;
    double rss;
  };
  auto profile = [&](double log_q) {
    const double q = std::exp(log_q);
    double hv = 0.0;
    double hh = 0.0;
    for (const auto& p : pts) {
      const double h = 2.0 * std::sqrt(q * p.gain_ratio) / (p.gain_ratio + q);
      hv += h * p.visibility;
      hh += h * h;
    }
    const double s = std::clamp(hv / hh, 0.0, 1.0);
    double rss = 0.0;
    for (const auto& p : pts) {
      const double h = 2.0 * std::sqrt(q * p.gain_ratio) / (p.gain_ratio + q);
      rss += (p.visibility - s * h) * (p.visibility - s * h);
    }
    return Profile{s, rss};
  };
  const double lo = geometry == Geometry::SU11 ? 0.0 : std::log(1e-3);
  const double hi = std::log(1e3);
  const auto best = scan_then_golden([&](double lq) { return profile(lq).rss; }, lo, hi, 401, 1e-10);
  const auto fit = profile(best.x);
  TransmissionFit out;
  out.geometry = geometry;
  const double q = std::exp(best.x);
  out.t_signal = geometry == Geometry::SU11 ? 1.0 / q : q;
  out.t_idler = fit.s * fit.s;
  out.rms_residual = std::sqrt(fit.rss / static_cast<double>(pts.size()));
  return out;
}

SensitivityReport sensitivity_sweep(const InterferometerConfig& cfg, const PdcSourceSpec& source,
                                    const SampleModel& sample, const SpectrometerConfig& spectrometer,
                                    const SensitivityOptions& options) {
  if (options.t_idler_values.empty()) throw ConfigError("sensitivity sweep needs idler transmissions");
  if (options.repeats < 2) throw ConfigError("sensitivity sweep needs at least 2 repeats");
  for (double t : options.t_idler_values) {
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("idler transmissions must lie in (0, 1]");
  }
  sample.validate();
  const auto strongest = std::max_element(sample.layers.begin(), sample.layers.end(),
                                          [](const Layer& a, const Layer& b) {
                                            return a.reflectivity < b.reflectivity;
                                          });
  const double delay = cfg.reference_delay_tau + units::single_trip_um_to_delay(strongest->opd_um);
  const auto base = with_gain_ratio(cfg, optimal_gain_ratio(cfg));
  const auto grid = fd_simulation_grid(source, spectrometer);

  auto values = options.t_idler_values;
  std::sort(values.begin(), values.end());
  SampleModel dark = sample;
  for (auto& layer : dark.layers) layer.reflectivity = 0.0;

  // Level index values.size() is the fringe-free reference.
  const std::size_t n_levels = values.size() + 1;
  std::vector<RealSpectrum> spectra;
  spectra.reserve(n_levels);
  for (std::size_t i = 0; i < n_levels; ++i) {
    auto c = base;
    c.t_idler = i < values.size() ? values[i] : values.front();
    spectra.push_back(spectral_interferogram(c, source, i < values.size() ? sample : dark, grid));
  }

  const std::size_t n_tasks = n_levels * options.repeats;
  std::vector<double> extracted(n_tasks);
  std::vector<int> failed(n_tasks, 0);
  const auto tasks = static_cast<std::ptrdiff_t>(n_tasks);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < tasks; ++t) {
    const auto task = static_cast<std::size_t>(t);
    NoiseConfig noise = options.noise;
    noise.seed = derive_seed(options.noise.seed, task);
    try {
      const auto pixels = acquire_spectrum(spectra[task / options.repeats], spectrometer, noise);
      extracted[task] = extract_visibility(pixels, options.band_lo_nm, options.band_hi_nm, delay).visibility;
    } catch (...) {
      failed[task] = 1;
    }
  }
  if (std::any_of(failed.begin(), failed.end(), [](int f) { return f != 0; })) {
    // Re-run one failing task serially so the caller sees the real error.
    for (std::size_t task = 0; task < n_tasks; ++task) {
      if (!failed[task]) continue;
      NoiseConfig noise = options.noise;
      noise.seed = derive_seed(options.noise.seed, task);
      const auto pixels = acquire_spectrum(spectra[task / options.repeats], spectrometer, noise);
      extract_visibility(pixels, options.band_lo_nm, options.band_hi_nm, delay);
    }
  }

  auto stats = [&](std::size_t level) {
    const auto first = extracted.begin() + static_cast<std::ptrdiff_t>(level * options.repeats);
    const auto last = first + static_cast<std::ptrdiff_t>(options.repeats);
    const double mean = std::accumulate(first, last, 0.0) / static_cast<double>(options.repeats);
    double var = 0.0;
    for (auto it = first; it != last; ++it) var += (*it - mean) * (*it - mean);
    return std::pair{mean, std::sqrt(var / static_cast<double>(options.repeats - 1))};
  };

  SensitivityReport report;
  std::tie(report.noise_mean, report.noise_std) = stats(values.size());
  const double margin = std::max(3.0 * report.noise_std, 1e-9);
  for (std::size_t i = 0; i < values.size(); ++i) {
    SensitivityLevel level;
    level.t_idler = values[i];
    auto c = base;
    c.t_idler = values[i];
    level.formula_visibility = visibility(c);
    std::tie(level.mean_visibility, level.std_visibility) = stats(i);
    level.detected = level.mean_visibility - report.noise_mean >= margin;
    if (level.detected && !report.threshold) report.threshold = values[i];
    report.levels.push_back(level);
  }
  return report;
}

SnrReport snr_report(std::span<const double> amplitude, std::span<const double> axis,
                     const std::vector<Peak>& peaks) {
  if (amplitude.size() != axis.size() || amplitude.empty()) {
    throw ConfigError("snr_report: amplitude and axis differ in length or are empty");
  }
  SnrReport out;
  for (const auto& p : peaks) out.signal_peak = std::max(out.signal_peak, p.height);
  if (peaks.empty()) out.signal_peak = *std::max_element(amplitude.begin(), amplitude.end());
  std::vector<double> rest;
  for (std::size_t k = 0; k < amplitude.size(); ++k) {
    bool inside = false;
    for (const auto& p : peaks) {
      const double half = 3.0 * p.fwhm.value_or(0.0);
      if (std::abs(axis[k] - p.position) <= half) {
        inside = true;
        break;
      }
    }
    if (!inside) rest.push_back(std::abs(amplitude[k]));
  }
  if (rest.empty()) {
    throw AnalysisError(AnalysisFailure::InvalidInput, "peak windows cover the whole trace; no noise floor");
  }
  out.noise_floor = std::max(median(std::move(rest)), std::numeric_limits<double>::min());
  out.snr = out.signal_peak / out.noise_floor;
  return out;
}

AveragedTrace coherent_average(const std::vector<TdTrace>& traces, std::size_t reference_index,
                               const TdEnvelopeOptions& options) {
  if (traces.size() < 2) throw ConfigError("coherent averaging needs at least 2 traces");
  if (reference_index >= traces.size()) throw ConfigError("reference index out of range");
  const auto n = traces[reference_index].counts.size();
  for (const auto& t : traces) {
    if (t.counts.size() != n || t.position_um.size() != n) {
      throw ConfigError("coherent averaging needs traces of equal length");
    }
  }
  std::vector<TdEnvelope> envelopes;
  envelopes.reserve(traces.size());
  for (const auto& t : traces) envelopes.push_back(td_envelope(t, options));

  const std::size_t m = next_power_of_two(2 * n);
  // The median tracks the floor away from the packets; removing the mean
  // instead leaves a negative plateau whose overlap pulls every lag to zero.
  auto padded_spectrum = [&](const std::vector<double>& e) {
    const double floor = median(e);
    std::vector<Complex> x(m);
    for (std::size_t k = 0; k < n; ++k) x[k] = e[k] - floor;
    return dft(x);
  };
  const auto ref = padded_spectrum(envelopes[reference_index].envelope);

  AveragedTrace out;
  out.trace.position_um = traces[reference_index].position_um;
  out.trace.counts.assign(n, 0.0);
  out.trace.undersampled = traces[reference_index].undersampled;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    long shift = 0;
    if (i != reference_index) {
      auto x = padded_spectrum(envelopes[i].envelope);
      for (std::size_t k = 0; k < m; ++k) x[k] *= std::conj(ref[k]);
      const auto xc_complex = idft(x);
      // Lag s in (-n, n): xc[s] = sum_k ref[k] e[k + s].
      std::vector<double> xc(m);
      for (std::size_t k = 0; k < m; ++k) xc[k] = xc_complex[k].real();
      const auto best = static_cast<std::size_t>(std::max_element(xc.begin(), xc.end()) - xc.begin());
      if (!(xc[best] > 0.0)) {
        throw AnalysisError(AnalysisFailure::AlignmentAmbiguous, "traces do not correlate");
      }
      for (std::size_t k = 0; k < m; ++k) {
        if (k == best) continue;
        const double prev = xc[(k + m - 1) % m];
        const double next = xc[(k + 1) % m];
        if (xc[k] >= prev && xc[k] > next && xc[k] >= 0.99 * xc[best]) {
          throw AnalysisError(AnalysisFailure::AlignmentAmbiguous,
                              "trace " + std::to_string(i) + " has two correlation peaks within 1 %");
        }
      }
      shift = best < m / 2 ? static_cast<long>(best) : static_cast<long>(best) - static_cast<long>(m);
    }
    out.shifts.push_back(shift);
    const auto ln = static_cast<long>(n);
    for (std::size_t k = 0; k < n; ++k) {
      const long src = ((static_cast<long>(k) + shift) % ln + ln) % ln;
      out.trace.counts[k] += traces[i].counts[static_cast<std::size_t>(src)];
    }
  }
  const auto& before = envelopes[reference_index];
  out.before = snr_report(before.envelope, before.axis_um, before.peaks);
  const auto summed = td_envelope(out.trace, options);
  out.after = snr_report(summed.envelope, summed.axis_um, summed.peaks);
  return out;
}

}  // namespace qoct
