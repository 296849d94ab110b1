// SPDX-License-Identifier: Apache-2.0
#include "qoct/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "qoct/errors.hpp"
#include "qoct/units.hpp"

namespace qoct {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per (size, direction) and kept for the
// lifetime of the process.
class PlanCache {
 public:
  fftw_plan get(int n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    auto* in = fftw_alloc_complex(static_cast<std::size_t>(n));
    auto* out = fftw_alloc_complex(static_cast<std::size_t>(n));
    fftw_plan plan = fftw_plan_dft_1d(n, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

std::vector<Complex> unitary_transform(std::span<const Complex> input, int sign) {
  const auto n = input.size();
  std::vector<Complex> in(input.begin(), input.end());
  std::vector<Complex> out(n);
  if (n == 0) return out;
  fftw_plan plan = plan_cache().get(static_cast<int>(n), sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : out) v *= scale;
  return out;
}

std::vector<Complex> centered_transform(std::span<const Complex> input, int sign) {
  const auto n = input.size();
  if (!is_power_of_two(n)) {
    throw ConfigError("transform length " + std::to_string(n) + " is not a power of two");
  }
  const auto half = n / 2;
  std::vector<Complex> shifted(n);
  for (std::size_t j = 0; j < n; ++j) shifted[j] = input[(j + half) % n];
  auto y = unitary_transform(shifted, sign);
  std::vector<Complex> out(n);
  for (std::size_t m = 0; m < n; ++m) out[m] = y[(m + half) % n];
  return out;
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

FrequencyGrid::FrequencyGrid(std::size_t n_points, double delta_omega, double center_signal,
                             double center_idler)
    : delta_omega_(delta_omega), center_signal_(center_signal), center_idler_(center_idler) {
  if (!is_power_of_two(n_points) || n_points < kMinPoints) {
    throw ConfigError("frequency grid size must be a power of two >= 64, got " +
                      std::to_string(n_points));
  }
  if (!(delta_omega > 0.0) || !std::isfinite(delta_omega)) {
    throw ConfigError("frequency grid spacing must be positive");
  }
  samples_.resize(n_points);
  const auto half = static_cast<std::ptrdiff_t>(n_points / 2);
  for (std::size_t k = 0; k < n_points; ++k) {
    samples_[k] = static_cast<double>(static_cast<std::ptrdiff_t>(k) - half) * delta_omega;
  }
}

TimeAxis::TimeAxis(const FrequencyGrid& grid)
    : TimeAxis(grid.size(), units::kTwoPi / (static_cast<double>(grid.size()) * grid.delta_omega())) {}

TimeAxis::TimeAxis(std::size_t n_points, double delta_t) : delta_t_(delta_t), samples_(n_points) {
  const auto half = static_cast<std::ptrdiff_t>(n_points / 2);
  for (std::size_t k = 0; k < n_points; ++k) {
    samples_[k] = static_cast<double>(static_cast<std::ptrdiff_t>(k) - half) * delta_t;
  }
}

ComplexSpectrum::ComplexSpectrum(FrequencyGrid g, std::vector<Complex> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.size()) {
    throw ConfigError("spectrum length does not match its grid");
  }
}

ComplexSpectrum::ComplexSpectrum(FrequencyGrid g) : grid(std::move(g)), values(grid.size()) {}

std::vector<Complex> centered_fft(std::span<const Complex> input) {
  return centered_transform(input, FFTW_FORWARD);
}

std::vector<Complex> centered_ifft(std::span<const Complex> input) {
  return centered_transform(input, FFTW_BACKWARD);
}

TimeSignal forward_fft(const ComplexSpectrum& spectrum) {
  return TimeSignal{TimeAxis(spectrum.grid), centered_fft(spectrum.values)};
}

ComplexSpectrum inverse_fft(const TimeSignal& signal, const FrequencyGrid& grid) {
  if (signal.values.size() != grid.size()) {
    throw ConfigError("time signal length does not match the frequency grid");
  }
  return ComplexSpectrum(grid, centered_ifft(signal.values));
}

std::vector<Complex> dft(std::span<const Complex> input) {
  return unitary_transform(input, FFTW_FORWARD);
}

std::vector<Complex> idft(std::span<const Complex> input) {
  return unitary_transform(input, FFTW_BACKWARD);
}

std::vector<Complex> hilbert_analytic(std::span<const double> real_sequence) {
  const auto n = real_sequence.size();
  if (n == 0 || n % 2 != 0) {
    throw ConfigError("analytic signal needs an even, non-empty input; got length " +
                      std::to_string(n));
  }
  std::vector<Complex> x(real_sequence.begin(), real_sequence.end());
  auto spectrum = dft(x);
  const auto half = n / 2;
  for (std::size_t k = 1; k < half; ++k) spectrum[k] *= 2.0;
  for (std::size_t k = half + 1; k < n; ++k) spectrum[k] = 0.0;
  return idft(spectrum);
}

std::optional<double> fwhm_at(std::span<const double> samples, std::span<const double> axis,
                              std::size_t peak_index) {
  const auto n = samples.size();
  if (peak_index == 0 || peak_index + 1 >= n) return std::nullopt;
  const double half = 0.5 * samples[peak_index];

  auto crossing = [&](std::size_t inner, std::size_t outer) {
    const double s0 = samples[inner];
    const double s1 = samples[outer];
    if (s1 == half) return axis[outer];
    const double frac = (s0 - half) / (s0 - s1);
    return axis[inner] + frac * (axis[outer] - axis[inner]);
  };

  std::optional<double> left;
  for (std::size_t j = peak_index; j-- > 0;) {
    if (samples[j] <= half) {
      left = crossing(j + 1, j);
      break;
    }
  }
  std::optional<double> right;
  for (std::size_t j = peak_index + 1; j < n; ++j) {
    if (samples[j] <= half) {
      right = crossing(j - 1, j);
      break;
    }
  }
  if (!left || !right) return std::nullopt;
  return *right - *left;
}

double fwhm(std::span<const double> samples, std::span<const double> axis) {
  if (samples.size() != axis.size() || samples.size() < 3) {
    throw AnalysisError(AnalysisFailure::NoMeasurableWidth, "fwhm needs >= 3 matched samples");
  }
  const auto it = std::max_element(samples.begin(), samples.end());
  const double peak = *it;
  if (std::count(samples.begin(), samples.end(), peak) > 1) {
    throw AnalysisError(AnalysisFailure::NoMeasurableWidth, "global maximum is not unique");
  }
  const auto index = static_cast<std::size_t>(it - samples.begin());
  auto width = fwhm_at(samples, axis, index);
  if (!width) {
    throw AnalysisError(AnalysisFailure::NoMeasurableWidth,
                        "maximum at boundary or half-maximum crossing missing");
  }
  return *width;
}

std::vector<Peak> find_peaks(std::span<const double> samples, std::span<const double> axis,
                             double min_prominence, double exclusion_halfwidth) {
  if (exclusion_halfwidth < 0.0) {
    throw ConfigError("peak exclusion half-width must be non-negative");
  }
  if (samples.size() != axis.size()) {
    throw ConfigError("find_peaks: samples and axis differ in length");
  }
  std::vector<Peak> peaks;
  const auto n = samples.size();
  if (n < 3) return peaks;

  std::size_t i = 1;
  while (i + 1 < n) {
    if (samples[i - 1] < samples[i]) {
      std::size_t ahead = i + 1;
      while (ahead + 1 < n && samples[ahead] == samples[i]) ++ahead;
      if (samples[ahead] < samples[i]) {
        const std::size_t mid = (i + ahead - 1) / 2;
        const double h = samples[mid];

        double left_min = h;
        for (std::size_t j = mid; j-- > 0;) {
          if (samples[j] > h) break;
          left_min = std::min(left_min, samples[j]);
        }
        double right_min = h;
        for (std::size_t j = mid + 1; j < n; ++j) {
          if (samples[j] > h) break;
          right_min = std::min(right_min, samples[j]);
        }
        const double prominence = h - std::max(left_min, right_min);

        const bool excluded = exclusion_halfwidth > 0.0 && std::abs(axis[mid]) <= exclusion_halfwidth;
        if (!excluded && prominence >= min_prominence) {
          const double ym = samples[mid - 1];
          const double yp = samples[mid + 1];
          const double denom = ym - 2.0 * h + yp;
          double offset = 0.0;
          if (denom != 0.0) offset = std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
          const double pitch = 0.5 * (axis[mid + 1] - axis[mid - 1]);
          Peak p;
          p.position = axis[mid] + offset * pitch;
          p.height = h - 0.25 * (ym - yp) * offset;
          p.prominence = prominence;
          p.fwhm = fwhm_at(samples, axis, mid);
          p.index = mid;
          peaks.push_back(p);
        }
        i = ahead;
      }
    }
    ++i;
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak& a, const Peak& b) { return a.position < b.position; });
  return peaks;
}

}  // namespace qoct
