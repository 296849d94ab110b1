// SPDX-License-Identifier: Apache-2.0
#include "qoct/interferometer.hpp"

#include <algorithm>
#include <cmath>

#include "qoct/errors.hpp"
#include "qoct/units.hpp"

namespace qoct {

namespace {

void check_transmission(const std::optional<double>& t, const char* name, bool required) {
  if (required && !t) throw ConfigError(std::string("interferometer.") + name + " is required");
  if (!required && t) {
    throw ConfigError(std::string("interferometer.") + name + " does not apply to this geometry");
  }
  if (t && !(*t > 0.0 && *t <= 1.0)) {
    throw ConfigError(std::string("interferometer.") + name + " must lie in (0, 1]");
  }
}

void check_literal_sample(const SampleModel& sample) {
  if (sample.layers.size() != 2) {
    throw ConfigError("eq2_literal_mode supports exactly two layers, got " +
                      std::to_string(sample.layers.size()));
  }
}

}  // namespace

std::string to_string(Geometry g) { return g == Geometry::SU11 ? "SU11" : "IC"; }

Geometry geometry_from_string(const std::string& s) {
  if (s == "SU11") return Geometry::SU11;
  if (s == "IC") return Geometry::IC;
  throw ConfigError("unknown geometry '" + s + "' (expected SU11 or IC)");
}

void InterferometerConfig::validate() const {
  auto check_gain = [](double g, const char* name) {
    if (!(g >= 0.0 && g <= kMaxGain)) {
      throw ConfigError(std::string("interferometer.") + name + " must lie in [0, 0.3] (low-gain regime)");
    }
  };
  check_gain(gain_g1, "gain_g1");
  check_gain(gain_g2, "gain_g2");
  if (gain_g1 == 0.0 && gain_g2 == 0.0) throw ConfigError("interferometer: both gains are zero");
  const bool su11 = geometry == Geometry::SU11;
  check_transmission(t_signal, "t_signal", su11);
  check_transmission(t_signal_1, "t_signal_1", !su11);
  check_transmission(t_signal_2, "t_signal_2", !su11);
  if (!(t_idler > 0.0 && t_idler <= 1.0)) throw ConfigError("interferometer.t_idler must lie in (0, 1]");
  if (!std::isfinite(internal_phi2) || !std::isfinite(internal_phi3) ||
      !std::isfinite(reference_delay_tau)) {
    throw ConfigError("interferometer phase/delay coefficients must be finite");
  }
}

PathWeights path_weights(const InterferometerConfig& cfg) {
  cfg.validate();
  PathWeights w{};
  const double g1sq = cfg.gain_g1 * cfg.gain_g1;
  const double g2sq = cfg.gain_g2 * cfg.gain_g2;
  if (cfg.geometry == Geometry::SU11) {
    const double ts = *cfg.t_signal;
    w.first = std::sqrt(ts * cfg.t_idler) * cfg.gain_g1;
    w.second = cfg.gain_g2;
    w.first_signal = ts * g1sq;
    w.denominator = ts * g1sq + g2sq;
  } else {
    const double t1 = *cfg.t_signal_1;
    const double t2 = *cfg.t_signal_2;
    w.first = std::sqrt(t1 * cfg.t_idler) * cfg.gain_g1;
    w.second = std::sqrt(t2) * cfg.gain_g2;
    w.first_signal = t1 * g1sq;
    w.denominator = t1 * g1sq + t2 * g2sq;
  }
  return w;
}

InterferometerConfig with_gain_ratio(const InterferometerConfig& cfg, double ratio) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) throw ConfigError("gain ratio must be positive");
  InterferometerConfig out = cfg;
  const double total = cfg.total_gain_squared();
  out.gain_g1 = std::sqrt(total * ratio / (1.0 + ratio));
  out.gain_g2 = std::sqrt(total / (1.0 + ratio));
  return out;
}

ComplexSpectrum joint_amplitude_out(const InterferometerConfig& cfg, const PdcSourceSpec& source,
                                    const SampleModel& sample, const FrequencyGrid& grid) {
  const auto w = path_weights(cfg);
  const auto f = jsa(source, grid);
  const auto r = reflection_coefficient(sample, grid);
  ComplexSpectrum out(grid);
  const double tau = cfg.reference_delay_tau;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double dw = grid[k];
    const double phase = (grid.center_idler() + dw) * tau + cfg.internal_phase(dw);
    out.values[k] = w.first * f.values[k] * r.values[k] * std::polar(1.0, phase) + w.second * f.values[k];
  }
  return out;
}

RealSpectrum spectral_interferogram(const InterferometerConfig& cfg, const PdcSourceSpec& source,
                                    const SampleModel& sample, const FrequencyGrid& grid) {
  RealSpectrum out{grid, std::vector<double>(grid.size())};
  if (cfg.eq2_literal_mode) {
    check_literal_sample(sample);
    sample.validate();
    const auto w = path_weights(cfg);
    const double v = visibility(cfg);
    const auto f = jsa(source, grid);
    const double tau = cfg.reference_delay_tau;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double dw = grid[k];
      const double base = cfg.internal_phase(dw) + tau * dw;
      double fringes = 0.0;
      for (const auto& layer : sample.layers) {
        const double delay = units::single_trip_um_to_delay(layer.opd_um);
        fringes += layer.reflectivity * layer.reflectivity * std::cos(base + delay * dw);
      }
      out.values[k] = std::norm(f.values[k]) * w.denominator * (1.0 + v * fringes);
    }
    return out;
  }

  const auto w = path_weights(cfg);
  const auto f = jsa(source, grid);
  const auto f_int = joint_amplitude_out(cfg, source, sample, grid);
  const double lost = 1.0 - cfg.t_idler * sample.total_reflected_power();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.values[k] = std::norm(f_int.values[k]) + w.first_signal * std::norm(f.values[k]) * lost;
  }
  return out;
}

kernels::CountRateTerms count_rate_terms(const InterferometerConfig& cfg, const PdcSourceSpec& source,
                                         const SampleModel& sample, const FrequencyGrid& grid) {
  const auto w = path_weights(cfg);
  const auto f = jsa(source, grid);
  kernels::CountRateTerms terms;
  terms.weight = grid.delta_omega();

  if (cfg.eq2_literal_mode) {
    check_literal_sample(sample);
    sample.validate();
    const double v = visibility(cfg);
    terms.carrier = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double intensity = std::norm(f.values[k]);
      if (intensity == 0.0) continue;
      const double dw = grid[k];
      terms.constant += intensity * w.denominator;
      Complex b = 0.0;
      for (const auto& layer : sample.layers) {
        const double delay = units::single_trip_um_to_delay(layer.opd_um);
        b += layer.reflectivity * layer.reflectivity * std::polar(1.0, cfg.internal_phase(dw) + delay * dw);
      }
      terms.detuning.push_back(dw);
      terms.fringe.push_back(0.5 * intensity * w.denominator * v * b);
    }
    return terms;
  }

  const auto r = reflection_coefficient(sample, grid);
  const double lost = 1.0 - cfg.t_idler * sample.total_reflected_power();
  terms.carrier = grid.center_idler();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double intensity = std::norm(f.values[k]);
    if (intensity == 0.0) continue;
    const double dw = grid[k];
    terms.constant += intensity * (w.first * w.first * std::norm(r.values[k]) +
                                   w.second * w.second + w.first_signal * lost);
    const Complex b = w.first * w.second * intensity * r.values[k] * std::polar(1.0, cfg.internal_phase(dw));
    if (b == Complex(0.0)) continue;
    terms.detuning.push_back(dw);
    terms.fringe.push_back(b);
  }
  return terms;
}

std::vector<double> temporal_count_rate(const InterferometerConfig& cfg, const PdcSourceSpec& source,
                                        const SampleModel& sample, const FrequencyGrid& grid,
                                        std::span<const double> tau_values,
                                        kernels::Execution execution) {
  for (double t : tau_values) {
    if (!std::isfinite(t)) throw ConfigError("temporal_count_rate: delays must be finite");
  }
  const auto terms = count_rate_terms(cfg, source, sample, grid);
  return kernels::count_rate(terms, tau_values, execution);
}

double visibility(const InterferometerConfig& cfg) {
  const auto w = path_weights(cfg);
  return 2.0 * w.first * w.second / w.denominator;
}

double optimal_gain_ratio(const InterferometerConfig& cfg) {
  cfg.validate();
  if (cfg.geometry == Geometry::SU11) return 1.0 / *cfg.t_signal;
  return *cfg.t_signal_2 / *cfg.t_signal_1;
}

const VisibilityPoint& VisibilityCurve::argmax() const {
  if (points.empty()) throw ConfigError("empty visibility curve");
  return *std::max_element(points.begin(), points.end(),
                           [](const auto& a, const auto& b) { return a.visibility < b.visibility; });
}

VisibilityCurve sweep_gain_ratio(const InterferometerConfig& cfg, std::span<const double> ratios) {
  VisibilityCurve curve;
  curve.points.resize(ratios.size());
  const auto n = static_cast<std::ptrdiff_t>(ratios.size());
  for (double r : ratios) {
    if (!(r > 0.0)) throw ConfigError("gain ratios must be positive");
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto c = with_gain_ratio(cfg, ratios[i]);
    curve.points[i] = {ratios[i], visibility(c), 0.0};
  }
  return curve;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi > lo) || n < 2) throw ConfigError("log_spaced needs 0 < lo < hi and n >= 2");
  std::vector<double> out(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return out;
}

}  // namespace qoct
