// SPDX-License-Identifier: Apache-2.0
// Acceptance criteria: one PASS/FAIL line each, with its runtime budget.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qoct/analysis.hpp"
#include "qoct/cli.hpp"
#include "qoct/config.hpp"
#include "qoct/io.hpp"
#include "qoct/units.hpp"
#include "support/tempdir.hpp"

using namespace qoct;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

InterferometerConfig balanced(double z_ref_um) {
  InterferometerConfig c;
  c.t_signal = 1.0;
  c.reference_delay_tau = units::single_trip_um_to_delay(z_ref_um);
  return c;
}

PixelSpectrum simulate_fd(const InterferometerConfig& cfg, const SampleModel& sample,
                          const SpectrometerConfig& spec = {}, const NoiseConfig& noise = {}) {
  PdcSourceSpec source;
  return acquire_spectrum(spectral_interferogram(cfg, source, sample, fd_simulation_grid(source, spec)), spec, noise);
}

TdTrace simulate_td(const InterferometerConfig& cfg, const PdcSourceSpec& source, const SampleModel& sample,
                    const StageScanConfig& scan, const NoiseConfig& noise = {}) {
  return acquire_td_trace(cfg, source, sample, td_simulation_grid(cfg, source, sample, scan), scan, noise);
}

std::optional<Peak> tallest_positive(const std::vector<Peak>& peaks) {
  std::optional<Peak> best;
  for (const auto& p : peaks) {
    if (p.position > 0.0 && (!best || p.height > best->height)) best = p;
  }
  return best;
}

const SampleModel kMirror{{{1.0, 0.0}}, 1.0};

// Single mirror, rectangular 14.2 nm band, no dispersion, noiseless.
double resolution_fwhm(const InterferometerConfig& cfg, double* pitch = nullptr) {
  const auto a = fd_ascan(simulate_fd(cfg, kMirror));
  if (pitch) *pitch = a.pitch_um();
  const auto p = tallest_positive(a.peaks);
  return p && p->fwhm ? *p->fwhm : 0.0;
}

Verdict benchmarks() {
  const double dz = axial_resolution(832.0, 14.2, 1.2);
  const double range = fd_scan_range(832.0, 14.2, 670);
  return {std::abs(dz - 29.2) <= 0.05 && std::abs(range - 8.2) <= 0.05,
          fmt("dz %.3f um, dLz %.3f mm", dz, range)};
}

Verdict su11_gain() {
  const auto ratios = log_spaced(0.3, 30.0, 201);
  bool ok = true;
  std::string detail;
  for (double t_idler : {0.4, 0.2}) {
    InterferometerConfig c;
    c.t_signal = 1.0 / 3.0;
    c.t_idler = t_idler;
    const auto best = sweep_gain_ratio(c, ratios).argmax();
    ok = ok && std::abs(best.gain_ratio / 3.0 - 1.0) <= 0.05 &&
         std::abs(best.visibility - std::sqrt(t_idler)) <= 1e-6;
    detail += fmt("T_i %.1f: ratio %.4f V %.7f; ", t_idler, best.gain_ratio, best.visibility);
  }
  return {ok, detail.substr(0, detail.size() - 2)};
}

Verdict ic_gain() {
  InterferometerConfig c;
  c.geometry = Geometry::IC;
  c.t_signal_1 = 0.32;
  c.t_signal_2 = 0.28;
  const auto best = sweep_gain_ratio(c, log_spaced(0.1, 10.0, 201)).argmax();
  return {std::abs(best.gain_ratio / 0.875 - 1.0) <= 0.05,
          fmt("argmax %.4f, formula %.4f", best.gain_ratio, optimal_gain_ratio(c))};
}

Verdict resolution() {
  double pitch = 0.0;
  const double w = resolution_fwhm(balanced(1200.0), &pitch);
  return {pitch <= 2.0 && std::abs(w / 29.2 - 1.0) <= 0.02, fmt("FWHM %.3f um, pitch %.3f um", w, pitch)};
}

Verdict separation() {
  std::mt19937_64 rng(1790);
  std::uniform_real_distribution<double> fd_ref(200.0, 1500.0);
  std::uniform_real_distribution<double> td_ref(50.0, 150.0);
  bool ok = true;
  double fd_worst = 0.0;
  double td_worst = 0.0;
  double fd_pitch = 0.0;
  double td_pitch = 0.0;

  SpectrometerConfig spec;
  spec.resolution_ghz = 9.2;  // 670 pixels spanning the 14.2 nm band
  const SampleModel fd_sample{{{0.25, 0.0}, {0.25, 1790.0}}, 1.0};
  for (int k = 0; k < 5; ++k) {
    const auto a = fd_ascan(simulate_fd(balanced(fd_ref(rng)), fd_sample, spec));
    const auto s = layer_separations(a.peaks);
    fd_pitch = a.pitch_um();
    const double err = s.size() == 1 ? std::abs(s[0] - 1790.0) : 1e9;
    fd_worst = std::max(fd_worst, err);
    ok = ok && err <= 2.0 * fd_pitch;
  }

  PdcSourceSpec source;
  const SampleModel td_sample{{{0.5, 0.0}, {0.5, 1790.0}}, 1.0};
  StageScanConfig scan;
  scan.start_um = -1800.0;
  scan.step_um = 0.2;
  scan.n_steps = 10000;
  for (int k = 0; k < 5; ++k) {
    const auto e = td_envelope(simulate_td(balanced(-td_ref(rng)), source, td_sample, scan));
    td_pitch = e.axis_um[1] - e.axis_um[0];
    const double err = e.peaks.size() == 2 ? std::abs(e.peaks[1].position - e.peaks[0].position - 1790.0) : 1e9;
    td_worst = std::max(td_worst, err);
    ok = ok && err <= 2.0 * td_pitch;
  }
  return {ok, fmt("FD worst %.3f um (pitch %.3f), TD worst %.3f um (pitch %.3f)", fd_worst, fd_pitch, td_worst,
                  td_pitch)};
}

Verdict fd_compensation() {
  auto cfg = balanced(1200.0);
  const double limit = resolution_fwhm(cfg);
  cfg.internal_phi2 = 11500.0;
  cfg.internal_phi3 = -45000.0;
  const auto r = dispersion_compensate(simulate_fd(cfg, kMirror)).result;
  // The correction is applied with the opposite sign of the injected phase.
  const bool ok = std::abs(r.phi2 + 11500.0) <= 200.0 && std::abs(r.phi3 - 45000.0) <= 2000.0 &&
                  std::abs(r.fwhm_after / limit - 1.0) <= 0.05;
  return {ok, fmt("phi2 %.1f fs2, phi3 %.1f fs3, FWHM %.2f -> %.2f um (limit %.2f)", r.phi2, r.phi3, r.fwhm_before,
                  r.fwhm_after, limit)};
}

Verdict td_geometry_ordering() {
  PdcSourceSpec source;
  StageScanConfig scan;
  scan.start_um = -400.0;
  scan.step_um = 0.2;
  scan.n_steps = 5000;
  const auto base = balanced(-100.0);
  const double limit = td_envelope(simulate_td(base, source, kMirror, scan)).peaks.at(0).fwhm.value();

  auto ic = base;
  ic.geometry = Geometry::IC;
  ic.t_signal.reset();
  ic.t_signal_1 = 1.0;
  ic.t_signal_2 = 1.0;
  ic.internal_phi2 = 10000.0;
  auto su = base;
  su.internal_phi2 = 20000.0;  // the signal passes the dispersive element twice

  const auto ic_c = td_compensate(simulate_td(ic, source, kMirror, scan)).result;
  const auto su_c = td_compensate(simulate_td(su, source, kMirror, scan)).result;
  const bool ok = su_c.fwhm_before > ic_c.fwhm_before && std::abs(ic_c.fwhm_after / limit - 1.0) <= 0.05 &&
                  std::abs(su_c.fwhm_after / limit - 1.0) <= 0.05;
  return {ok, fmt("SU11 %.1f -> %.1f um, IC %.1f -> %.1f um, limit %.1f um", su_c.fwhm_before, su_c.fwhm_after,
                  ic_c.fwhm_before, ic_c.fwhm_after, limit)};
}

Verdict sensitivity() {
  PdcSourceSpec source;
  SensitivityOptions o;
  o.t_idler_values = {0.01, 0.02, 0.05, 0.1};
  o.repeats = 10;
  o.noise = {true, 42};
  const auto r = sensitivity_sweep(balanced(600.0), source, kMirror, SpectrometerConfig{}, o);
  const SensitivityLevel* level = nullptr;
  for (const auto& l : r.levels) {
    if (l.t_idler == 0.05) level = &l;
  }
  if (!level) return {false, "level 0.05 missing"};
  const double sigmas = (level->mean_visibility - r.noise_mean) / r.noise_std;
  return {level->detected && sigmas >= 3.0,
          fmt("V(0.05) %.3f vs noise %.3f +- %.4f (%.1f sigma), threshold %.3g", level->mean_visibility, r.noise_mean,
              r.noise_std, sigmas, r.threshold.value_or(NAN))};
}

Verdict averaging() {
  PdcSourceSpec source;
  source.envelope = Envelope::SincFromMismatch;
  source.mismatch_b1 = 10.0;
  StageScanConfig scan;
  scan.start_um = -200.0;
  scan.n_steps = 4000;
  const auto cfg = balanced(-100.0);
  const auto grid = td_simulation_grid(cfg, source, kMirror, scan);
  std::vector<TdTrace> traces;
  for (std::uint64_t i = 0; i < 16; ++i) {
    traces.push_back(acquire_td_trace(cfg, source, kMirror, grid, scan, {true, derive_seed(9, i)}));
  }
  auto gain = [&](std::size_t m) {
    const auto a = coherent_average({traces.begin(), traces.begin() + static_cast<std::ptrdiff_t>(m)}, 0);
    return a.after.snr / a.before.snr;
  };
  const double g4 = gain(4);
  const double g16 = gain(16);
  return {g4 >= 0.9 * 2.0 && g16 >= 0.9 * 4.0, fmt("M=4 x%.2f, M=16 x%.2f", g4, g16)};
}

Verdict determinism() {
  testing::TempDir dir;
  RunConfig fd;
  fd.sample.layers = {{0.5, 0.0}, {0.3, 700.0}};
  fd.interferometer = balanced(500.0);
  fd.spectrometer = SpectrometerConfig{};
  fd.noise = {true, 77};
  RunConfig td = fd;
  td.spectrometer.reset();
  td.interferometer = balanced(-100.0);
  StageScanConfig scan;
  scan.start_um = -900.0;
  scan.n_steps = 6000;
  td.stage = scan;
  bool ok = true;
  std::size_t compared = 0;
  for (const auto& [name, cfg] : {std::pair{"fd", fd}, std::pair{"td", td}}) {
    const auto path = dir / (std::string(name) + ".json");
    io::atomic_write(path, serialize_config(cfg));
    std::vector<std::string> first;
    for (int run = 0; run < 2; ++run) {
      const auto out = (dir / name).string();
      const std::vector<std::string> args{"qoct", "simulate", "--config", path.string(), "--seed", "2024", "--out", out};
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream log;
      if (cli::run(static_cast<int>(argv.size()), argv.data(), log, log) != 0) return {false, log.str()};
      std::vector<std::string> files;
      for (const auto& f : std::filesystem::directory_iterator(dir / name)) files.push_back(io::read_text(f.path()));
      std::sort(files.begin(), files.end());
      if (run == 0) {
        first = files;
      } else {
        ok = ok && files == first;
        compared += files.size();
      }
    }
  }
  return {ok && compared == 4, fmt("%zu files compared byte for byte", compared)};
}

Verdict numerics() {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  double parseval = 0.0;
  double round_trip = 0.0;
  double real_part = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = std::size_t{1} << (6 + trial % 8);
    std::vector<Complex> x(n);
    std::vector<double> r(n);
    double norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = {g(rng), g(rng)};
      r[k] = g(rng);
      norm += std::norm(x[k]);
    }
    const auto y = centered_fft(x);
    double after = 0.0;
    for (const auto& v : y) after += std::norm(v);
    parseval = std::max(parseval, std::abs(after - norm) / norm);
    const auto back = centered_ifft(y);
    for (std::size_t k = 0; k < n; ++k) round_trip = std::max(round_trip, std::abs(back[k] - x[k]) / std::sqrt(norm));
    const auto a = hilbert_analytic(r);
    for (std::size_t k = 0; k < n; ++k) real_part = std::max(real_part, std::abs(a[k].real() - r[k]));
  }

  double scale_dev = 0.0;
  SpectrometerConfig spec;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double delay = units::single_trip_um_to_delay(300.0 + 700.0 * u(rng));
    const double v = 0.05 + 0.85 * u(rng);
    const double phase = 6.0 * u(rng);
    PixelSpectrum px;
    px.wavelength_nm = spec.wavelength_axis_nm();
    for (double l : px.wavelength_nm) {
      px.counts.push_back(100.0 * (1.0 + v * std::cos(units::angular_frequency(l) * delay + phase)) +
                          4.0 * (u(rng) - 0.5));
    }
    const double before = extract_visibility(px, 826.0, 838.0, delay).visibility;
    const double s = std::exp(std::log(1e-3) + std::log(1e6) * u(rng));
    for (auto& c : px.counts) c *= s;
    scale_dev = std::max(scale_dev, std::abs(extract_visibility(px, 826.0, 838.0, delay).visibility / before - 1.0));
  }
  const bool ok = parseval <= 1e-10 && round_trip <= 1e-12 && real_part <= 1e-12 && scale_dev <= 1e-9;
  return {ok, fmt("Parseval %.1e, round trip %.1e, Hilbert real part %.1e, visibility scaling %.1e", parseval,
                  round_trip, real_part, scale_dev)};
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Verdict()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"benchmark formulas", 1.0, benchmarks},
      {"SU11 gain optimum", 1.0, su11_gain},
      {"IC gain optimum", 1.0, ic_gain},
      {"axial resolution closed loop", 5.0, resolution},
      {"layer separation FD and TD", 30.0, separation},
      {"FD dispersion compensation", 60.0, fd_compensation},
      {"TD FWHM ordering SU11 vs IC", 60.0, td_geometry_ordering},
      {"sensitivity at T_idler 0.05", 120.0, sensitivity},
      {"coherent averaging SNR", 120.0, averaging},
      {"simulate determinism", 10.0, determinism},
      {"numerical property suites", 10.0, numerics},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = v.pass && t <= c.budget_s;
    failures += !pass;
    std::printf("%s %2zu %-30s %7.2f s / %5.0f s  %s\n", pass ? "PASS" : "FAIL", i + 1, c.name, t, c.budget_s,
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
