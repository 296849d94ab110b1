// SPDX-License-Identifier: Apache-2.0
#include "qoct/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <numeric>
#include <ostream>

#include "qoct/analysis.hpp"
#include "qoct/config.hpp"
#include "qoct/errors.hpp"
#include "qoct/io.hpp"
#include "qoct/units.hpp"

namespace qoct::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

FrequencyGrid simulation_grid(const RunConfig& c, bool fd) {
  if (c.grid) return make_source_grid(c.source, c.grid->n_points, c.grid->delta_omega);
  return fd ? fd_simulation_grid(c.source, *c.spectrometer)
            : td_simulation_grid(c.interferometer, c.source, c.sample, *c.stage);
}

json peaks_json(const std::vector<Peak>& peaks) {
  json out = json::array();
  for (const auto& p : peaks) {
    out.push_back({{"position_um", p.position},
                   {"height", p.height},
                   {"prominence", p.prominence},
                   {"fwhm_um", p.fwhm ? json(*p.fwhm) : json(nullptr)}});
  }
  return out;
}

json compensation_json(const CompensationResult& r) {
  return {{"phi2_fs2", r.phi2},         {"phi3_fs3", r.phi3},
          {"fwhm_before_um", r.fwhm_before}, {"fwhm_after_um", r.fwhm_after},
          {"iterations", r.iterations},  {"converged", r.converged},
          {"at_bound", r.at_bound}};
}

void write_json(const fs::path& path, const json& j) { io::atomic_write(path, j.dump(2) + "\n"); }

// Fringe delay that a single-layer FD measurement shows, for the strongest layer.
double fringe_delay(const RunConfig& c) {
  const auto it = std::max_element(c.sample.layers.begin(), c.sample.layers.end(),
                                   [](const Layer& a, const Layer& b) { return a.reflectivity < b.reflectivity; });
  return c.interferometer.reference_delay_tau + units::single_trip_um_to_delay(it->opd_um);
}

std::pair<double, double> default_band(const SpectrometerConfig& s) {
  return {s.center_lambda_nm - 5.0, s.center_lambda_nm + 5.0};
}

}  // namespace

std::pair<double, double> parse_band(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("--band must look like LO:HI (nm), got '" + text + "'");
  try {
    std::size_t used_lo = 0;
    std::size_t used_hi = 0;
    const std::string lo_s = text.substr(0, colon);
    const std::string hi_s = text.substr(colon + 1);
    const double lo = std::stod(lo_s, &used_lo);
    const double hi = std::stod(hi_s, &used_hi);
    if (used_lo != lo_s.size() || used_hi != hi_s.size() || !(hi > lo)) throw std::invalid_argument("band");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw ConfigError("--band must look like LO:HI (nm) with LO < HI, got '" + text + "'");
  }
}

void simulate(const SimulateArgs& args, std::ostream& log) {
  auto c = load_config(args.config);
  if (args.seed) c.noise.seed = *args.seed;
  if (args.out) c.output_dir = args.out->string();
  if (c.spectrometer.has_value() == c.stage.has_value()) {
    throw ConfigError("simulate needs exactly one of the spectrometer (fd) or stage (td) sections");
  }
  const bool fd = c.spectrometer.has_value();
  const std::string mode = fd ? "fd" : "td";
  if (args.mode && *args.mode != mode) {
    throw ConfigError("--mode " + *args.mode + " does not match the config, which describes " + mode);
  }
  const auto grid = simulation_grid(c, fd);
  const fs::path dir = c.output_dir;
  json manifest;
  manifest["command"] = "simulate";
  manifest["mode"] = mode;
  manifest["seed"] = c.noise.seed;
  manifest["grid"] = {{"n_points", grid.size()}, {"delta_omega_rad_per_fs", grid.delta_omega()}};
  manifest["warnings"] = json::array();
  fs::path data_file;
  if (fd) {
    const auto s = spectral_interferogram(c.interferometer, c.source, c.sample, grid);
    const auto pixels = acquire_spectrum(s, *c.spectrometer, c.noise);
    data_file = dir / "interferogram_fd.csv";
    io::atomic_write(data_file, io::to_csv({"wavelength_nm", "counts"}, {pixels.wavelength_nm, pixels.counts}));
  } else {
    const auto trace = acquire_td_trace(c.interferometer, c.source, c.sample, grid, *c.stage, c.noise);
    if (trace.undersampled) {
      manifest["warnings"].push_back("stage step exceeds lambda_idler / 4: fringes are undersampled");
      log << "warning: stage step undersamples the idler fringes\n";
    }
    data_file = dir / "interferogram_td.csv";
    io::atomic_write(data_file, io::to_csv({"position_um", "counts"}, {trace.position_um, trace.counts}));
  }
  manifest["outputs"] = {data_file.filename().string()};
  manifest["config"] = json::parse(serialize_config(c));
  write_json(dir / "manifest.json", manifest);
  log << "wrote " << data_file.string() << "\n";
}

void analyze(const AnalyzeArgs& args, std::ostream& log) {
  const auto text = io::read_text(args.input);
  const auto header = io::csv_header(text);
  std::string mode;
  if (!header.empty() && header[0] == io::kFdColumns.first) mode = "fd";
  if (!header.empty() && header[0] == io::kTdColumns.first) mode = "td";
  if (args.mode) {
    if (*args.mode != "fd" && *args.mode != "td") throw ConfigError("--mode must be fd or td");
    if (!mode.empty() && *args.mode != mode) {
      throw ConfigError("--mode " + *args.mode + " does not match the CSV header");
    }
    mode = *args.mode;
  }
  if (mode.empty()) throw ConfigError("cannot tell fd from td: unexpected CSV header");

  json report;
  report["mode"] = mode;
  std::vector<double> axis;
  std::vector<double> amplitude;
  std::vector<Peak> peaks;
  if (mode == "fd") {
    const auto s = io::parse_interferogram(text, io::kFdColumns);
    const PixelSpectrum data{s.x, s.y};
    FdAscanOptions opts;
    opts.max_pitch_um = args.max_pitch_um;
    opts.relative_prominence = args.prominence;
    AScan ascan;
    if (args.compensate) {
      CompensationOptions copts;
      copts.ascan = opts;
      auto comp = dispersion_compensate(data, copts);
      report["compensation"] = compensation_json(comp.result);
      ascan = std::move(comp.ascan);
    } else {
      ascan = fd_ascan(data, opts);
    }
    report["axis_pitch_um"] = ascan.pitch_um();
    report["exclusion_um"] = ascan.exclusion_um;
    if (args.band_nm) {
      const auto v = extract_visibility(data, args.band_nm->first, args.band_nm->second);
      report["visibility"] = {{"value", v.visibility},
                              {"uncertainty", v.uncertainty},
                              {"periods", v.periods},
                              {"fringe_delay_fs", v.fringe_delay_fs}};
    }
    axis = std::move(ascan.axis_um);
    amplitude = std::move(ascan.amplitude);
    peaks = std::move(ascan.peaks);
  } else {
    if (args.band_nm) throw ConfigError("--band applies to fd spectra only");
    const auto s = io::parse_interferogram(text, io::kTdColumns);
    TdTrace trace{s.x, s.y, false};
    TdEnvelopeOptions opts;
    opts.fringe_lambda_nm = args.fringe_lambda_nm;
    opts.bandpass_halfwidth = args.bandpass;
    opts.relative_prominence = args.prominence;
    TdEnvelope env;
    if (args.compensate) {
      auto comp = td_compensate(trace, opts);
      report["compensation"] = compensation_json(comp.result);
      env = std::move(comp.envelope);
    } else {
      env = td_envelope(trace, opts);
    }
    report["axis_pitch_um"] = env.axis_um[1] - env.axis_um[0];
    axis = std::move(env.axis_um);
    amplitude = std::move(env.envelope);
    peaks = std::move(env.peaks);
  }
  report["peaks"] = peaks_json(peaks);
  report["layer_separations_um"] = mode == "fd" ? layer_separations(peaks) : [&] {
    std::vector<double> sep;
    for (std::size_t k = 1; k < peaks.size(); ++k) sep.push_back(peaks[k].position - peaks[k - 1].position);
    return sep;
  }();
  const auto snr = snr_report(amplitude, axis, peaks);
  report["snr"] = {{"signal_peak", snr.signal_peak}, {"noise_floor", snr.noise_floor}, {"snr", snr.snr}};
  const auto csv_name = mode == "fd" ? "ascan.csv" : "envelope.csv";
  io::atomic_write(args.out / csv_name, io::to_csv({"opd_um", "amplitude"}, {axis, amplitude}));
  write_json(args.out / "report.json", report);
  log << "wrote " << (args.out / csv_name).string() << " and report.json\n";
}

void sweep_gain(const SweepArgs& args, std::ostream& log) {
  auto c = load_config(args.config);
  if (args.seed) c.noise.seed = *args.seed;
  if (args.out) c.output_dir = args.out->string();
  if (args.ratios.size() < 3) throw ConfigError("--ratios needs at least 3 values");
  for (double r : args.ratios) {
    if (!(r > 0.0)) throw ConfigError("--ratios must be positive");
  }
  if (args.repeats < 1) throw ConfigError("--repeats must be >= 1");

  VisibilityCurve curve;
  std::string method = "formula";
  if (c.spectrometer) {
    method = "simulated";
    const auto band = args.band_nm.value_or(default_band(*c.spectrometer));
    const auto grid = simulation_grid(c, true);
    const double delay = fringe_delay(c);
    const std::size_t reps = c.noise.enabled ? args.repeats : 1;
    std::vector<RealSpectrum> spectra;
    for (double r : args.ratios) {
      spectra.push_back(spectral_interferogram(with_gain_ratio(c.interferometer, r), c.source, c.sample, grid));
    }
    const std::size_t n_tasks = args.ratios.size() * reps;
    std::vector<double> v(n_tasks);
    std::vector<std::string> errors(n_tasks);
    const auto tasks = static_cast<std::ptrdiff_t>(n_tasks);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t t = 0; t < tasks; ++t) {
      const auto task = static_cast<std::size_t>(t);
      NoiseConfig noise = c.noise;
      noise.seed = derive_seed(c.noise.seed, task);
      try {
        const auto pixels = acquire_spectrum(spectra[task / reps], *c.spectrometer, noise);
        v[task] = extract_visibility(pixels, band.first, band.second, delay).visibility;
      } catch (const std::exception& e) {
        errors[task] = e.what();
      }
    }
    for (std::size_t task = 0; task < n_tasks; ++task) {
      if (!errors[task].empty()) {
        // Reproduce serially to surface the typed error.
        NoiseConfig noise = c.noise;
        noise.seed = derive_seed(c.noise.seed, task);
        const auto pixels = acquire_spectrum(spectra[task / reps], *c.spectrometer, noise);
        extract_visibility(pixels, band.first, band.second, delay);
      }
    }
    for (std::size_t i = 0; i < args.ratios.size(); ++i) {
      const auto first = v.begin() + static_cast<std::ptrdiff_t>(i * reps);
      const auto last = first + static_cast<std::ptrdiff_t>(reps);
      const double mean = std::accumulate(first, last, 0.0) / static_cast<double>(reps);
      double var = 0.0;
      for (auto it = first; it != last; ++it) var += (*it - mean) * (*it - mean);
      const double stderr_ = reps > 1 ? std::sqrt(var / static_cast<double>(reps - 1) / static_cast<double>(reps)) : 0.0;
      curve.points.push_back({args.ratios[i], mean, stderr_});
    }
  } else {
    curve = sweep_gain_ratio(c.interferometer, args.ratios);
  }

  std::vector<double> ratios;
  std::vector<double> vis;
  std::vector<double> err;
  for (const auto& p : curve.points) {
    ratios.push_back(p.gain_ratio);
    vis.push_back(p.visibility);
    err.push_back(p.uncertainty);
  }
  const fs::path dir = c.output_dir;
  io::atomic_write(dir / "visibility_curve.csv", io::to_csv({"gain_ratio", "visibility", "stderr"}, {ratios, vis, err}));
  const auto fit = fit_transmissions(curve, c.interferometer.geometry);
  json out;
  out["geometry"] = to_string(c.interferometer.geometry);
  out["method"] = method;
  out["seed"] = c.noise.seed;
  out["argmax_ratio"] = curve.argmax().gain_ratio;
  out["argmax_visibility"] = curve.argmax().visibility;
  out["optimal_ratio_formula"] = optimal_gain_ratio(c.interferometer);
  json f = {{"t_idler", fit.t_idler}, {"rms_residual", fit.rms_residual}};
  if (fit.geometry == Geometry::SU11) {
    f["t_signal"] = fit.t_signal;
  } else {
    f["t_signal_2_over_t_signal_1"] = fit.t_signal;
  }
  out["fit"] = f;
  write_json(dir / "sweep.json", out);
  log << "wrote " << (dir / "visibility_curve.csv").string() << " and sweep.json\n";
}

void benchmark(const BenchmarkArgs& args, std::ostream& log) {
  auto c = load_config(args.config);
  if (args.out) c.output_dir = args.out->string();
  if (!c.spectrometer) throw ConfigError("benchmark needs a spectrometer section");
  const double lambda0 = c.source.lambda_signal_nm;
  const double width = spectral_fwhm_nm(c.source);
  const double f = shape_factor_for_envelope(c.source);
  const double dz = axial_resolution(lambda0, width, f);
  json out = {{"axial_resolution_um", dz},
              {"coherence_length_um", dz},
              {"shape_factor", f},
              {"scan_range_mm", fd_scan_range(lambda0, width, c.spectrometer->n_pixels)},
              {"spectral_fwhm_nm", width},
              {"center_lambda_nm", lambda0},
              {"n_pixels", c.spectrometer->n_pixels}};
  write_json(fs::path(c.output_dir) / "benchmarks.json", out);
  log << out.dump(2) << "\n";
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and analysis of OCT with undetected photons"};
  app.require_subcommand(1);

  SimulateArgs sim;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  auto* s = app.add_subcommand("simulate", "Simulate an FD spectrum or a TD stage scan");
  s->add_option("--config", sim.config, "Run configuration (JSON)")->required();
  auto* s_mode = s->add_option("--mode", sim.mode, "fd or td (checked against the config)");
  s_mode->check(CLI::IsMember({"fd", "td"}));
  auto* s_seed = s->add_option("--seed", sim_seed, "Override the noise seed");
  auto* s_out = s->add_option("--out", sim_out, "Output directory");

  AnalyzeArgs an;
  std::string an_band;
  std::string an_out;
  auto* a = app.add_subcommand("analyze", "Extract an A-scan or TD envelope from a CSV interferogram");
  a->add_option("--input", an.input, "Interferogram CSV")->required();
  a->add_option("--mode", an.mode, "fd or td (default: from the CSV header)")->check(CLI::IsMember({"fd", "td"}));
  a->add_flag("--compensate", an.compensate, "Search the dispersion correction");
  auto* a_band = a->add_option("--band", an_band, "Visibility band LO:HI in nm (fd)");
  auto* a_out = a->add_option("--out", an_out, "Output directory");
  a->add_option("--fringe-lambda", an.fringe_lambda_nm, "Idler wavelength in nm (td)");
  a->add_option("--bandpass", an.bandpass, "TD pass-band half-width, fraction of the fringe frequency");
  a->add_option("--prominence", an.prominence, "Peak prominence relative to the tallest peak");
  a->add_option("--max-pitch", an.max_pitch_um, "Largest FD axis pitch in um");

  SweepArgs sw;
  std::uint64_t sw_seed = 0;
  std::string sw_band;
  std::string sw_out;
  auto* g = app.add_subcommand("sweep-gain", "Visibility versus pump gain ratio, with a transmission fit");
  g->add_option("--config", sw.config, "Run configuration (JSON)")->required();
  g->add_option("--ratios", sw.ratios, "Gain ratios g1^2/g2^2")->required()->delimiter(',');
  g->add_option("--repeats", sw.repeats, "Noisy repeats per ratio");
  auto* g_band = g->add_option("--band", sw_band, "Visibility band LO:HI in nm");
  auto* g_seed = g->add_option("--seed", sw_seed, "Override the noise seed");
  auto* g_out = g->add_option("--out", sw_out, "Output directory");

  BenchmarkArgs bm;
  std::string bm_out;
  auto* b = app.add_subcommand("benchmark", "Axial resolution, scan range and shape factor");
  b->add_option("--config", bm.config, "Run configuration (JSON)")->required();
  auto* b_out = b->add_option("--out", bm_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*s) {
      if (*s_seed) sim.seed = sim_seed;
      if (*s_out) sim.out = sim_out;
      simulate(sim, err);
    } else if (*a) {
      if (*a_band) an.band_nm = parse_band(an_band);
      if (*a_out) an.out = an_out;
      analyze(an, err);
    } else if (*g) {
      if (*g_band) sw.band_nm = parse_band(sw_band);
      if (*g_seed) sw.seed = sw_seed;
      if (*g_out) sw.out = sw_out;
      sweep_gain(sw, err);
    } else if (*b) {
      if (*b_out) bm.out = bm_out;
      benchmark(bm, out);
    }
  } catch (const ConfigError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const PhysicsError& e) {
    err << "physics error: " << e.what() << "\n";
    return kPhysicsError;
  } catch (const AnalysisError& e) {
    err << "analysis error: " << e.what() << "\n";
    return kAnalysisError;
  } catch (const fs::filesystem_error& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternalError;
  }
  return kOk;
}

}  // namespace qoct::cli
