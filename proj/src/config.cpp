// SPDX-License-Identifier: Apache-2.0
#include "qoct/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "qoct/errors.hpp"
#include "qoct/io.hpp"
#include "qoct/units.hpp"

namespace qoct {

namespace {

using json = nlohmann::json;

// Object reader that records which keys were consumed so leftovers can be
// reported as unknown fields.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key) {
    const auto& v = at(key);
    if (!v.is_number()) fail(field(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(field(key), "must be finite");
    return d;
  }

  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  std::uint64_t unsigned_integer(const std::string& key) {
    const auto& v = at(key);
    if (!v.is_number_unsigned()) fail(field(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::uint64_t unsigned_or(const std::string& key, std::uint64_t fallback) {
    return has(key) ? unsigned_integer(key) : fallback;
  }

  bool boolean_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_boolean()) fail(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const auto& v = at(key);
    if (!v.is_string()) fail(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::string string_or(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  const json& raw(const std::string& key) { return at(key); }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!used_.count(key)) fail(field(key), "unknown field");
    }
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& why) {
    throw ConfigError((path.empty() ? std::string("config") : path) + ": " + why);
  }

 private:
  const json& at(const std::string& key) {
    if (!j_.contains(key)) fail(field(key), "missing required field");
    used_.insert(key);
    return j_.at(key);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// Re-throws a section's own validation error with the section path.
template <typename F>
void validated(const std::string& path, F&& check) {
  try {
    check();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    throw ConfigError(path + ": " + what);
  }
}

PdcSourceSpec parse_source(Section s) {
  PdcSourceSpec out;
  out.crystal_length_mm = s.number_or("crystal_length_mm", out.crystal_length_mm);
  out.mismatch_b1 = s.number_or("mismatch_b1_fs_per_mm", 0.0);
  out.mismatch_b2 = s.number_or("mismatch_b2_fs2_per_mm", 0.0);
  out.mismatch_b3 = s.number_or("mismatch_b3_fs3_per_mm", 0.0);
  if (s.has("envelope")) {
    try {
      out.envelope = envelope_from_string(s.string("envelope"));
    } catch (const ConfigError& e) {
      Section::fail(s.field("envelope"), e.what());
    }
  }
  out.rect_bandwidth_nm = s.number_or("rect_bandwidth_nm", out.rect_bandwidth_nm);
  out.lambda_signal_nm = s.number_or("lambda_signal_nm", out.lambda_signal_nm);
  out.lambda_idler_nm = s.number_or("lambda_idler_nm", out.lambda_idler_nm);
  out.lambda_pump_nm = s.number_or("lambda_pump_nm", 0.0);
  s.finish();
  validated("source", [&] { out.validate(); });
  return out;
}

SampleModel parse_sample(Section s) {
  SampleModel out;
  out.group_index = s.number_or("group_index", 1.0);
  const auto& layers = s.raw("layers");
  if (!layers.is_array()) Section::fail(s.field("layers"), "expected an array");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    Section l(layers[k], s.field("layers") + "[" + std::to_string(k) + "]");
    Layer layer;
    layer.reflectivity = l.number("reflectivity");
    layer.opd_um = l.number("opd_um");
    l.finish();
    out.layers.push_back(layer);
  }
  s.finish();
  validated("sample", [&] { out.validate(); });
  return out;
}

InterferometerConfig parse_interferometer(Section s, std::optional<PumpConfig>& pump) {
  InterferometerConfig out;
  try {
    out.geometry = geometry_from_string(s.string_or("geometry", "SU11"));
  } catch (const ConfigError& e) {
    Section::fail(s.field("geometry"), e.what());
  }
  if (s.has("pump")) {
    if (s.has("gain_g1") || s.has("gain_g2")) {
      Section::fail(s.field("pump"), "give either pump or gain_g1/gain_g2, not both");
    }
    Section p(s.raw("pump"), s.field("pump"));
    PumpConfig pc;
    pc.total_power_mw = p.number("total_power_mw");
    pc.gain_ratio = p.number("gain_ratio");
    pc.calibration_k = p.number("calibration_k");
    p.finish();
    validated(s.field("pump"), [&] { pc.validate(); });
    std::tie(out.gain_g1, out.gain_g2) = pump_gains(pc);
    pump = pc;
  } else {
    out.gain_g1 = s.number("gain_g1");
    out.gain_g2 = s.number("gain_g2");
  }
  out.t_signal = s.optional_number("t_signal");
  out.t_signal_1 = s.optional_number("t_signal_1");
  out.t_signal_2 = s.optional_number("t_signal_2");
  out.t_idler = s.number_or("t_idler", 1.0);
  out.internal_phi2 = s.number_or("internal_phi2_fs2", 0.0);
  out.internal_phi3 = s.number_or("internal_phi3_fs3", 0.0);
  out.reference_delay_tau = s.number_or("reference_delay_fs", 0.0);
  out.eq2_literal_mode = s.boolean_or("eq2_literal_mode", false);
  s.finish();
  validated("interferometer", [&] { out.validate(); });
  return out;
}

SpectrometerConfig parse_spectrometer(Section s) {
  SpectrometerConfig out;
  out.n_pixels = s.unsigned_or("n_pixels", out.n_pixels);
  out.resolution_ghz = s.number_or("resolution_ghz", out.resolution_ghz);
  out.center_lambda_nm = s.number_or("center_lambda_nm", out.center_lambda_nm);
  out.exposure_s = s.number_or("exposure_s", out.exposure_s);
  out.counts_scale = s.number_or("counts_scale", out.counts_scale);
  s.finish();
  validated("spectrometer", [&] { out.validate(); });
  return out;
}

StageScanConfig parse_stage(Section s) {
  StageScanConfig out;
  out.start_um = s.number_or("start_um", out.start_um);
  out.step_um = s.number_or("step_um", out.step_um);
  out.n_steps = s.unsigned_or("n_steps", out.n_steps);
  out.dwell_s = s.number_or("dwell_s", out.dwell_s);
  out.counts_scale = s.number_or("counts_scale", out.counts_scale);
  s.finish();
  validated("stage", [&] { out.validate(); });
  return out;
}

NoiseConfig parse_noise(Section s) {
  NoiseConfig out;
  out.enabled = s.boolean_or("enabled", false);
  out.seed = s.unsigned_or("seed", 0);
  s.finish();
  return out;
}

GridConfig parse_grid(Section s) {
  GridConfig out;
  out.n_points = s.unsigned_integer("n_points");
  out.delta_omega = s.number("delta_omega_rad_per_fs");
  s.finish();
  validated("grid", [&] { FrequencyGrid(out.n_points, out.delta_omega, 1.0, 1.0); });
  return out;
}

json to_json(const RunConfig& c) {
  json j;
  const auto& s = c.source;
  j["source"] = {{"crystal_length_mm", s.crystal_length_mm},
                 {"mismatch_b1_fs_per_mm", s.mismatch_b1},
                 {"mismatch_b2_fs2_per_mm", s.mismatch_b2},
                 {"mismatch_b3_fs3_per_mm", s.mismatch_b3},
                 {"envelope", to_string(s.envelope)},
                 {"rect_bandwidth_nm", s.rect_bandwidth_nm},
                 {"lambda_signal_nm", s.lambda_signal_nm},
                 {"lambda_idler_nm", s.lambda_idler_nm},
                 {"lambda_pump_nm", s.lambda_pump_nm}};
  json layers = json::array();
  for (const auto& l : c.sample.layers) layers.push_back({{"reflectivity", l.reflectivity}, {"opd_um", l.opd_um}});
  j["sample"] = {{"group_index", c.sample.group_index}, {"layers", layers}};
  const auto& i = c.interferometer;
  json ij = {{"geometry", to_string(i.geometry)},
             {"t_idler", i.t_idler},
             {"internal_phi2_fs2", i.internal_phi2},
             {"internal_phi3_fs3", i.internal_phi3},
             {"reference_delay_fs", i.reference_delay_tau},
             {"eq2_literal_mode", i.eq2_literal_mode}};
  if (c.pump) {
    ij["pump"] = {{"total_power_mw", c.pump->total_power_mw},
                  {"gain_ratio", c.pump->gain_ratio},
                  {"calibration_k", c.pump->calibration_k}};
  } else {
    ij["gain_g1"] = i.gain_g1;
    ij["gain_g2"] = i.gain_g2;
  }
  if (i.t_signal) ij["t_signal"] = *i.t_signal;
  if (i.t_signal_1) ij["t_signal_1"] = *i.t_signal_1;
  if (i.t_signal_2) ij["t_signal_2"] = *i.t_signal_2;
  j["interferometer"] = ij;
  if (c.spectrometer) {
    const auto& sp = *c.spectrometer;
    j["spectrometer"] = {{"n_pixels", sp.n_pixels},
                         {"resolution_ghz", sp.resolution_ghz},
                         {"center_lambda_nm", sp.center_lambda_nm},
                         {"exposure_s", sp.exposure_s},
                         {"counts_scale", sp.counts_scale}};
  }
  if (c.stage) {
    const auto& st = *c.stage;
    j["stage"] = {{"start_um", st.start_um},
                  {"step_um", st.step_um},
                  {"n_steps", st.n_steps},
                  {"dwell_s", st.dwell_s},
                  {"counts_scale", st.counts_scale}};
  }
  j["noise"] = {{"enabled", c.noise.enabled}, {"seed", c.noise.seed}};
  if (c.grid) j["grid"] = {{"n_points", c.grid->n_points}, {"delta_omega_rad_per_fs", c.grid->delta_omega}};
  j["output_dir"] = c.output_dir;
  return j;
}

}  // namespace

void PumpConfig::validate() const {
  if (!(total_power_mw >= 0.0)) throw ConfigError("total_power_mw must be >= 0");
  if (!(gain_ratio > 0.0)) throw ConfigError("gain_ratio must be > 0");
  if (!(calibration_k > 0.0)) throw ConfigError("calibration_k must be > 0");
}

std::pair<double, double> pump_gains(const PumpConfig& pump) {
  pump.validate();
  const double p1 = pump.total_power_mw * pump.gain_ratio / (1.0 + pump.gain_ratio);
  const double p2 = pump.total_power_mw / (1.0 + pump.gain_ratio);
  return {pump_power_to_gain(p1, pump.calibration_k), pump_power_to_gain(p2, pump.calibration_k)};
}

void RunConfig::validate() const {
  validated("source", [&] { source.validate(); });
  validated("sample", [&] { sample.validate(); });
  validated("interferometer", [&] { interferometer.validate(); });
  if (pump) validated("interferometer.pump", [&] { pump->validate(); });
  if (spectrometer) validated("spectrometer", [&] { spectrometer->validate(); });
  if (stage) validated("stage", [&] { stage->validate(); });
  if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Section top(root, "");
  RunConfig c;
  c.source = parse_source(Section(top.raw("source"), "source"));
  c.sample = parse_sample(Section(top.raw("sample"), "sample"));
  c.interferometer = parse_interferometer(Section(top.raw("interferometer"), "interferometer"), c.pump);
  if (top.has("spectrometer")) c.spectrometer = parse_spectrometer(Section(top.raw("spectrometer"), "spectrometer"));
  if (top.has("stage")) c.stage = parse_stage(Section(top.raw("stage"), "stage"));
  if (top.has("noise")) c.noise = parse_noise(Section(top.raw("noise"), "noise"));
  if (top.has("grid")) c.grid = parse_grid(Section(top.raw("grid"), "grid"));
  c.output_dir = top.string_or("output_dir", c.output_dir);
  top.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(io::read_text(path)); }

std::string serialize_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

}  // namespace qoct
