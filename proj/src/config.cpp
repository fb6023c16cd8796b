#include "csrslab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "csrslab/errors.hpp"
#include "csrslab/manifest.hpp"

namespace csrslab {

namespace {

using nlohmann::json;

std::vector<double> range(double start, double stop, double step) {
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = start + step * i;
    if (v > stop + 1e-9 * step) break;
    out.push_back(v);
  }
  return out;
}

// Runs `fn`, re-labelling any failure with the JSON path it came from.
template <class F>
auto at_field(const std::string& path, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(path, e.what());
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

double number(const json& doc, const std::string& parent, const char* key) {
  const std::string path = parent.empty() ? key : parent + "." + key;
  if (!doc.contains(key)) throw ConfigError(path, "missing required field");
  const auto& v = doc.at(key);
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
  return x;
}

double positive(const json& doc, const std::string& parent, const char* key) {
  const double x = number(doc, parent, key);
  if (!(x > 0.0)) throw ConfigError(parent + "." + key, "must be positive");
  return x;
}

double fraction(const json& doc, const std::string& parent, const char* key) {
  const double x = number(doc, parent, key);
  if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(parent + "." + key, "must lie in [0, 1]");
  return x;
}

std::vector<double> number_list(const json& doc, const std::string& path) {
  if (!doc.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (!doc[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(doc[i].get<double>());
  }
  return out;
}

ChannelConfig channel_from(const json& doc, raman::ProcessKind kind, const ExperimentConfig& cfg) {
  const std::string name(raman::to_string(kind));
  const std::string base = "channels." + name;
  const auto& ch = at_field(base, [&]() -> const json& { return doc.at("channels").at(name); });
  const auto& lasers = at_field("lasers", [&]() -> const json& { return doc.at("lasers"); });
  const auto& geom = at_field("geometry", [&]() -> const json& { return doc.at("geometry"); });

  ChannelConfig c;
  c.process.kind = kind;
  c.process.signal_nm = positive(lasers, "lasers", "signal_nm");
  c.process.pump_hi_nm = positive(lasers, "lasers", "pump_hi_nm");
  c.process.pump_lo_nm = positive(lasers, "lasers", "pump_lo_nm");
  c.process.signal_w = number(lasers, "lasers", "signal_W");
  c.process.pump_hi_w = number(lasers, "lasers", "pump_hi_W");
  c.process.pump_lo_w = number(lasers, "lasers", "pump_lo_W");
  c.process.waist_um = positive(geom, "geometry", "waist_um");
  c.process.cell_length_mm = positive(geom, "geometry", "cell_length_mm");
  c.process.kernel = at_field("geometry.overlap_kernel", [&] {
    return fwm::parse_overlap_kernel(geom.value("overlap_kernel", std::string("mode-projected")));
  });
  at_field("lasers", [&] { c.process.validate(cfg.dispersion); });

  c.line = at_field(base + ".line", [&] { return raman::RamanLine::from_json(ch.at("line")); });

  const auto& cal = at_field(base + ".calibration", [&]() -> const json& { return ch.at("calibration"); });
  c.anchor.pressure_bar = positive(cal, base + ".calibration", "pressure_bar");
  c.anchor.internal = fraction(cal, base + ".calibration", "eta_internal");
  c.anchor.external = fraction(cal, base + ".calibration", "eta_external");
  if (c.anchor.external > c.anchor.internal) {
    throw ConfigError(base + ".calibration.eta_external", "must not exceed eta_internal");
  }

  c.filter_transmission = fraction(ch, base, "filter_transmission");
  const std::string det_name = at_field(base + ".detector", [&] { return ch.at("detector").get<std::string>(); });
  c.detector = at_field("detectors." + det_name, [&] {
    return detect::DetectorSpec::from_json(det_name, doc.at("detectors").at(det_name));
  });
  if (ch.contains("optics_transmission")) {
    c.optics_transmission = fraction(ch, base, "optics_transmission");
  } else {
    // the anchor pair fixes whatever the filter and detector do not explain
    const double rest = c.anchor.external /
                        (c.anchor.internal * c.filter_transmission * c.detector.quantum_efficiency);
    if (!(rest >= 0.0 && rest <= 1.0)) {
      throw ConfigError(base + ".calibration",
                        "external/internal anchor implies an optics transmission outside [0, 1]");
    }
    c.optics_transmission = rest;
  }

  c.process.scale = at_field(base + ".calibration", [&] {
    return fwm::calibrate_scale(c.process, c.line, cfg.dispersion, c.anchor, cfg.temperature_k);
  });
  return c;
}

}  // namespace

std::vector<double> ChannelConfig::chain() const {
  return {filter_transmission, optics_transmission, detector.quantum_efficiency};
}

std::vector<double> ScanGrid::pressures() const { return range(p_min_bar, p_max_bar, step_bar); }

json ExperimentConfig::default_document() {
  const auto cars = raman::RamanLine::defaults(raman::ProcessKind::Cars);
  const auto csrs = raman::RamanLine::defaults(raman::ProcessKind::Csrs);
  return {
      {"schema", "csrslab-config/1"},
      {"seed", 20231223},
      {"temperature_K", gas::kDefaultTemperatureK},
      {"dispersion_file", "h2_dispersion.json"},
      {"lasers",
       {{"signal_nm", 863.0},
        {"pump_hi_nm", 938.0},
        {"pump_lo_nm", 1538.0},
        {"signal_W", 5.0e-6},
        {"pump_hi_W", 0.65},
        {"pump_lo_W", 15.0}}},
      {"geometry", {{"waist_um", 80.0}, {"cell_length_mm", 140.0}, {"overlap_kernel", "mode-projected"}}},
      {"detectors",
       {{"APD", detect::DetectorSpec::apd().to_json()},
        {"PMT", detect::DetectorSpec::pmt().to_json()},
        {"counting_module_dead_time_ns", detect::kCountingModuleDeadTimeNs}}},
      {"channels",
       {{"CARS",
         {{"line", cars.to_json()},
          {"calibration", {{"pressure_bar", 8.0}, {"eta_internal", 8.1e-10}, {"eta_external", 1.5e-11}}},
          {"filter_transmission", 0.93},
          {"detector", "PMT"}}},
        {"CSRS",
         {{"line", csrs.to_json()},
          {"calibration", {{"pressure_bar", 10.0}, {"eta_internal", 1.1e-9}, {"eta_external", 9.0e-11}}},
          {"filter_transmission", 0.93},
          {"detector", "APD"}}}}},
      {"spectrum",
       {{"pressures_bar", {1.0, 2.0, 4.0, 6.0, 8.0, 11.0, 15.0, 20.0}},
        {"points", 100},
        {"span_linewidths", 3.0},
        {"dwell_s", 10.0},
        {"pump_background_rate", 0.0}}},
      {"polarization",
       {{"preset", "paper-like"},
        {"peak_counts", 1.0e4},
        {"input_angle_deg", 0.0},
        {"linear_angles_deg", range(0.0, 175.0, 5.0)},
        {"circular_angles_deg", range(0.0, 355.0, 5.0)}}},
      {"efficiency_scan", {{"p_min_bar", 0.25}, {"p_max_bar", 30.0}, {"step_bar", 0.25}}},
      {"analysis", {{"pressure_gauge_rel_uncertainty", 0.01}}},
  };
}

ExperimentConfig ExperimentConfig::from_document(const json& doc) {
  if (!doc.is_object()) throw ConfigError("$", "config must be a JSON object");
  const auto disp = at_field("dispersion_file", [&] { return doc.at("dispersion_file").get<std::string>(); });
  std::filesystem::path path(disp);
  if (path.is_relative() && !std::filesystem::exists(path)) path = gas::data_dir() / path;

  ExperimentConfig cfg(at_field("dispersion_file", [&] { return gas::DispersionModel::load(path); }));
  cfg.dispersion_file = path;
  cfg.document = doc;
  cfg.seed = at_field("seed", [&] { return doc.at("seed").get<std::uint64_t>(); });
  cfg.temperature_k = positive(doc, "", "temperature_K");

  cfg.module_dead_time_ns = at_field("detectors.counting_module_dead_time_ns", [&] {
    return doc.at("detectors").value("counting_module_dead_time_ns", detect::kCountingModuleDeadTimeNs);
  });
  if (!(cfg.module_dead_time_ns >= 0.0)) {
    throw ConfigError("detectors.counting_module_dead_time_ns", "must be non-negative");
  }

  cfg.cars = channel_from(doc, raman::ProcessKind::Cars, cfg);
  cfg.csrs = channel_from(doc, raman::ProcessKind::Csrs, cfg);

  const auto& sp = at_field("spectrum", [&]() -> const json& { return doc.at("spectrum"); });
  cfg.spectrum.pressures_bar = at_field("spectrum.pressures_bar", [&] {
    return number_list(sp.at("pressures_bar"), "spectrum.pressures_bar");
  });
  if (cfg.spectrum.pressures_bar.empty()) throw ConfigError("spectrum.pressures_bar", "must not be empty");
  for (double p : cfg.spectrum.pressures_bar) {
    if (!(p > 0.0 && p <= gas::kMaxPressureBar)) {
      throw ConfigError("spectrum.pressures_bar", "pressures must lie in (0, 60] bar");
    }
  }
  cfg.spectrum.points = at_field("spectrum.points", [&] { return sp.at("points").get<int>(); });
  if (cfg.spectrum.points < 5) throw ConfigError("spectrum.points", "need at least 5 detuning points");
  cfg.spectrum.span_linewidths = positive(sp, "spectrum", "span_linewidths");
  cfg.spectrum.dwell_s = positive(sp, "spectrum", "dwell_s");
  cfg.spectrum.pump_background_rate = number(sp, "spectrum", "pump_background_rate");
  if (cfg.spectrum.pump_background_rate < 0.0) {
    throw ConfigError("spectrum.pump_background_rate", "must be non-negative");
  }

  const auto& po = at_field("polarization", [&]() -> const json& { return doc.at("polarization"); });
  cfg.polarization.preset = at_field("polarization.preset", [&] { return po.at("preset").get<std::string>(); });
  cfg.polarization.optics = at_field("polarization", [&] { return pol::Imperfections::from_json(po); });
  cfg.polarization.peak_counts = positive(po, "polarization", "peak_counts");
  cfg.polarization.input_angle_deg = number(po, "polarization", "input_angle_deg");
  cfg.polarization.linear_angles_deg = at_field("polarization.linear_angles_deg", [&] {
    return number_list(po.at("linear_angles_deg"), "polarization.linear_angles_deg");
  });
  cfg.polarization.circular_angles_deg = at_field("polarization.circular_angles_deg", [&] {
    return number_list(po.at("circular_angles_deg"), "polarization.circular_angles_deg");
  });
  for (const auto* list : {&cfg.polarization.linear_angles_deg, &cfg.polarization.circular_angles_deg}) {
    for (double a : *list) {
      if (!(a >= 0.0 && a < 360.0)) throw ConfigError("polarization", "scan angles must lie in [0, 360)");
    }
  }

  const auto& eg = at_field("efficiency_scan", [&]() -> const json& { return doc.at("efficiency_scan"); });
  cfg.efficiency_grid.p_min_bar = positive(eg, "efficiency_scan", "p_min_bar");
  cfg.efficiency_grid.p_max_bar = positive(eg, "efficiency_scan", "p_max_bar");
  cfg.efficiency_grid.step_bar = positive(eg, "efficiency_scan", "step_bar");
  if (cfg.efficiency_grid.p_max_bar < cfg.efficiency_grid.p_min_bar ||
      cfg.efficiency_grid.p_max_bar > gas::kMaxPressureBar) {
    throw ConfigError("efficiency_scan.p_max_bar", "must lie in [p_min_bar, 60]");
  }

  const auto& an = at_field("analysis", [&]() -> const json& { return doc.at("analysis"); });
  cfg.gauge_rel_uncertainty = number(an, "analysis", "pressure_gauge_rel_uncertainty");
  if (!(cfg.gauge_rel_uncertainty >= 0.0 && cfg.gauge_rel_uncertainty < 1.0)) {
    throw ConfigError("analysis.pressure_gauge_rel_uncertainty", "must lie in [0, 1)");
  }
  return cfg;
}

json load_config_document(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string(), "cannot open config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  json patch;
  try {
    patch = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ConfigError(file.string() + ":" + std::to_string(line), e.what());
  }
  if (!patch.is_object()) throw ConfigError(file.string(), "config must be a JSON object");
  auto doc = ExperimentConfig::default_document();
  doc.merge_patch(patch);
  return doc;
}

std::string config_hash(const json& doc) { return sha256_hex(doc.dump()); }

}  // namespace csrslab
