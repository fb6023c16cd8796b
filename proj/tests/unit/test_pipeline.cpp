#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "csrslab/config.hpp"
#include "csrslab/csv.hpp"
#include "csrslab/errors.hpp"
#include "csrslab/experiment.hpp"
#include "csrslab/manifest.hpp"
#include "csrslab/report.hpp"

using namespace csrslab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("csrslab_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string config_error_field(const json& doc) {
  try {
    (void)ExperimentConfig::from_document(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

void require_keys(const json& schema, const json& doc) {
  for (const auto& key : schema.at("required")) CHECK_MESSAGE(doc.contains(key.get<std::string>()), key);
}

}  // namespace

TEST_CASE("default configuration resolves") {
  const auto cfg = ExperimentConfig::defaults();
  CHECK(cfg.seed == 20231223u);
  CHECK(cfg.cars.detector.name == "PMT");
  CHECK(cfg.csrs.detector.name == "APD");
  CHECK(cfg.cars.optics_transmission > 0.0);
  CHECK(cfg.cars.optics_transmission <= 1.0);
  CHECK(cfg.csrs.anchor.pressure_bar == 10.0);
  CHECK(config_hash(cfg.document) == config_hash(ExperimentConfig::default_document()));
}

TEST_CASE("configuration errors name the offending field") {
  auto doc = ExperimentConfig::default_document();
  doc["spectrum"]["points"] = 2;
  CHECK(config_error_field(doc) == "spectrum.points");

  doc = ExperimentConfig::default_document();
  doc["channels"]["CSRS"]["calibration"]["eta_internal"] = 1.5;
  CHECK(config_error_field(doc) == "channels.CSRS.calibration.eta_internal");

  doc = ExperimentConfig::default_document();
  doc["spectrum"]["pressures_bar"] = json::array({1.0, "two"});
  CHECK(config_error_field(doc) == "spectrum.pressures_bar[1]");

  doc = ExperimentConfig::default_document();
  doc["lasers"].erase("signal_nm");
  CHECK(config_error_field(doc) == "lasers.signal_nm");

  doc = ExperimentConfig::default_document();
  doc["channels"]["CARS"]["calibration"]["eta_external"] = 1e-9;
  CHECK(config_error_field(doc) == "channels.CARS.calibration.eta_external");

  CHECK(config_error_field(json::array()) == "$");
}

TEST_CASE("config files merge over the defaults and report parse lines") {
  const auto dir = scratch("config");
  {
    std::ofstream(dir / "ok.json") << R"({"seed": 7, "spectrum": {"points": 40}})";
    std::ofstream(dir / "bad.json") << "{\n  \"seed\": 7,\n  \"spectrum\": {points: 40}\n}\n";
  }
  const auto doc = load_config_document(dir / "ok.json");
  const auto cfg = ExperimentConfig::from_document(doc);
  CHECK(cfg.seed == 7u);
  CHECK(cfg.spectrum.points == 40);
  CHECK(cfg.spectrum.dwell_s == ExperimentConfig::defaults().spectrum.dwell_s);

  try {
    (void)load_config_document(dir / "bad.json");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(e.field().ends_with("bad.json:3"));
  }
  CHECK_THROWS_AS(load_config_document(dir / "missing.json"), ConfigError);
}

TEST_CASE("CSV parse errors carry the row number") {
  std::istringstream ragged("pressure_bar,detuning_MHz,counts,duration_s\n1,0,5,1\n1,1,6\n");
  try {
    (void)csv::parse(ragged, "ragged.csv");
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("ragged.csv:3") != std::string::npos);
  }

  std::istringstream text("pressure_bar,detuning_MHz,counts,duration_s\n1,0,5,1\n\n1,1,abc,1\n");
  const auto t = csv::parse(text, "text.csv");
  CHECK(t.rows.size() == 2);
  CHECK(t.line_numbers[1] == 4);
  try {
    (void)csv::read_spectrum(t, "text.csv");
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("text.csv:4") != std::string::npos);
  }

  std::istringstream empty("");
  CHECK_THROWS_AS(csv::parse(empty, "empty.csv"), InputError);
  std::istringstream header_only("pressure_bar,detuning_MHz,counts,duration_s\n");
  CHECK_THROWS_AS(csv::read_spectrum(csv::parse(header_only, "h.csv"), "h.csv"), InputError);
}

TEST_CASE("spectra round-trip through CSV without loss") {
  const auto cfg = ExperimentConfig::defaults();
  detect::Generator gen(3);
  const auto s = experiment::simulate_spectrum(cfg, raman::ProcessKind::Csrs, 4.0, &gen);
  std::stringstream buf;
  csv::write_spectrum(buf, s);
  const auto back = csv::read_spectrum(csv::parse(buf, "buf"), "buf");
  REQUIRE(back.rows.size() == s.rows.size());
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    CHECK(back.rows[i].pump_difference_thz == s.rows[i].pump_difference_thz);
    CHECK(back.rows[i].detuning_mhz == s.rows[i].detuning_mhz);
    CHECK(back.rows[i].counts == s.rows[i].counts);
  }
  CHECK(csv::format_number(0.1) == "0.1");
  CHECK(std::stod(csv::format_number(124.571304)) == 124.571304);
}

TEST_CASE("manifest round-trips and hashes are stable") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  RunManifest m;
  m.command = "simulate-spectrum";
  m.args = {"simulate-spectrum", "--pressures", "1,2"};
  m.config = ExperimentConfig::default_document();
  m.config_hash = config_hash(m.config);
  m.seed = 5;
  m.tool_version = tool_version();
  m.timestamp = "2023-11-14T22:13:20Z";
  m.outputs = {{"spectra/CSRS/p_1.csv", sha256_hex("x")}};
  const auto dir = scratch("manifest");
  m.write(dir / "manifest.json");
  const auto back = RunManifest::load(dir / "manifest.json");
  CHECK(back.to_json() == m.to_json());
  CHECK(back.args == m.args);
  CHECK(back.outputs[0].sha256 == m.outputs[0].sha256);
}

TEST_CASE("pinned clock gives a fixed timestamp") {
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  CHECK(utc_timestamp() == "2023-11-14T22:13:20Z");
  unsetenv("SOURCE_DATE_EPOCH");
}

TEST_CASE("report without polarization scans has an empty fidelity section") {
  const auto cfg = ExperimentConfig::defaults();
  const auto spectra = experiment::simulate_pressure_series(cfg, raman::ProcessKind::Csrs, 1, false);
  report::ReportInputs in;
  in.processes.push_back(experiment::analyze_pressure_series(raman::ProcessKind::Csrs, spectra));
  const auto doc = report::analysis_report(in);
  CHECK(doc.at("polarization").at("fidelity").is_null());
  CHECK(doc.at("polarization").at("contrasts").empty());
  CHECK(doc.at("all_converged") == true);
  CHECK_THROWS_AS(report::analysis_report(report::ReportInputs{}), InputError);
}

TEST_CASE("full synthetic pipeline reproduces the configured truth") {
  const auto cfg = ExperimentConfig::defaults();
  report::ReportInputs in;
  in.gauge_rel_uncertainty = cfg.gauge_rel_uncertainty;
  for (auto kind : {raman::ProcessKind::Cars, raman::ProcessKind::Csrs}) {
    const auto spectra = experiment::simulate_pressure_series(cfg, kind, cfg.seed, true);
    in.processes.push_back(experiment::analyze_pressure_series(kind, spectra));
  }
  std::vector<experiment::BasisScan> scans;
  for (auto basis : {pol::Basis::Linear, pol::Basis::Circular}) {
    detect::Generator gen(detect::derive_seed(cfg.seed, 1000 + static_cast<int>(basis)));
    scans.push_back({basis, experiment::simulate_polarization(cfg, basis, cfg.polarization.optics, &gen)});
  }
  in.polarization = experiment::analyze_polarization(scans);
  const auto doc = report::analysis_report(in);

  std::ifstream schema_file(fs::path(CSRSLAB_TEST_DATA_DIR) / "report_schema.json");
  const auto schema = json::parse(schema_file);
  require_keys(schema, doc);
  CHECK(doc.at("schema_version") == report::kSchemaVersion);

  REQUIRE(doc.at("processes").size() == 2);
  for (const auto& proc : doc.at("processes")) {
    const auto& line = proc.at("process") == "CARS" ? cfg.cars.line : cfg.csrs.line;
    const auto& shift = proc.at("shift_MHz_per_bar");
    CHECK(std::abs(shift.at("value").get<double>() - line.shift_mhz_per_bar) <= 1.0);
    CHECK(shift.at("sys").get<double>() ==
          doctest::Approx(std::abs(shift.at("value").get<double>()) * cfg.gauge_rel_uncertainty));
    CHECK(shift.at("total").get<double>() >= shift.at("stat").get<double>());
    CHECK(std::abs(proc.at("nu0_THz").at("value").get<double>() - line.nu0_thz) * 1e6 <= 2.0);
    CHECK(std::abs(proc.at("broadening_MHz_per_bar").at("value").get<double>() - line.broadening_mhz_per_bar) <= 0.5);
    CHECK(proc.at("spectra").size() == cfg.spectrum.pressures_bar.size());
  }
  const auto& pol_doc = doc.at("polarization");
  CHECK(pol_doc.at("contrasts").size() == 4);
  CHECK(std::abs(pol_doc.at("fidelity").at("value").get<double>() - 0.904) <= 0.01);
}
