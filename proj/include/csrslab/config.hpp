#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csrslab/conversion.hpp"
#include "csrslab/detection.hpp"
#include "csrslab/gas_optics.hpp"
#include "csrslab/lineshape.hpp"
#include "csrslab/polarization.hpp"

namespace csrslab {

/// One conversion channel: process, its resonance, calibration anchor and
/// detection path.
struct ChannelConfig {
  fwm::ProcessConfig process;          // scale is calibrated on load
  raman::RamanLine line;
  fwm::EfficiencyPoint anchor;         // on-resonance internal/external pair
  double filter_transmission = 0.93;
  double optics_transmission = 1.0;    // derived from the anchor unless given
  detect::DetectorSpec detector;

  /// Transmission factors then detector QE, for external_efficiency.
  std::vector<double> chain() const;
  /// Transmission factors only (photons reaching the detector).
  double transmission() const { return filter_transmission * optics_transmission; }
};

struct SpectrumSettings {
  std::vector<double> pressures_bar;
  int points = 100;
  double span_linewidths = 3.0;   // half-span in units of the wider FWHM
  double dwell_s = 1.0;           // per detuning step
  double pump_background_rate = 0.0;  // photons/s at the detector from the pumps
};

struct PolarizationSettings {
  pol::Imperfections optics;
  std::string preset = "paper-like";
  double peak_counts = 1.0e4;
  double input_angle_deg = 0.0;
  std::vector<double> linear_angles_deg;
  std::vector<double> circular_angles_deg;
};

struct ScanGrid {
  double p_min_bar = 0.5;
  double p_max_bar = 30.0;
  double step_bar = 0.25;
  std::vector<double> pressures() const;
};

/// Fully resolved run configuration. `document` keeps the merged JSON the
/// values came from, so a run can be replayed exactly.
struct ExperimentConfig {
  explicit ExperimentConfig(gas::DispersionModel model) : dispersion(std::move(model)) {}

  std::uint64_t seed = 0;
  double temperature_k = gas::kDefaultTemperatureK;
  std::filesystem::path dispersion_file;
  gas::DispersionModel dispersion;
  double module_dead_time_ns = detect::kCountingModuleDeadTimeNs;
  ChannelConfig cars;
  ChannelConfig csrs;
  SpectrumSettings spectrum;
  PolarizationSettings polarization;
  ScanGrid efficiency_grid;
  double gauge_rel_uncertainty = 0.01;
  nlohmann::json document;

  const ChannelConfig& channel(raman::ProcessKind kind) const {
    return kind == raman::ProcessKind::Cars ? cars : csrs;
  }

  /// Built-in defaults reproducing the experiment.
  static nlohmann::json default_document();
  /// Validates and resolves a complete document; throws ConfigError naming
  /// the offending field.
  static ExperimentConfig from_document(const nlohmann::json& doc);
  static ExperimentConfig defaults() { return from_document(default_document()); }
};

/// Parses a config file and merge-patches it over the defaults. Parse errors
/// report the line number.
nlohmann::json load_config_document(const std::filesystem::path& file);

/// Canonical SHA-256 of a document (sorted keys, compact dump).
std::string config_hash(const nlohmann::json& doc);

}  // namespace csrslab
