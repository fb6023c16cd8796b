#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csrslab/config.hpp"
#include "csrslab/detection.hpp"
#include "csrslab/fits.hpp"
#include "csrslab/polarization.hpp"

namespace csrslab::experiment {

using raman::ProcessKind;

struct SpectrumRow {
  double pressure_bar = 0.0;
  double pump_difference_thz = 0.0;
  double detuning_mhz = 0.0;  // pump difference minus the channel's zero-pressure center
  double counts = 0.0;
  double duration_s = 0.0;
};

struct Spectrum {
  ProcessKind kind = ProcessKind::Csrs;
  double pressure_bar = 0.0;
  std::vector<SpectrumRow> rows;
};

/// Pump-difference grid shared by both channels at one pressure: centred
/// between the two shifted resonances and wide enough for the broader line.
std::vector<double> pump_difference_grid(const ExperimentConfig& cfg, double pressure_bar);

/// Mean observed count rate of a channel at one pump difference, after
/// filter/optics transmission, detector QE, dark counts and dead time.
double expected_count_rate(const ExperimentConfig& cfg, ProcessKind kind, double pressure_bar,
                           double pump_difference_thz);

/// One channel's resonance scan. With `gen` null the counts are the exact
/// expectation values; otherwise Poisson draws from `gen`.
Spectrum simulate_spectrum(const ExperimentConfig& cfg, ProcessKind kind, double pressure_bar,
                           detect::Generator* gen);

/// Spectra for every configured pressure. Each (pressure, channel) pair gets
/// its own stream derived from `seed` so the order of evaluation is free.
std::vector<Spectrum> simulate_pressure_series(const ExperimentConfig& cfg, ProcessKind kind,
                                               std::uint64_t seed, bool noise = true);

struct SpectrumFit {
  double pressure_bar = 0.0;
  fit::FitResult fit;            // x in MHz from the first grid point
  double center_thz = 0.0;       // absolute (relative if only detunings were given)
  double center_sigma_mhz = 0.0;
  double fwhm_mhz = 0.0;
  double fwhm_sigma_mhz = 0.0;
};

/// Lorentzian fit of one spectrum with sqrt(counts) errors.
SpectrumFit analyze_spectrum(std::span<const SpectrumRow> rows);

struct PressureSeriesFit {
  ProcessKind kind = ProcessKind::Csrs;
  std::vector<SpectrumFit> spectra;
  fit::FitResult centers;
  std::optional<fit::FitResult> widths;  // needs three or more pressures
};

PressureSeriesFit analyze_pressure_series(ProcessKind kind, std::span<const Spectrum> spectra);

/// Two-detector scan in one basis with the configured optics; counts scaled
/// so the brighter port peaks near `peak_counts`.
pol::PolarizationScan simulate_polarization(const ExperimentConfig& cfg, pol::Basis basis,
                                            const pol::Imperfections& optics,
                                            detect::Generator* gen);

struct ContrastEntry {
  std::string label;
  pol::Basis basis = pol::Basis::Linear;
  int detector = 1;
  fit::FitResult fit;
  double contrast = 0.0;
  double contrast_sigma = 0.0;
  double peak_angle_deg = 0.0;
  double implied_input_deg = 0.0;  // from detector 1 (detector 2 is shifted by half a period)
};

struct PolarizationFit {
  std::vector<ContrastEntry> entries;
  std::optional<double> fidelity;
  std::optional<double> fidelity_sigma;
};

struct BasisScan {
  pol::Basis basis = pol::Basis::Linear;
  pol::PolarizationScan scan;
};

PolarizationFit analyze_polarization(std::span<const BasisScan> scans);

}  // namespace csrslab::experiment
