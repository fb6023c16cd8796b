#pragma once

#include <complex>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "csrslab/gas_optics.hpp"
#include "csrslab/lineshape.hpp"

namespace csrslab::fwm {

using raman::ProcessKind;

/// Longitudinal kernel of the on-axis overlap integral.
///
/// ModeProjected is 1/(1 + 4z^2/b^2): three input Gaussians sharing one
/// confocal parameter, one of them conjugated, projected onto the output
/// mode. SingleGouy keeps a single Gouy factor 1/(1 + 2iz/b). PlaneWave
/// ignores focusing altogether.
enum class OverlapKernel { ModeProjected, SingleGouy, PlaneWave };

OverlapKernel parse_overlap_kernel(std::string_view name);
std::string_view to_string(OverlapKernel kernel);

/// Wavelengths, powers and geometry of one conversion channel.
struct ProcessConfig {
  ProcessKind kind = ProcessKind::Csrs;
  double signal_nm = 863.0;
  double pump_hi_nm = 938.0;    // higher-frequency pump
  double pump_lo_nm = 1538.0;   // lower-frequency pump
  double signal_w = 5.0e-6;
  double pump_hi_w = 0.65;
  double pump_lo_w = 15.0;
  double waist_um = 80.0;
  double cell_length_mm = 140.0;
  double scale = 1.0;           // K, absorbs the absolute chi(3)
  OverlapKernel kernel = OverlapKernel::ModeProjected;

  static ProcessConfig defaults(ProcessKind kind);

  /// Throws DomainError when an invariant is violated, including a converted
  /// wavelength outside the dispersion band.
  void validate(const gas::DispersionModel& model) const;

  double cell_length_m() const noexcept { return cell_length_mm * 1e-3; }
  /// b = 2 pi w0^2 / lambda at the mean of the four wavelengths.
  double confocal_parameter_m() const;
};

double frequency_thz(double wavelength_nm);
double wavelength_nm(double frequency_thz);

/// Energy conservation: CARS nu_s + nu_hi - nu_lo, CSRS nu_s - nu_hi + nu_lo.
double converted_frequency(const ProcessConfig& config);
double converted_wavelength_nm(const ProcessConfig& config);

/// Collinear wavevector mismatch in rad/m.
/// CARS: k_s + k_hi - k_lo - k_c; CSRS: k_s + k_lo - k_hi - k_c.
double phase_mismatch(const ProcessConfig& config, const gas::GasState& state,
                      const gas::DispersionModel& model);

/// J = integral over [-L/2, L/2] of exp(i dk z) * kernel(z) dz, in metres.
/// Adaptive Gauss-Kronrod; throws NumericalError if the error estimate stays
/// above 1e-6 |J|.
std::complex<double> gaussian_overlap(double delta_k, double confocal_m, double length_m,
                                      OverlapKernel kernel = OverlapKernel::ModeProjected);

/// L sinc(dk L / 2).
double plane_wave_overlap(double delta_k, double length_m);

/// P_hi * P_lo * |chi|^2 * |J|^2 without the scale constant or clamping.
double efficiency_response(const ProcessConfig& config, const gas::GasState& state,
                           const gas::DispersionModel& model, const raman::RamanLine& line,
                           double detuning_mhz);

/// K * response, clamped to [0, 1].
double internal_efficiency(const ProcessConfig& config, const gas::GasState& state,
                           const gas::DispersionModel& model, const raman::RamanLine& line,
                           double detuning_mhz = 0.0);

/// eta_int times every chain factor; each factor must lie in [0, 1].
double external_efficiency(double internal, std::span<const double> chain);

struct EfficiencyPoint {
  double pressure_bar = 0.0;
  double internal = 0.0;
  double external = 0.0;
};

/// Scale K putting the on-resonance internal efficiency at target.pressure
/// exactly on target.internal. Throws CalibrationError for a non-positive
/// target or a vanishing model response.
double calibrate_scale(const ProcessConfig& config, const raman::RamanLine& line,
                       const gas::DispersionModel& model, const EfficiencyPoint& target,
                       double temperature_k = gas::kDefaultTemperatureK);

struct EfficiencyScan {
  std::vector<EfficiencyPoint> points;
  std::vector<double> delta_k;     // rad/m
  std::vector<double> normalized;  // internal / max(internal)
  std::size_t peak_index = 0;
};

/// On-resonance efficiency over a pressure grid; rows follow the grid order.
EfficiencyScan efficiency_scan(const ProcessConfig& config, const raman::RamanLine& line,
                               const gas::DispersionModel& model,
                               std::span<const double> pressures_bar,
                               std::span<const double> chain = {},
                               double temperature_k = gas::kDefaultTemperatureK);

/// Input signal photon flux, photons/s.
double signal_photon_rate(const ProcessConfig& config);

}  // namespace csrslab::fwm
