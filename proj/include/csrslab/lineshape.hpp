#pragma once

#include <complex>
#include <string_view>

#include <nlohmann/json.hpp>

#include "csrslab/gas_optics.hpp"

namespace csrslab::raman {

/// Which side band of the signal the four-wave mixing produces.
enum class ProcessKind { Cars, Csrs };

std::string_view to_string(ProcessKind kind);
ProcessKind parse_process_kind(std::string_view name);

/// Q1(1) resonance parameters measured through one process channel.
///
/// The linewidth model is Gamma(p) = A/p + B*p (FWHM, MHz): a Dicke
/// diffusion term that narrows the line as density grows, plus linear
/// collisional broadening.
struct RamanLine {
  double nu0_thz = 0.0;                 // zero-pressure center
  double shift_mhz_per_bar = 0.0;       // d nu / dP, negative for H2
  double dicke_mhz_bar = 0.0;           // A
  double broadening_mhz_per_bar = 0.0;  // B

  /// Defaults for each channel. A is not tabulated in the experiment and is
  /// set from the H2 self-diffusion coefficient (literature-calibrated).
  static RamanLine defaults(ProcessKind kind);

  static RamanLine from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  void validate() const;
};

/// Pressure-shifted center nu(p) = nu0 + shift * p, in THz.
double resonance_center(const RamanLine& line, double pressure_bar);

/// FWHM in MHz. Throws DomainError at p <= 0 where the Dicke term diverges.
double linewidth(const RamanLine& line, double pressure_bar);

/// Pressure of minimum linewidth, sqrt(A/B).
double narrowest_pressure(const RamanLine& line);

/// Reference density for the relative response, m^-3.
inline constexpr double kResponseDensityUnit = 1.0e25;

/// Complex Lorentzian Raman response N / (Delta + i Gamma/2) with N in units
/// of kResponseDensityUnit. Delta in MHz is measured from the pressure-shifted
/// center; positive means the pump difference lies above resonance.
std::complex<double> raman_response(const RamanLine& line, double pressure_bar, double detuning_mhz,
                                    double temperature_k = gas::kDefaultTemperatureK);

}  // namespace csrslab::raman
