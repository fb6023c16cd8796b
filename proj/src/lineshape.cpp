#include "csrslab/lineshape.hpp"

#include <cmath>
#include <string>

#include "csrslab/errors.hpp"

namespace csrslab::raman {

std::string_view to_string(ProcessKind kind) {
  return kind == ProcessKind::Cars ? "CARS" : "CSRS";
}

ProcessKind parse_process_kind(std::string_view name) {
  if (name == "CARS" || name == "cars") return ProcessKind::Cars;
  if (name == "CSRS" || name == "csrs") return ProcessKind::Csrs;
  throw InputError("unknown process kind '" + std::string(name) + "' (expected CARS or CSRS)");
}

RamanLine RamanLine::defaults(ProcessKind kind) {
  // A = 309 MHz bar: D0 ~ 1.4 cm^2 s^-1 amagat at the 2.41 um pump-difference
  // grating, FWHM = D0 k^2 / pi.
  if (kind == ProcessKind::Cars) return {124.571257, -94.0, 309.0, 42.7};
  return {124.571304, -93.0, 309.0, 46.9};
}

RamanLine RamanLine::from_json(const nlohmann::json& doc) {
  RamanLine line;
  line.nu0_thz = doc.at("nu0_THz").get<double>();
  line.shift_mhz_per_bar = doc.at("shift_MHz_per_bar").get<double>();
  line.dicke_mhz_bar = doc.at("A_MHz_bar").get<double>();
  line.broadening_mhz_per_bar = doc.at("B_MHz_per_bar").get<double>();
  line.validate();
  return line;
}

nlohmann::json RamanLine::to_json() const {
  return {{"nu0_THz", nu0_thz},
          {"shift_MHz_per_bar", shift_mhz_per_bar},
          {"A_MHz_bar", dicke_mhz_bar},
          {"B_MHz_per_bar", broadening_mhz_per_bar}};
}

void RamanLine::validate() const {
  if (!(nu0_thz > 0.0)) throw DomainError("Raman line: nu0 must be positive");
  if (!(broadening_mhz_per_bar > 0.0)) throw DomainError("Raman line: B must be positive");
  if (!(dicke_mhz_bar >= 0.0)) throw DomainError("Raman line: A must be non-negative");
  if (!std::isfinite(shift_mhz_per_bar)) throw DomainError("Raman line: shift must be finite");
}

double resonance_center(const RamanLine& line, double pressure_bar) {
  if (!(pressure_bar >= 0.0) || pressure_bar > gas::kMaxPressureBar) {
    throw DomainError("pressure outside [0, 60] bar");
  }
  return line.nu0_thz + line.shift_mhz_per_bar * pressure_bar * 1e-6;
}

double linewidth(const RamanLine& line, double pressure_bar) {
  if (!(pressure_bar > 0.0)) {
    throw DomainError("linewidth undefined at zero pressure (Dicke term diverges)");
  }
  if (pressure_bar > gas::kMaxPressureBar) throw DomainError("pressure above 60 bar");
  return line.dicke_mhz_bar / pressure_bar + line.broadening_mhz_per_bar * pressure_bar;
}

double narrowest_pressure(const RamanLine& line) {
  return std::sqrt(line.dicke_mhz_bar / line.broadening_mhz_per_bar);
}

std::complex<double> raman_response(const RamanLine& line, double pressure_bar, double detuning_mhz,
                                    double temperature_k) {
  const double width = linewidth(line, pressure_bar);
  const double density = gas::number_density(pressure_bar, temperature_k) / kResponseDensityUnit;
  return density / std::complex<double>(detuning_mhz, 0.5 * width);
}

}  // namespace csrslab::raman
