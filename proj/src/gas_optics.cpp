#include "csrslab/gas_optics.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <string>

#include "csrslab/errors.hpp"

#ifndef CSRSLAB_DEFAULT_DATA_DIR
#define CSRSLAB_DEFAULT_DATA_DIR "data"
#endif

namespace csrslab::gas {

double number_density(double pressure_bar, double temperature_k) {
  if (!(pressure_bar >= 0.0) || pressure_bar > kMaxPressureBar) {
    throw DomainError("pressure " + std::to_string(pressure_bar) +
                      " bar outside [0, 60] bar");
  }
  if (!(temperature_k > 0.0) || !std::isfinite(temperature_k)) {
    throw DomainError("temperature must be positive, got " + std::to_string(temperature_k));
  }
  return pressure_bar * kPascalPerBar / (kBoltzmann * temperature_k);
}

GasState::GasState(double pressure_bar, double temperature_k)
    : pressure_bar_(pressure_bar),
      temperature_k_(temperature_k),
      density_m3_(number_density(pressure_bar, temperature_k)) {}

DispersionModel::DispersionModel(double reference_density_m3, std::vector<SellmeierTerm> terms,
                                 double min_wavelength_nm, double max_wavelength_nm)
    : reference_density_m3_(reference_density_m3),
      terms_(std::move(terms)),
      min_nm_(min_wavelength_nm),
      max_nm_(max_wavelength_nm) {
  if (!(reference_density_m3_ > 0.0)) {
    throw DomainError("dispersion reference density must be positive");
  }
  if (terms_.empty()) throw DomainError("dispersion model needs at least one Sellmeier term");
  if (!(min_nm_ > 0.0) || !(max_nm_ > min_nm_)) {
    throw DomainError("invalid dispersion wavelength range");
  }
  for (const auto& t : terms_) {
    // poles must sit below the validated band
    const double lmin_um2 = (min_nm_ * 1e-3) * (min_nm_ * 1e-3);
    if (!(t.resonance_um2 < lmin_um2)) {
      throw DomainError("Sellmeier pole inside the validated wavelength range");
    }
  }
}

DispersionModel DispersionModel::from_json(const nlohmann::json& doc) {
  std::vector<SellmeierTerm> terms;
  for (const auto& t : doc.at("terms")) {
    terms.push_back({t.at("B").get<double>(), t.at("C_um2").get<double>()});
  }
  double lo = 500.0;
  double hi = 1700.0;
  if (doc.contains("valid_range_nm")) {
    lo = doc["valid_range_nm"].at(0).get<double>();
    hi = doc["valid_range_nm"].at(1).get<double>();
  }
  return DispersionModel(doc.at("reference_density_m3").get<double>(), std::move(terms), lo, hi);
}

DispersionModel DispersionModel::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open dispersion file " + file.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("dispersion file " + file.string() + ": " + e.what());
  }
}

DispersionModel DispersionModel::hydrogen() { return load(data_dir() / "h2_dispersion.json"); }

double DispersionModel::reference_refractivity(double wavelength_nm) const {
  if (!(wavelength_nm >= min_nm_ && wavelength_nm <= max_nm_)) {
    throw DomainError("wavelength " + std::to_string(wavelength_nm) +
                      " nm outside the validated dispersion range");
  }
  const double l2 = (wavelength_nm * 1e-3) * (wavelength_nm * 1e-3);
  double sum = 0.0;
  for (const auto& t : terms_) sum += t.strength * l2 / (l2 - t.resonance_um2);
  return sum;
}

nlohmann::json DispersionModel::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : terms_) terms.push_back({{"B", t.strength}, {"C_um2", t.resonance_um2}});
  return {{"reference_density_m3", reference_density_m3_},
          {"valid_range_nm", {min_nm_, max_nm_}},
          {"terms", terms}};
}

double refractivity(double wavelength_nm, const GasState& state, const DispersionModel& model) {
  const double excess = model.reference_refractivity(wavelength_nm);
  return excess * (state.density_m3() / model.reference_density_m3());
}

double refractive_index(double wavelength_nm, const GasState& state, const DispersionModel& model) {
  return 1.0 + refractivity(wavelength_nm, state, model);
}

double wavevector(double wavelength_nm, const GasState& state, const DispersionModel& model) {
  return 2.0 * std::numbers::pi * refractive_index(wavelength_nm, state, model) /
         (wavelength_nm * 1e-9);
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("CSRSLAB_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return CSRSLAB_DEFAULT_DATA_DIR;
}

}  // namespace csrslab::gas
