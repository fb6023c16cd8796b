#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

namespace csrslab::gas {

inline constexpr double kBoltzmann = 1.380649e-23;      // J/K
inline constexpr double kSpeedOfLight = 299792458.0;    // m/s
inline constexpr double kPlanck = 6.62607015e-34;       // J s
inline constexpr double kPascalPerBar = 1.0e5;
inline constexpr double kMaxPressureBar = 60.0;         // cell rating
inline constexpr double kDefaultTemperatureK = 296.0;

/// Ideal-gas number density in m^-3. Throws DomainError for p outside
/// [0, 60] bar or T <= 0.
double number_density(double pressure_bar, double temperature_k);

/// Thermodynamic state of the hydrogen fill.
class GasState {
 public:
  explicit GasState(double pressure_bar, double temperature_k = kDefaultTemperatureK);

  static GasState vacuum(double temperature_k = kDefaultTemperatureK) {
    return GasState(0.0, temperature_k);
  }

  double pressure_bar() const noexcept { return pressure_bar_; }
  double temperature_k() const noexcept { return temperature_k_; }
  double density_m3() const noexcept { return density_m3_; }

 private:
  double pressure_bar_;
  double temperature_k_;
  double density_m3_;
};

/// One term B * lambda^2 / (lambda^2 - C) of the Sellmeier sum, lambda in um.
struct SellmeierTerm {
  double strength;        // B, dimensionless
  double resonance_um2;   // C, um^2
};

/// Refractivity (n - 1) at a reference density, scaled linearly with density.
class DispersionModel {
 public:
  DispersionModel(double reference_density_m3, std::vector<SellmeierTerm> terms,
                  double min_wavelength_nm = 500.0, double max_wavelength_nm = 1700.0);

  /// Document layout: {reference_density_m3, terms: [{B, C_um2}, ...]}
  /// with optional valid_range_nm: [lo, hi].
  static DispersionModel from_json(const nlohmann::json& doc);
  static DispersionModel load(const std::filesystem::path& file);
  /// The shipped H2 coefficient file.
  static DispersionModel hydrogen();

  /// n - 1 at the reference density.
  double reference_refractivity(double wavelength_nm) const;
  double reference_density_m3() const noexcept { return reference_density_m3_; }
  double min_wavelength_nm() const noexcept { return min_nm_; }
  double max_wavelength_nm() const noexcept { return max_nm_; }
  const std::vector<SellmeierTerm>& terms() const noexcept { return terms_; }

  nlohmann::json to_json() const;

 private:
  double reference_density_m3_;
  std::vector<SellmeierTerm> terms_;
  double min_nm_;
  double max_nm_;
};

/// n - 1 at the state's density.
double refractivity(double wavelength_nm, const GasState& state, const DispersionModel& model);

double refractive_index(double wavelength_nm, const GasState& state, const DispersionModel& model);

/// k = 2 pi n / lambda in rad/m.
double wavevector(double wavelength_nm, const GasState& state, const DispersionModel& model);

/// Directory holding the shipped data files. CSRSLAB_DATA_DIR overrides the
/// compiled-in location.
std::filesystem::path data_dir();

}  // namespace csrslab::gas
