#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace csrslab::detect {

/// Dead time of the photon-counting module shared by all detectors.
inline constexpr double kCountingModuleDeadTimeNs = 6.0;

struct DetectorSpec {
  std::string name;
  double quantum_efficiency = 1.0;
  double dead_time_ns = 0.0;
  double dark_rate = 0.0;  // counts/s

  static DetectorSpec apd();  // InGaAs APD at 1346 nm
  static DetectorSpec pmt();  // visible PMT at 635 nm
  static DetectorSpec ideal(std::string name = "ideal");

  void validate() const;
  static DetectorSpec from_json(const std::string& name, const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

/// Dead time governing the chain: the larger of detector and module.
double effective_dead_time_ns(const DetectorSpec& spec,
                              double module_dead_time_ns = kCountingModuleDeadTimeNs);

/// Non-paralyzable counter: r' = QE r + dark, observed = r' / (1 + r' tau).
double observed_rate(double true_rate, const DetectorSpec& spec,
                     double module_dead_time_ns = kCountingModuleDeadTimeNs);

/// Inverse of the dead-time compression: r = r_obs / (1 - r_obs tau).
/// Throws SaturationError when r_obs tau >= 1.
double dead_time_correct(double observed_rate, double dead_time_ns);

struct CountRecord {
  double duration_s = 0.0;
  std::uint64_t counts = 0;
  std::string detector_name;

  double rate() const { return static_cast<double>(counts) / duration_s; }
  double rate_uncertainty() const {
    return std::sqrt(static_cast<double>(counts)) / duration_s;
  }
};

/// splitmix64 of (seed, index); used to give every grid point its own stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

using Generator = std::mt19937_64;

/// Poisson draw with mean rate * duration from an explicit generator.
CountRecord sample_counts(double rate, double duration_s, Generator& gen,
                          std::string detector_name = {});
CountRecord sample_counts(double rate, double duration_s, std::uint64_t seed,
                          std::string detector_name = {});

struct BackgroundEstimate {
  double rate = 0.0;
  double uncertainty = 0.0;
  bool compatible_with_zero = false;
};

/// Pooled rate over pumps-only records. Zero total counts use one count as
/// the uncertainty scale; compatible_with_zero means |rate| < 2 sigma.
BackgroundEstimate background_estimate(std::span<const CountRecord> records);

}  // namespace csrslab::detect
