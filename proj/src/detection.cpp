#include "csrslab/detection.hpp"

#include <algorithm>
#include <cmath>

#include "csrslab/errors.hpp"

namespace csrslab::detect {

DetectorSpec DetectorSpec::apd() { return {"APD", 0.125, 100.0, 100.0}; }
DetectorSpec DetectorSpec::pmt() { return {"PMT", 0.045, 0.0, 10.0}; }
DetectorSpec DetectorSpec::ideal(std::string name) { return {std::move(name), 1.0, 0.0, 0.0}; }

void DetectorSpec::validate() const {
  if (!(quantum_efficiency >= 0.0 && quantum_efficiency <= 1.0)) {
    throw DomainError("detector " + name + ": quantum efficiency outside [0, 1]");
  }
  if (!(dead_time_ns >= 0.0)) throw DomainError("detector " + name + ": negative dead time");
  if (!(dark_rate >= 0.0)) throw DomainError("detector " + name + ": negative dark rate");
}

DetectorSpec DetectorSpec::from_json(const std::string& name, const nlohmann::json& doc) {
  DetectorSpec spec{name, doc.at("quantum_efficiency").get<double>(),
                    doc.value("dead_time_ns", 0.0), doc.value("dark_rate", 0.0)};
  spec.validate();
  return spec;
}

nlohmann::json DetectorSpec::to_json() const {
  return {{"quantum_efficiency", quantum_efficiency},
          {"dead_time_ns", dead_time_ns},
          {"dark_rate", dark_rate}};
}

double effective_dead_time_ns(const DetectorSpec& spec, double module_dead_time_ns) {
  return std::max(spec.dead_time_ns, module_dead_time_ns);
}

double observed_rate(double true_rate, const DetectorSpec& spec, double module_dead_time_ns) {
  if (!(true_rate >= 0.0)) throw DomainError("true rate must be non-negative");
  const double tau = effective_dead_time_ns(spec, module_dead_time_ns) * 1e-9;
  const double detected = spec.quantum_efficiency * true_rate + spec.dark_rate;
  return detected / (1.0 + detected * tau);
}

double dead_time_correct(double observed, double dead_time_ns) {
  if (!(observed >= 0.0)) throw DomainError("observed rate must be non-negative");
  const double tau = dead_time_ns * 1e-9;
  const double load = observed * tau;
  if (load >= 1.0) {
    throw SaturationError("observed rate " + std::to_string(observed) +
                          " /s at or beyond the dead-time limit 1/tau");
  }
  return observed / (1.0 - load);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CountRecord sample_counts(double rate, double duration_s, Generator& gen, std::string detector_name) {
  if (!(rate >= 0.0)) throw DomainError("count rate must be non-negative");
  if (!(duration_s > 0.0)) throw DomainError("duration must be positive");
  const double mean = rate * duration_s;
  std::uint64_t counts = 0;
  if (mean > 0.0) {
    std::poisson_distribution<std::uint64_t> dist(mean);
    counts = dist(gen);
  }
  return {duration_s, counts, std::move(detector_name)};
}

CountRecord sample_counts(double rate, double duration_s, std::uint64_t seed, std::string detector_name) {
  Generator gen(seed);
  return sample_counts(rate, duration_s, gen, std::move(detector_name));
}

BackgroundEstimate background_estimate(std::span<const CountRecord> records) {
  if (records.empty()) throw InputError("background estimate needs at least one record");
  double duration = 0.0;
  double counts = 0.0;
  for (const auto& r : records) {
    duration += r.duration_s;
    counts += static_cast<double>(r.counts);
  }
  if (!(duration > 0.0)) throw InputError("background records have zero total duration");
  BackgroundEstimate est;
  est.rate = counts / duration;
  est.uncertainty = std::sqrt(std::max(counts, 1.0)) / duration;
  est.compatible_with_zero = std::abs(est.rate) < 2.0 * est.uncertainty;
  return est;
}

}  // namespace csrslab::detect
