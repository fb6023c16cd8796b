#include "csrslab/conversion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "csrslab/errors.hpp"

namespace csrslab::fwm {

namespace {

constexpr double kPi = std::numbers::pi;

double kernel_real(OverlapKernel kernel, double dk, double z, double b) {
  switch (kernel) {
    case OverlapKernel::ModeProjected:
      return std::cos(dk * z) / (1.0 + 4.0 * z * z / (b * b));
    case OverlapKernel::SingleGouy: {
      const double tau = 2.0 * z / b;
      return (std::cos(dk * z) + tau * std::sin(dk * z)) / (1.0 + tau * tau);
    }
    case OverlapKernel::PlaneWave:
      return std::cos(dk * z);
  }
  return 0.0;
}

double kernel_imag(OverlapKernel kernel, double dk, double z, double b) {
  switch (kernel) {
    case OverlapKernel::ModeProjected:
      return std::sin(dk * z) / (1.0 + 4.0 * z * z / (b * b));
    case OverlapKernel::SingleGouy: {
      const double tau = 2.0 * z / b;
      return (std::sin(dk * z) - tau * std::cos(dk * z)) / (1.0 + tau * tau);
    }
    case OverlapKernel::PlaneWave:
      return std::sin(dk * z);
  }
  return 0.0;
}

}  // namespace

OverlapKernel parse_overlap_kernel(std::string_view name) {
  if (name == "mode-projected") return OverlapKernel::ModeProjected;
  if (name == "single-gouy") return OverlapKernel::SingleGouy;
  if (name == "plane-wave") return OverlapKernel::PlaneWave;
  throw InputError("unknown overlap kernel '" + std::string(name) + "'");
}

std::string_view to_string(OverlapKernel kernel) {
  switch (kernel) {
    case OverlapKernel::ModeProjected: return "mode-projected";
    case OverlapKernel::SingleGouy: return "single-gouy";
    case OverlapKernel::PlaneWave: return "plane-wave";
  }
  return "?";
}

ProcessConfig ProcessConfig::defaults(ProcessKind kind) {
  ProcessConfig c;
  c.kind = kind;
  return c;
}

double frequency_thz(double wavelength_nm) { return gas::kSpeedOfLight / wavelength_nm * 1e-3; }
double wavelength_nm(double frequency_thz) { return gas::kSpeedOfLight / frequency_thz * 1e-3; }

double converted_frequency(const ProcessConfig& config) {
  const double nu_s = frequency_thz(config.signal_nm);
  const double nu_hi = frequency_thz(config.pump_hi_nm);
  const double nu_lo = frequency_thz(config.pump_lo_nm);
  return config.kind == ProcessKind::Cars ? nu_s + nu_hi - nu_lo : nu_s - nu_hi + nu_lo;
}

double converted_wavelength_nm(const ProcessConfig& config) {
  const double nu = converted_frequency(config);
  if (!(nu > 0.0)) throw DomainError("converted frequency is not positive");
  return wavelength_nm(nu);
}

void ProcessConfig::validate(const gas::DispersionModel& model) const {
  for (double l : {signal_nm, pump_hi_nm, pump_lo_nm}) {
    if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("wavelengths must be positive");
  }
  if (!(pump_hi_nm < pump_lo_nm)) {
    throw DomainError("pump_hi must have the shorter wavelength of the two pumps");
  }
  for (double p : {signal_w, pump_hi_w, pump_lo_w}) {
    if (!(p >= 0.0)) throw DomainError("beam powers must be non-negative");
  }
  if (!(waist_um > 0.0)) throw DomainError("beam waist must be positive");
  if (!(cell_length_mm > 0.0)) throw DomainError("cell length must be positive");
  if (!(scale >= 0.0)) throw DomainError("scale constant must be non-negative");
  const double lc = converted_wavelength_nm(*this);
  if (lc < model.min_wavelength_nm() || lc > model.max_wavelength_nm()) {
    throw DomainError("converted wavelength " + std::to_string(lc) +
                      " nm outside the dispersion validity range");
  }
}

double ProcessConfig::confocal_parameter_m() const {
  const double mean_nm =
      0.25 * (signal_nm + pump_hi_nm + pump_lo_nm + converted_wavelength_nm(*this));
  const double w0 = waist_um * 1e-6;
  return 2.0 * kPi * w0 * w0 / (mean_nm * 1e-9);
}

double phase_mismatch(const ProcessConfig& config, const gas::GasState& state,
                      const gas::DispersionModel& model) {
  const double lc = converted_wavelength_nm(config);
  if (state.density_m3() == 0.0) {
    // validate the band even in vacuum
    (void)model.reference_refractivity(lc);
    return 0.0;
  }
  // only the refractive excess 2 pi (n - 1) / lambda survives: the vacuum
  // parts cancel by energy conservation
  const auto excess = [&](double lambda_nm) {
    return 2.0 * kPi * gas::refractivity(lambda_nm, state, model) / (lambda_nm * 1e-9);
  };
  const double es = excess(config.signal_nm);
  const double ehi = excess(config.pump_hi_nm);
  const double elo = excess(config.pump_lo_nm);
  const double ec = excess(lc);
  return config.kind == ProcessKind::Cars ? es + ehi - elo - ec : es + elo - ehi - ec;
}

std::complex<double> gaussian_overlap(double delta_k, double confocal_m, double length_m,
                                      OverlapKernel kernel) {
  if (!(confocal_m > 0.0)) throw DomainError("confocal parameter must be positive");
  if (!(length_m > 0.0)) throw DomainError("interaction length must be positive");
  if (!std::isfinite(delta_k)) throw DomainError("phase mismatch must be finite");

  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  constexpr unsigned kMaxDepth = 25;
  constexpr double kTol = 1e-11;
  const double half = 0.5 * length_m;
  double err_re = 0.0;
  double err_im = 0.0;
  const double re = Quad::integrate(
      [&](double z) { return kernel_real(kernel, delta_k, z, confocal_m); }, -half, half, kMaxDepth,
      kTol, &err_re);
  const double im = Quad::integrate(
      [&](double z) { return kernel_imag(kernel, delta_k, z, confocal_m); }, -half, half, kMaxDepth,
      kTol, &err_im);
  const std::complex<double> j(re, im);
  const double err = std::hypot(err_re, err_im);
  // near an exact zero of J fall back to an absolute floor tied to L
  const double allowed = std::max(1e-6 * std::abs(j), 1e-12 * length_m);
  if (!(err <= allowed) || !std::isfinite(re) || !std::isfinite(im)) {
    std::ostringstream msg;
    msg << "overlap quadrature did not converge: dk=" << delta_k << " rad/m, b=" << confocal_m
        << " m, L=" << length_m << " m, |J|=" << std::abs(j) << ", error estimate=" << err;
    throw NumericalError(msg.str());
  }
  return j;
}

double plane_wave_overlap(double delta_k, double length_m) {
  const double x = 0.5 * delta_k * length_m;
  if (x == 0.0) return length_m;
  return length_m * std::sin(x) / x;
}

double efficiency_response(const ProcessConfig& config, const gas::GasState& state,
                           const gas::DispersionModel& model, const raman::RamanLine& line,
                           double detuning_mhz) {
  const auto chi = raman::raman_response(line, state.pressure_bar(), detuning_mhz,
                                         state.temperature_k());
  const double dk = phase_mismatch(config, state, model);
  const auto j = gaussian_overlap(dk, config.confocal_parameter_m(), config.cell_length_m(),
                                  config.kernel);
  return config.pump_hi_w * config.pump_lo_w * std::norm(chi) * std::norm(j);
}

double internal_efficiency(const ProcessConfig& config, const gas::GasState& state,
                           const gas::DispersionModel& model, const raman::RamanLine& line,
                           double detuning_mhz) {
  const double eta = config.scale * efficiency_response(config, state, model, line, detuning_mhz);
  return std::clamp(eta, 0.0, 1.0);
}

double external_efficiency(double internal, std::span<const double> chain) {
  double eta = internal;
  for (double f : chain) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw DomainError("chain factor " + std::to_string(f) + " outside [0, 1]");
    }
    eta *= f;
  }
  return eta;
}

double calibrate_scale(const ProcessConfig& config, const raman::RamanLine& line,
                       const gas::DispersionModel& model, const EfficiencyPoint& target,
                       double temperature_k) {
  if (!(target.internal > 0.0) || target.internal > 1.0) {
    throw CalibrationError("calibration target efficiency must lie in (0, 1]");
  }
  if (!(target.pressure_bar > 0.0)) {
    throw CalibrationError("calibration target pressure must be positive");
  }
  const gas::GasState state(target.pressure_bar, temperature_k);
  const double response = efficiency_response(config, state, model, line, 0.0);
  if (!(response > 0.0) || !std::isfinite(response)) {
    throw CalibrationError("model response vanishes at the calibration pressure");
  }
  return target.internal / response;
}

EfficiencyScan efficiency_scan(const ProcessConfig& config, const raman::RamanLine& line,
                               const gas::DispersionModel& model,
                               std::span<const double> pressures_bar,
                               std::span<const double> chain, double temperature_k) {
  if (pressures_bar.empty()) throw InputError("efficiency scan needs at least one pressure");
  EfficiencyScan scan;
  scan.points.reserve(pressures_bar.size());
  for (double p : pressures_bar) {
    if (!(p > 0.0)) throw DomainError("scan pressures must be positive");
    const gas::GasState state(p, temperature_k);
    const double eta = internal_efficiency(config, state, model, line, 0.0);
    scan.points.push_back({p, eta, external_efficiency(eta, chain)});
    scan.delta_k.push_back(phase_mismatch(config, state, model));
  }
  double peak = 0.0;
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    if (scan.points[i].internal > peak) {
      peak = scan.points[i].internal;
      scan.peak_index = i;
    }
  }
  scan.normalized.reserve(scan.points.size());
  for (const auto& pt : scan.points) scan.normalized.push_back(peak > 0.0 ? pt.internal / peak : 0.0);
  return scan;
}

double signal_photon_rate(const ProcessConfig& config) {
  const double photon_energy = gas::kPlanck * gas::kSpeedOfLight / (config.signal_nm * 1e-9);
  return config.signal_w / photon_energy;
}

}  // namespace csrslab::fwm
