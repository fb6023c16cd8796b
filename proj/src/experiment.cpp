#include "csrslab/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "csrslab/conversion.hpp"
#include "csrslab/errors.hpp"

namespace csrslab::experiment {

namespace {

Spectrum expected_spectrum(const ExperimentConfig& cfg, ProcessKind kind, double pressure_bar) {
  const auto& ch = cfg.channel(kind);
  const gas::GasState state(pressure_bar, cfg.temperature_k);
  const double center = raman::resonance_center(ch.line, pressure_bar);
  const double half = 0.5 * raman::linewidth(ch.line, pressure_bar);
  // |J|^2 does not depend on the MHz-scale detuning: evaluate the peak once
  const double peak = fwm::internal_efficiency(ch.process, state, cfg.dispersion, ch.line, 0.0);
  const double photons = fwm::signal_photon_rate(ch.process) * ch.transmission();

  Spectrum s{kind, pressure_bar, {}};
  for (double pd : pump_difference_grid(cfg, pressure_bar)) {
    const double delta = (pd - center) * 1e6;
    const double eta = peak * half * half / (delta * delta + half * half);
    const double rate = detect::observed_rate(photons * eta + cfg.spectrum.pump_background_rate,
                                              ch.detector, cfg.module_dead_time_ns);
    s.rows.push_back({pressure_bar, pd, (pd - ch.line.nu0_thz) * 1e6, rate * cfg.spectrum.dwell_s,
                      cfg.spectrum.dwell_s});
  }
  return s;
}

void add_noise(Spectrum& s, detect::Generator& gen) {
  for (auto& row : s.rows) {
    const auto rec = detect::sample_counts(row.counts / row.duration_s, row.duration_s, gen);
    row.counts = static_cast<double>(rec.counts);
  }
}

}  // namespace

std::vector<double> pump_difference_grid(const ExperimentConfig& cfg, double pressure_bar) {
  const double c1 = raman::resonance_center(cfg.cars.line, pressure_bar);
  const double c2 = raman::resonance_center(cfg.csrs.line, pressure_bar);
  const double wide = std::max(raman::linewidth(cfg.cars.line, pressure_bar),
                               raman::linewidth(cfg.csrs.line, pressure_bar));
  const double mid = 0.5 * (c1 + c2);
  const double half_mhz = cfg.spectrum.span_linewidths * wide + 0.5 * std::abs(c1 - c2) * 1e6;
  const int n = cfg.spectrum.points;
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = -1.0 + 2.0 * i / (n - 1);
    grid.push_back(mid + t * half_mhz * 1e-6);
  }
  return grid;
}

double expected_count_rate(const ExperimentConfig& cfg, ProcessKind kind, double pressure_bar,
                           double pump_difference_thz) {
  const auto& ch = cfg.channel(kind);
  const gas::GasState state(pressure_bar, cfg.temperature_k);
  const double delta = (pump_difference_thz - raman::resonance_center(ch.line, pressure_bar)) * 1e6;
  const double eta = fwm::internal_efficiency(ch.process, state, cfg.dispersion, ch.line, delta);
  const double photons = fwm::signal_photon_rate(ch.process) * eta * ch.transmission();
  return detect::observed_rate(photons + cfg.spectrum.pump_background_rate, ch.detector,
                               cfg.module_dead_time_ns);
}

Spectrum simulate_spectrum(const ExperimentConfig& cfg, ProcessKind kind, double pressure_bar,
                           detect::Generator* gen) {
  auto s = expected_spectrum(cfg, kind, pressure_bar);
  if (gen != nullptr) add_noise(s, *gen);
  return s;
}

std::vector<Spectrum> simulate_pressure_series(const ExperimentConfig& cfg, ProcessKind kind,
                                               std::uint64_t seed, bool noise) {
  std::vector<Spectrum> out;
  const auto& pressures = cfg.spectrum.pressures_bar;
  const std::uint64_t channel = kind == ProcessKind::Cars ? 0 : 1;
  for (std::size_t i = 0; i < pressures.size(); ++i) {
    if (noise) {
      detect::Generator gen(detect::derive_seed(seed, 2 * i + channel));
      out.push_back(simulate_spectrum(cfg, kind, pressures[i], &gen));
    } else {
      out.push_back(simulate_spectrum(cfg, kind, pressures[i], nullptr));
    }
  }
  return out;
}

SpectrumFit analyze_spectrum(std::span<const SpectrumRow> rows) {
  if (rows.size() < 5) throw InputError("spectrum needs at least five rows");
  const bool absolute = std::all_of(rows.begin(), rows.end(),
                                    [](const SpectrumRow& r) { return std::isfinite(r.pump_difference_thz); });
  const double ref = absolute ? rows.front().pump_difference_thz : 0.0;
  std::vector<double> x, counts;
  x.reserve(rows.size());
  counts.reserve(rows.size());
  for (const auto& r : rows) {
    x.push_back(absolute ? (r.pump_difference_thz - ref) * 1e6 : r.detuning_mhz);
    counts.push_back(r.counts);
  }
  SpectrumFit out;
  out.pressure_bar = rows.front().pressure_bar;
  out.fit = fit::fit_lorentzian(fit::count_points(x, counts));
  out.center_thz = ref + out.fit.value("center") * 1e-6;
  out.center_sigma_mhz = out.fit.sigma("center");
  out.fwhm_mhz = out.fit.value("fwhm");
  out.fwhm_sigma_mhz = out.fit.sigma("fwhm");
  return out;
}

PressureSeriesFit analyze_pressure_series(ProcessKind kind, std::span<const Spectrum> spectra) {
  if (spectra.size() < 2) throw InputError("pressure series needs spectra at two or more pressures");
  PressureSeriesFit out;
  out.kind = kind;
  std::vector<fit::WeightedPoint> centers, widths;
  for (const auto& s : spectra) {
    auto f = analyze_spectrum(s.rows);
    if (!(f.center_sigma_mhz > 0.0) || !(f.fwhm_sigma_mhz > 0.0)) {
      throw NumericalError("spectrum at " + std::to_string(s.pressure_bar) +
                           " bar gave no usable uncertainty");
    }
    centers.push_back({f.pressure_bar, f.center_thz, f.center_sigma_mhz * 1e-6});
    widths.push_back({f.pressure_bar, f.fwhm_mhz, f.fwhm_sigma_mhz});
    out.spectra.push_back(std::move(f));
  }
  out.centers = fit::fit_center_vs_pressure(centers);
  if (widths.size() >= 3) out.widths = fit::fit_dicke_width(widths);
  return out;
}

pol::PolarizationScan simulate_polarization(const ExperimentConfig& cfg, pol::Basis basis,
                                            const pol::Imperfections& optics, detect::Generator* gen) {
  const auto setup = pol::basis_setup(basis, optics, cfg.polarization.input_angle_deg);
  const auto& angles = basis == pol::Basis::Linear ? cfg.polarization.linear_angles_deg
                                                   : cfg.polarization.circular_angles_deg;
  const double peak = cfg.polarization.peak_counts;
  const pol::ScanLevels levels{peak, optics.background_d1 * peak, optics.background_d2 * peak};
  auto scan = pol::simulate_scan(setup, levels, angles);
  scan.label = std::string(pol::to_string(basis));
  if (gen != nullptr) {
    for (auto& pt : scan.points) {
      pt.counts_d1 = static_cast<double>(detect::sample_counts(pt.counts_d1, 1.0, *gen).counts);
      pt.counts_d2 = static_cast<double>(detect::sample_counts(pt.counts_d2, 1.0, *gen).counts);
    }
  }
  return scan;
}

PolarizationFit analyze_polarization(std::span<const BasisScan> scans) {
  PolarizationFit out;
  for (const auto& bs : scans) {
    auto [f1, f2] = fit::fit_sine(bs.scan);
    const double period = bs.scan.period_deg;
    int det = 1;
    for (auto* f : {&f1, &f2}) {
      ContrastEntry e;
      e.basis = bs.basis;
      e.detector = det;
      e.label = std::string(pol::to_string(bs.basis)) + "/d" + std::to_string(det);
      const auto [c, sc] = fit::sine_contrast(*f);
      e.contrast = c;
      e.contrast_sigma = sc;
      e.peak_angle_deg = fit::sine_peak_angle(*f, period);
      const double d1_peak = det == 1 ? e.peak_angle_deg : e.peak_angle_deg + 0.5 * period;
      e.implied_input_deg = pol::implied_input_angle(bs.basis, d1_peak);
      e.fit = std::move(*f);
      out.entries.push_back(std::move(e));
      ++det;
    }
  }
  if (out.entries.size() == 4) {
    std::vector<double> values;
    double var = 0.0;
    for (const auto& e : out.entries) {
      values.push_back(std::clamp(e.contrast, 0.0, 1.0));
      var += e.contrast_sigma * e.contrast_sigma;
    }
    out.fidelity = pol::fidelity(values);
    out.fidelity_sigma = std::sqrt(var) / 4.0;
  }
  return out;
}

}  // namespace csrslab::experiment
