#include "csrslab/report.hpp"

#include <cmath>

#include "csrslab/errors.hpp"
#include "csrslab/manifest.hpp"

namespace csrslab::report {

namespace {

using nlohmann::json;

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json slope_quantity(double value, double stat, double gauge) {
  const double sys = std::abs(value) * gauge;
  return {{"value", finite_or_null(value)},
          {"stat", finite_or_null(stat)},
          {"sys", finite_or_null(sys)},
          {"total", finite_or_null(std::hypot(stat, sys))}};
}

json plain_quantity(double value, double stat) {
  return {{"value", finite_or_null(value)}, {"stat", finite_or_null(stat)}};
}

json fit_summary(const fit::FitResult& f) {
  return {{"status", std::string(fit::to_string(f.status))},
          {"iterations", f.iterations},
          {"reduced_chi2", finite_or_null(f.reduced_chi2)},
          {"warnings", f.warnings}};
}

json spectrum_entry(const experiment::SpectrumFit& s) {
  return {{"pressure_bar", s.pressure_bar},
          {"center_THz", finite_or_null(s.center_thz)},
          {"center_sigma_MHz", finite_or_null(s.center_sigma_mhz)},
          {"fwhm_MHz", finite_or_null(s.fwhm_mhz)},
          {"fwhm_sigma_MHz", finite_or_null(s.fwhm_sigma_mhz)},
          {"fit", fit_summary(s.fit)}};
}

}  // namespace

bool all_converged(const ReportInputs& inputs) {
  for (const auto& p : inputs.processes) {
    if (!p.centers.converged()) return false;
    if (p.widths && !p.widths->converged()) return false;
    for (const auto& s : p.spectra) {
      if (!s.fit.converged()) return false;
    }
  }
  for (const auto& s : inputs.single_spectra) {
    if (!s.fit.converged()) return false;
  }
  if (inputs.polarization) {
    for (const auto& e : inputs.polarization->entries) {
      if (!e.fit.converged()) return false;
    }
  }
  return true;
}

json analysis_report(const ReportInputs& inputs) {
  const bool has_pol = inputs.polarization && !inputs.polarization->entries.empty();
  if (inputs.processes.empty() && inputs.single_spectra.empty() && !has_pol) {
    throw InputError("analysis report needs at least one fit");
  }
  const double gauge = inputs.gauge_rel_uncertainty;
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["generator"] = "csrslab " + tool_version();
  doc["pressure_gauge_rel_uncertainty"] = gauge;

  json processes = json::array();
  for (const auto& p : inputs.processes) {
    json entry;
    entry["process"] = std::string(raman::to_string(p.kind));
    json pressures = json::array();
    json spectra = json::array();
    for (const auto& s : p.spectra) {
      pressures.push_back(s.pressure_bar);
      spectra.push_back(spectrum_entry(s));
    }
    entry["pressures_bar"] = pressures;
    entry["shift_MHz_per_bar"] =
        slope_quantity(p.centers.values(0), p.centers.uncertainties(0), gauge);
    // the intercept sits at p = 0 and is untouched by a pressure-scale error
    entry["nu0_THz"] = plain_quantity(p.centers.values(1), p.centers.uncertainties(1));
    entry["center_fit"] = fit_summary(p.centers);
    if (p.widths) {
      entry["broadening_MHz_per_bar"] =
          slope_quantity(p.widths->value("B_MHz_per_bar"), p.widths->sigma("B_MHz_per_bar"), gauge);
      entry["dicke_A_MHz_bar"] =
          plain_quantity(p.widths->value("A_MHz_bar"), p.widths->sigma("A_MHz_bar"));
      entry["width_fit"] = fit_summary(*p.widths);
    } else {
      entry["broadening_MHz_per_bar"] = nullptr;
      entry["dicke_A_MHz_bar"] = nullptr;
      entry["width_fit"] = nullptr;
    }
    entry["spectra"] = spectra;
    processes.push_back(entry);
  }
  doc["processes"] = processes;

  json singles = json::array();
  for (const auto& s : inputs.single_spectra) singles.push_back(spectrum_entry(s));
  doc["spectra"] = singles;

  json pol_doc{{"contrasts", json::array()}, {"fidelity", nullptr}};
  if (inputs.polarization) {
    for (const auto& e : inputs.polarization->entries) {
      pol_doc["contrasts"].push_back({{"label", e.label},
                                      {"basis", std::string(pol::to_string(e.basis))},
                                      {"detector", e.detector},
                                      {"value", finite_or_null(e.contrast)},
                                      {"stat", finite_or_null(e.contrast_sigma)},
                                      {"peak_angle_deg", e.peak_angle_deg},
                                      {"implied_input_deg", e.implied_input_deg},
                                      {"fit", fit_summary(e.fit)}});
    }
    if (inputs.polarization->fidelity) {
      pol_doc["fidelity"] = plain_quantity(*inputs.polarization->fidelity,
                                           inputs.polarization->fidelity_sigma.value_or(0.0));
    }
  }
  doc["polarization"] = pol_doc;
  doc["all_converged"] = all_converged(inputs);
  return doc;
}

}  // namespace csrslab::report
