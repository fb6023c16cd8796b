#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "csrslab/cli.hpp"
#include "csrslab/config.hpp"
#include "csrslab/conversion.hpp"
#include "csrslab/detection.hpp"
#include "csrslab/errors.hpp"
#include "csrslab/experiment.hpp"
#include "csrslab/fits.hpp"
#include "csrslab/gas_optics.hpp"
#include "csrslab/lineshape.hpp"
#include "csrslab/manifest.hpp"
#include "csrslab/polarization.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace csrslab;

namespace {

ExperimentConfig config_from(const std::string& text) {
  if (text.empty()) return ExperimentConfig::defaults();
  auto doc = ExperimentConfig::default_document();
  doc.merge_patch(json::parse(text));
  return ExperimentConfig::from_document(doc);
}

std::vector<fit::WeightedPoint> points(const std::vector<double>& x, const std::vector<double>& y,
                                       const std::optional<std::vector<double>>& sigma) {
  if (x.size() != y.size()) throw InputError("x and y differ in length");
  if (!sigma) return fit::count_points(x, y);
  if (sigma->size() != x.size()) throw InputError("sigma differs in length from x");
  std::vector<fit::WeightedPoint> out;
  for (std::size_t i = 0; i < x.size(); ++i) out.push_back({x[i], y[i], (*sigma)[i]});
  return out;
}

json nan_to_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fit_json(const fit::FitResult& r) {
  json params = json::object();
  json sigmas = json::object();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    params[r.names[i]] = nan_to_null(r.values(k));
    sigmas[r.names[i]] = nan_to_null(r.uncertainties(k));
  }
  json cov = json::array();
  for (Eigen::Index i = 0; i < r.covariance.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < r.covariance.cols(); ++j) row.push_back(nan_to_null(r.covariance(i, j)));
    cov.push_back(row);
  }
  return json{{"names", r.names},       {"values", params},
              {"sigmas", sigmas},       {"covariance", cov},
              {"chi2", r.chi2},         {"reduced_chi2", r.reduced_chi2},
              {"status", fit::to_string(r.status)}, {"iterations", r.iterations},
              {"warnings", r.warnings}}
      .dump();
}

raman::RamanLine line_for(const std::string& process) {
  return raman::RamanLine::defaults(raman::parse_process_kind(process));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "csrslab C++ core";
  m.attr("__version__") = tool_version();

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<SaturationError>(m, "SaturationError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("number_density", &gas::number_density, py::arg("pressure_bar"),
        py::arg("temperature_k") = gas::kDefaultTemperatureK, "Ideal-gas number density in m^-3.");
  m.def(
      "refractivity",
      [](double wavelength_nm, double pressure_bar, double temperature_k) {
        static const auto model = gas::DispersionModel::hydrogen();
        return gas::refractivity(wavelength_nm, gas::GasState(pressure_bar, temperature_k), model);
      },
      py::arg("wavelength_nm"), py::arg("pressure_bar"), py::arg("temperature_k") = gas::kDefaultTemperatureK,
      "n - 1 of hydrogen.");

  m.def(
      "resonance_center",
      [](const std::string& process, double p) { return raman::resonance_center(line_for(process), p); },
      py::arg("process"), py::arg("pressure_bar"), "Resonance center in THz for CARS or CSRS.");
  m.def(
      "linewidth", [](const std::string& process, double p) { return raman::linewidth(line_for(process), p); },
      py::arg("process"), py::arg("pressure_bar"), "Lorentzian FWHM in MHz.");

  m.def(
      "gaussian_overlap",
      [](double dk, double b, double length, const std::string& kernel) {
        return fwm::gaussian_overlap(dk, b, length, fwm::parse_overlap_kernel(kernel));
      },
      py::arg("delta_k"), py::arg("confocal_m"), py::arg("length_m"), py::arg("kernel") = "mode-projected");
  m.def("plane_wave_overlap", &fwm::plane_wave_overlap, py::arg("delta_k"), py::arg("length_m"));

  m.def(
      "efficiency_scan_json",
      [](const std::string& process, const std::vector<double>& pressures, const std::string& config) {
        const auto cfg = config_from(config);
        const auto& ch = cfg.channel(raman::parse_process_kind(process));
        const auto chain = ch.chain();
        const auto scan =
            fwm::efficiency_scan(ch.process, ch.line, cfg.dispersion, pressures, chain, cfg.temperature_k);
        json doc{{"pressure_bar", json::array()}, {"eta_internal", json::array()},
                 {"eta_external", json::array()}, {"delta_k_rad_per_m", scan.delta_k},
                 {"normalized", scan.normalized}, {"peak_index", scan.peak_index}};
        for (const auto& pt : scan.points) {
          doc["pressure_bar"].push_back(pt.pressure_bar);
          doc["eta_internal"].push_back(pt.internal);
          doc["eta_external"].push_back(pt.external);
        }
        return doc.dump();
      },
      py::arg("process"), py::arg("pressures"), py::arg("config") = "");

  m.def(
      "simulate_spectrum_json",
      [](const std::string& process, double pressure, std::optional<std::uint64_t> seed, bool noise,
         const std::string& config) {
        const auto cfg = config_from(config);
        detect::Generator gen(seed.value_or(cfg.seed));
        const auto s = experiment::simulate_spectrum(cfg, raman::parse_process_kind(process), pressure,
                                                     noise ? &gen : nullptr);
        json doc{{"pressure_bar", pressure},
                 {"pump_difference_THz", json::array()},
                 {"detuning_MHz", json::array()},
                 {"counts", json::array()},
                 {"duration_s", json::array()}};
        for (const auto& r : s.rows) {
          doc["pump_difference_THz"].push_back(r.pump_difference_thz);
          doc["detuning_MHz"].push_back(r.detuning_mhz);
          doc["counts"].push_back(r.counts);
          doc["duration_s"].push_back(r.duration_s);
        }
        return doc.dump();
      },
      py::arg("process"), py::arg("pressure_bar"), py::arg("seed") = py::none(), py::arg("noise") = true,
      py::arg("config") = "");

  m.def(
      "observed_rate",
      [](double rate, double qe, double dead_time_ns, double dark, double module_ns) {
        detect::DetectorSpec spec{"detector", qe, dead_time_ns, dark};
        spec.validate();
        return detect::observed_rate(rate, spec, module_ns);
      },
      py::arg("true_rate"), py::arg("quantum_efficiency") = 1.0, py::arg("dead_time_ns") = 0.0,
      py::arg("dark_rate") = 0.0, py::arg("module_dead_time_ns") = detect::kCountingModuleDeadTimeNs);
  m.def("dead_time_correct", &detect::dead_time_correct, py::arg("observed_rate"), py::arg("dead_time_ns"));
  m.def(
      "sample_counts",
      [](double rate, double duration, std::uint64_t seed) {
        return detect::sample_counts(rate, duration, seed).counts;
      },
      py::arg("rate"), py::arg("duration_s"), py::arg("seed"));
  m.def("derive_seed", &detect::derive_seed, py::arg("seed"), py::arg("index"));

  m.def(
      "fit_lorentzian_json",
      [](const std::vector<double>& x, const std::vector<double>& y, const std::optional<std::vector<double>>& s) {
        return fit_json(fit::fit_lorentzian(points(x, y, s)));
      },
      py::arg("x"), py::arg("y"), py::arg("sigma") = py::none());
  m.def(
      "fit_center_json",
      [](const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& s) {
        return fit_json(fit::fit_center_vs_pressure(points(x, y, s)));
      },
      py::arg("pressure_bar"), py::arg("center_thz"), py::arg("sigma_thz"));
  m.def(
      "fit_dicke_json",
      [](const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& s) {
        return fit_json(fit::fit_dicke_width(points(x, y, s)));
      },
      py::arg("pressure_bar"), py::arg("width_mhz"), py::arg("sigma_mhz"));
  m.def(
      "fit_sine_json",
      [](const std::vector<double>& x, const std::vector<double>& y, double period,
         const std::optional<std::vector<double>>& s) { return fit_json(fit::fit_sine(points(x, y, s), period)); },
      py::arg("angles_deg"), py::arg("counts"), py::arg("period_deg"), py::arg("sigma") = py::none());
  m.def(
      "sine_peak_angle",
      [](double amplitude, double phase_deg, double offset, double period) {
        fit::FitResult r;
        r.names = {"amplitude", "phase_deg", "offset"};
        r.values = Eigen::Vector3d(amplitude, phase_deg, offset);
        return fit::sine_peak_angle(r, period);
      },
      py::arg("amplitude"), py::arg("phase_deg"), py::arg("offset"), py::arg("period_deg"));

  m.def(
      "simulate_scan_json",
      [](const std::string& basis_name, const std::vector<double>& angles, const std::string& preset,
         double input_angle, double amplitude, double bg1, double bg2) {
        const auto basis = pol::parse_basis(basis_name);
        const auto setup = pol::basis_setup(basis, pol::Imperfections::preset(preset), input_angle);
        const auto scan = pol::simulate_scan(setup, {amplitude, bg1, bg2}, angles);
        json doc{{"period_deg", scan.period_deg},
                 {"angle_deg", json::array()},
                 {"counts_d1", json::array()},
                 {"counts_d2", json::array()}};
        for (const auto& pt : scan.points) {
          doc["angle_deg"].push_back(pt.angle_deg);
          doc["counts_d1"].push_back(pt.counts_d1);
          doc["counts_d2"].push_back(pt.counts_d2);
        }
        return doc.dump();
      },
      py::arg("basis"), py::arg("angles_deg"), py::arg("preset"), py::arg("input_angle_deg"),
      py::arg("amplitude"), py::arg("background_d1"), py::arg("background_d2"));
  m.def("contrast", &pol::contrast, py::arg("amplitude"), py::arg("offset"));
  m.def(
      "fidelity", [](const std::vector<double>& c) { return pol::fidelity(c); }, py::arg("contrasts"));
  m.def(
      "implied_input_angle",
      [](const std::string& basis, double peak) { return pol::implied_input_angle(pol::parse_basis(basis), peak); },
      py::arg("basis"), py::arg("peak_angle_deg"));

  m.def("default_config_json", [] { return ExperimentConfig::default_document().dump(); });
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
