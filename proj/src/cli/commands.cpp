#include "csrslab/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "csrslab/config.hpp"
#include "csrslab/csv.hpp"
#include "csrslab/errors.hpp"
#include "csrslab/experiment.hpp"
#include "csrslab/manifest.hpp"
#include "csrslab/report.hpp"

namespace csrslab::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using raman::ProcessKind;

constexpr std::uint64_t kPolarizationStream = 1000;
constexpr ProcessKind kBothChannels[] = {ProcessKind::Cars, ProcessKind::Csrs};

// Reference values the reproduced summary is compared against.
struct PaperValue {
  const char* quantity;
  ProcessKind kind;
  double value;
  double uncertainty;  // NaN when none was quoted
  const char* unit;
};

const double kNoValue = std::nan("");

constexpr const char* kSummaryHeader =
    "quantity,process,value,uncertainty,unit,paper_value,paper_uncertainty,within_paper_uncertainty\n";

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "csrslab-out";
  bool json_only = false;
};

/// Per-invocation state shared by the subcommands.
struct Run {
  std::string command;
  std::vector<std::string> args;
  Globals globals;
  json doc;
  std::optional<ExperimentConfig> cfg;
  fs::path out;
  std::vector<FileDigest> inputs;
  std::vector<std::string> outputs;
  json summary = json::object();
  std::ostream* log = nullptr;

  void say(const std::string& line) const {
    if (!globals.json_only) *log << line << '\n';
  }

  template <class Body>
  void write(const std::string& rel, Body&& body) {
    csv::write_to(out / rel, std::forward<Body>(body));
    outputs.push_back(rel);
  }

  void write_json(const std::string& rel, const json& doc_out) {
    write(rel, [&](std::ostream& os) { os << doc_out.dump(2) << '\n'; });
  }

  void add_input(const fs::path& p) { inputs.push_back({p.generic_string(), sha256_file(p)}); }
};

/// Config document after defaults, file and flag overrides, in that order.
json resolve_document(Run& run, const std::optional<json>& pinned,
                      const std::function<void(json&)>& overrides) {
  json doc;
  if (pinned) {
    doc = *pinned;
  } else {
    std::string path = run.globals.config_path;
    if (path.empty()) {
      if (const char* env = std::getenv("CSRSLAB_CONFIG"); env != nullptr && *env != '\0') path = env;
    }
    if (!path.empty()) {
      doc = load_config_document(path);
      run.add_input(path);
    } else {
      doc = ExperimentConfig::default_document();
    }
  }
  if (overrides) overrides(doc);
  if (run.globals.seed) doc["seed"] = *run.globals.seed;
  return doc;
}

std::string pressure_tag(double p) { return "p_" + csv::format_number(p); }

std::string kind_name(ProcessKind k) { return std::string(raman::to_string(k)); }

std::vector<ProcessKind> channels_for(const std::string& which) {
  if (which == "both") return {ProcessKind::Cars, ProcessKind::Csrs};
  return {raman::parse_process_kind(which)};
}

std::vector<pol::Basis> bases_for(const std::string& which) {
  if (which == "both") return {pol::Basis::Linear, pol::Basis::Circular};
  return {pol::parse_basis(which)};
}

std::string fit_status(const fit::FitResult& f) { return std::string(fit::to_string(f.status)); }

void write_spectrum_fits(std::ostream& os, std::span<const experiment::SpectrumFit> fits) {
  os << "pressure_bar,center_THz,center_sigma_MHz,fwhm_MHz,fwhm_sigma_MHz,amplitude,offset,reduced_chi2,status\n";
  for (const auto& f : fits) {
    os << csv::format_number(f.pressure_bar) << ',' << csv::format_number(f.center_thz) << ','
       << csv::format_number(f.center_sigma_mhz) << ',' << csv::format_number(f.fwhm_mhz) << ','
       << csv::format_number(f.fwhm_sigma_mhz) << ',' << csv::format_number(f.fit.value("amplitude"))
       << ',' << csv::format_number(f.fit.value("offset")) << ','
       << csv::format_number(f.fit.reduced_chi2) << ',' << fit_status(f.fit) << '\n';
  }
}

void write_polarization_fits(std::ostream& os, const experiment::PolarizationFit& pf) {
  os << "label,amplitude,amplitude_sigma,phase_deg,phase_sigma_deg,offset,offset_sigma,contrast,"
        "contrast_sigma,peak_angle_deg,implied_input_deg,status\n";
  for (const auto& e : pf.entries) {
    const auto& f = e.fit;
    os << e.label << ',' << csv::format_number(f.value("amplitude")) << ','
       << csv::format_number(f.sigma("amplitude")) << ',' << csv::format_number(f.value("phase_deg")) << ','
       << csv::format_number(f.sigma("phase_deg")) << ',' << csv::format_number(f.value("offset")) << ','
       << csv::format_number(f.sigma("offset")) << ',' << csv::format_number(e.contrast) << ','
       << csv::format_number(e.contrast_sigma) << ',' << csv::format_number(e.peak_angle_deg) << ','
       << csv::format_number(e.implied_input_deg) << ',' << fit_status(f) << '\n';
  }
}

// Simulation steps shared by the individual commands and reproduce-paper.

std::map<ProcessKind, std::vector<experiment::Spectrum>> simulate_spectra(Run& run,
                                                                          std::span<const ProcessKind> kinds,
                                                                          bool noise, bool write_csv) {
  std::map<ProcessKind, std::vector<experiment::Spectrum>> all;
  const auto& cfg = *run.cfg;
  for (const auto kind : kinds) {
    auto series = experiment::simulate_pressure_series(cfg, kind, cfg.seed, noise);
    if (write_csv) {
      for (const auto& s : series) {
        run.write("spectra/" + kind_name(kind) + "/" + pressure_tag(s.pressure_bar) + ".csv",
                  [&](std::ostream& os) { csv::write_spectrum(os, s); });
      }
    } else {
      json doc = json::array();
      for (const auto& s : series) {
        json cols{{"pump_difference_THz", json::array()}, {"detuning_MHz", json::array()},
                  {"counts", json::array()}, {"duration_s", json::array()}};
        for (const auto& r : s.rows) {
          cols["pump_difference_THz"].push_back(r.pump_difference_thz);
          cols["detuning_MHz"].push_back(r.detuning_mhz);
          cols["counts"].push_back(r.counts);
          cols["duration_s"].push_back(r.duration_s);
        }
        doc.push_back({{"pressure_bar", s.pressure_bar}, {"columns", std::move(cols)}});
      }
      run.write_json("spectra/" + kind_name(kind) + ".json", doc);
    }
    run.say("simulated " + std::to_string(series.size()) + " " + kind_name(kind) + " spectra");
    all[kind] = std::move(series);
  }
  return all;
}

std::map<ProcessKind, fwm::EfficiencyScan> scan_efficiency(Run& run, std::span<const ProcessKind> kinds,
                                                           bool write_csv) {
  std::map<ProcessKind, fwm::EfficiencyScan> scans;
  const auto& cfg = *run.cfg;
  const auto pressures = cfg.efficiency_grid.pressures();
  for (const auto kind : kinds) {
    const auto& ch = cfg.channel(kind);
    const auto chain = ch.chain();
    auto scan = fwm::efficiency_scan(ch.process, ch.line, cfg.dispersion, pressures, chain, cfg.temperature_k);
    if (write_csv) {
      run.write("efficiency/" + kind_name(kind) + ".csv",
                [&](std::ostream& os) { csv::write_efficiency(os, scan); });
    } else {
      json cols{{"pressure_bar", json::array()}, {"eta_internal", json::array()},
                {"eta_external", json::array()}, {"delta_k_rad_per_m", scan.delta_k},
                {"normalized", scan.normalized}};
      for (const auto& pt : scan.points) {
        cols["pressure_bar"].push_back(pt.pressure_bar);
        cols["eta_internal"].push_back(pt.internal);
        cols["eta_external"].push_back(pt.external);
      }
      run.write_json("efficiency/" + kind_name(kind) + ".json", {{"columns", std::move(cols)}});
    }
    const auto& peak = scan.points[scan.peak_index];
    run.say(kind_name(kind) + " efficiency peaks at " + csv::format_number(peak.pressure_bar) +
            " bar (eta_int " + csv::format_number(peak.internal) + ")");
    run.summary["efficiency"][kind_name(kind)] = {{"peak_pressure_bar", peak.pressure_bar},
                                                  {"peak_eta_internal", peak.internal},
                                                  {"peak_eta_external", peak.external}};
    scans[kind] = std::move(scan);
  }
  return scans;
}

std::vector<experiment::BasisScan> simulate_polarization(Run& run, std::span<const pol::Basis> bases, bool noise,
                                                         bool write_csv) {
  std::vector<experiment::BasisScan> scans;
  const auto& cfg = *run.cfg;
  for (const auto basis : bases) {
    detect::Generator gen(detect::derive_seed(cfg.seed, kPolarizationStream + static_cast<std::uint64_t>(basis)));
    auto scan = experiment::simulate_polarization(cfg, basis, cfg.polarization.optics, noise ? &gen : nullptr);
    const std::string name(pol::to_string(basis));
    if (write_csv) {
      run.write("polarization/" + name + ".csv", [&](std::ostream& os) { csv::write_polarization(os, scan); });
    } else {
      json cols{{"angle_deg", json::array()}, {"counts_d1", json::array()}, {"counts_d2", json::array()}};
      for (const auto& pt : scan.points) {
        cols["angle_deg"].push_back(pt.angle_deg);
        cols["counts_d1"].push_back(pt.counts_d1);
        cols["counts_d2"].push_back(pt.counts_d2);
      }
      run.write_json("polarization/" + name + ".json",
                     {{"period_deg", scan.period_deg}, {"columns", std::move(cols)}});
    }
    run.say("simulated " + name + " polarization scan (" + std::to_string(scan.points.size()) + " angles)");
    scans.push_back({basis, std::move(scan)});
  }
  return scans;
}

// Commands. Each returns an exit code; the caller writes the manifest.

int cmd_simulate_spectrum(Run& run, const std::string& process, bool noise) {
  const auto kinds = channels_for(process);
  simulate_spectra(run, kinds, noise, !run.globals.json_only);
  return kOk;
}

int cmd_scan_efficiency(Run& run, const std::string& process) {
  const auto kinds = channels_for(process);
  scan_efficiency(run, kinds, !run.globals.json_only);
  return kOk;
}

int cmd_simulate_polarization(Run& run, const std::string& basis, bool noise) {
  const auto bases = bases_for(basis);
  simulate_polarization(run, bases, noise, !run.globals.json_only);
  return kOk;
}

std::optional<ProcessKind> kind_from_path(const fs::path& p) {
  for (const auto& part : p) {
    if (part == "CARS") return ProcessKind::Cars;
    if (part == "CSRS") return ProcessKind::Csrs;
  }
  return std::nullopt;
}

std::optional<pol::Basis> basis_from_path(const fs::path& p) {
  const auto stem = p.stem().string();
  if (stem.find("circular") != std::string::npos) return pol::Basis::Circular;
  if (stem.find("linear") != std::string::npos) return pol::Basis::Linear;
  return std::nullopt;
}

int finish_report(Run& run, report::ReportInputs& inputs) {
  inputs.gauge_rel_uncertainty = run.cfg->gauge_rel_uncertainty;
  const auto doc = report::analysis_report(inputs);
  run.write_json("report.json", doc);
  run.summary["report"] = doc;
  const bool ok = doc.at("all_converged").get<bool>();
  if (!ok) run.say("warning: at least one fit did not converge");
  return ok ? kOk : kNotConverged;
}

void describe_series(const Run& run, const experiment::PressureSeriesFit& s) {
  const auto& c = s.centers;
  std::ostringstream line;
  line << kind_name(s.kind) << ": shift " << c.value("slope_MHz_per_bar") << " +/- " << c.sigma("slope_MHz_per_bar") << " MHz/bar, nu0 "
       << csv::format_number(c.value("intercept_THz")) << " THz +/- " << c.sigma("intercept_THz") * 1e6 << " MHz";
  if (s.widths) {
    line << ", B " << s.widths->value("B_MHz_per_bar") << " +/- " << s.widths->sigma("B_MHz_per_bar")
         << " MHz/bar";
  }
  run.say(line.str());
}

int cmd_analyze(Run& run, const std::string& kind, const std::vector<std::string>& files,
                const std::string& process_opt, const std::string& basis_opt) {
  report::ReportInputs inputs;
  const bool csv_out = !run.globals.json_only;
  if (kind == "spectrum" || kind == "pressure-series") {
    std::map<ProcessKind, std::vector<experiment::Spectrum>> by_kind;
    for (const auto& f : files) {
      run.add_input(f);
      auto whole = csv::read_spectrum(csv::read_file(f), f);
      ProcessKind k = ProcessKind::Csrs;
      if (!process_opt.empty()) {
        k = raman::parse_process_kind(process_opt);
      } else if (auto from_path = kind_from_path(f)) {
        k = *from_path;
      }
      whole.kind = k;
      for (auto& s : csv::split_by_pressure(whole)) by_kind[k].push_back(std::move(s));
    }
    if (kind == "spectrum") {
      for (const auto& [k, spectra] : by_kind) {
        std::vector<experiment::SpectrumFit> fits;
        for (const auto& s : spectra) fits.push_back(experiment::analyze_spectrum(s.rows));
        if (csv_out) {
          run.write("fits/" + kind_name(k) + "_spectrum_fits.csv",
                    [&](std::ostream& os) { write_spectrum_fits(os, fits); });
        }
        for (const auto& f : fits) {
          run.say(kind_name(k) + " " + csv::format_number(f.pressure_bar) + " bar: center " +
                  csv::format_number(f.center_thz) + " THz, FWHM " + csv::format_number(f.fwhm_mhz) + " MHz");
        }
        inputs.single_spectra.insert(inputs.single_spectra.end(), fits.begin(), fits.end());
      }
    } else {
      for (auto& [k, spectra] : by_kind) {
        std::sort(spectra.begin(), spectra.end(),
                  [](const auto& a, const auto& b) { return a.pressure_bar < b.pressure_bar; });
        auto series = experiment::analyze_pressure_series(k, spectra);
        if (csv_out) {
          run.write("fits/" + kind_name(k) + "_spectrum_fits.csv",
                    [&](std::ostream& os) { write_spectrum_fits(os, series.spectra); });
        }
        describe_series(run, series);
        inputs.processes.push_back(std::move(series));
      }
    }
  } else if (kind == "polarization") {
    std::vector<experiment::BasisScan> scans;
    for (const auto& f : files) {
      run.add_input(f);
      std::optional<pol::Basis> b = basis_opt.empty() ? basis_from_path(f) : pol::parse_basis(basis_opt);
      if (!b) throw InputError(f + ": cannot tell the basis from the file name; pass --basis");
      auto scan = csv::read_polarization(csv::read_file(f), f);
      scan.label = std::string(pol::to_string(*b));
      scan.period_deg = *b == pol::Basis::Linear ? 90.0 : 180.0;
      scans.push_back({*b, std::move(scan)});
    }
    auto pf = experiment::analyze_polarization(scans);
    if (csv_out) run.write("fits/polarization_fits.csv", [&](std::ostream& os) { write_polarization_fits(os, pf); });
    for (const auto& e : pf.entries) {
      run.say(e.label + ": contrast " + csv::format_number(e.contrast) + " +/- " +
              csv::format_number(e.contrast_sigma));
    }
    if (pf.fidelity) run.say("fidelity " + csv::format_number(*pf.fidelity));
    inputs.polarization = std::move(pf);
  } else {
    throw InputError("unknown analysis kind '" + kind + "'");
  }
  return finish_report(run, inputs);
}

void summary_row(std::ostream& os, const std::string& quantity, const std::string& process, double value,
                 double uncertainty, const std::string& unit, double paper, double paper_unc) {
  std::string within;
  if (std::isfinite(paper) && std::isfinite(paper_unc) && std::isfinite(value)) {
    within = std::abs(value - paper) <= paper_unc ? "yes" : "no";
  }
  auto num = [](double x) { return std::isfinite(x) ? csv::format_number(x) : std::string(); };
  os << quantity << ',' << process << ',' << num(value) << ',' << num(uncertainty) << ',' << unit << ','
     << num(paper) << ',' << num(paper_unc) << ',' << within << '\n';
}

int cmd_reproduce_paper(Run& run) {
  // lineshapes, then their fits
  const auto spectra = simulate_spectra(run, kBothChannels, true, true);
  report::ReportInputs inputs;
  for (const auto kind : kBothChannels) {
    auto series = experiment::analyze_pressure_series(kind, spectra.at(kind));
    run.write("fits/" + kind_name(kind) + "_spectrum_fits.csv",
              [&](std::ostream& os) { write_spectrum_fits(os, series.spectra); });
    describe_series(run, series);
    inputs.processes.push_back(std::move(series));
  }

  const auto eff = scan_efficiency(run, kBothChannels, true);

  const pol::Basis bases[] = {pol::Basis::Linear, pol::Basis::Circular};
  const auto scans = simulate_polarization(run, bases, true, true);
  auto pf = experiment::analyze_polarization(scans);
  run.write("fits/polarization_fits.csv", [&](std::ostream& os) { write_polarization_fits(os, pf); });
  inputs.polarization = pf;

  const int code = finish_report(run, inputs);

  const PaperValue shifts[] = {{"shift", ProcessKind::Cars, -94.0, 1.0, "MHz/bar"},
                               {"shift", ProcessKind::Csrs, -93.0, 1.0, "MHz/bar"}};
  const PaperValue nu0[] = {{"nu0", ProcessKind::Cars, 124.571257, 2e-6, "THz"},
                            {"nu0", ProcessKind::Csrs, 124.571304, 2e-6, "THz"}};
  const PaperValue broadening[] = {{"broadening", ProcessKind::Cars, 42.7, 0.5, "MHz/bar"},
                                   {"broadening", ProcessKind::Csrs, 46.9, 0.5, "MHz/bar"}};

  run.write("summary.csv", [&](std::ostream& os) {
    os << kSummaryHeader;
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& s = inputs.processes[i];
      const double gauge = run.cfg->gauge_rel_uncertainty;
      const double shift = s.centers.value("slope_MHz_per_bar");
      const double shift_sigma = std::hypot(s.centers.sigma("slope_MHz_per_bar"), gauge * shift);
      summary_row(os, shifts[i].quantity, kind_name(s.kind), shift, shift_sigma, shifts[i].unit, shifts[i].value,
                  shifts[i].uncertainty);
      summary_row(os, nu0[i].quantity, kind_name(s.kind), s.centers.value("intercept_THz"), s.centers.sigma("intercept_THz"), nu0[i].unit,
                  nu0[i].value, nu0[i].uncertainty);
      if (s.widths) {
        const double b = s.widths->value("B_MHz_per_bar");
        summary_row(os, broadening[i].quantity, kind_name(s.kind), b,
                    std::hypot(s.widths->sigma("B_MHz_per_bar"), gauge * b), broadening[i].unit,
                    broadening[i].value, broadening[i].uncertainty);
      }
    }
    const auto& cars = eff.at(ProcessKind::Cars);
    const auto& peak = cars.points[cars.peak_index];
    summary_row(os, "peak_pressure", "CARS", peak.pressure_bar, run.cfg->efficiency_grid.step_bar / 2, "bar", 8.0,
                0.2);
    summary_row(os, "eta_internal_at_anchor", "CARS", run.cfg->cars.anchor.internal, kNoValue, "", 8.1e-10,
                kNoValue);
    summary_row(os, "eta_external_at_anchor", "CARS", run.cfg->cars.anchor.external, kNoValue, "", 1.5e-11,
                kNoValue);
    summary_row(os, "eta_internal_at_anchor", "CSRS", run.cfg->csrs.anchor.internal, kNoValue, "", 1.1e-9,
                kNoValue);
    summary_row(os, "eta_external_at_anchor", "CSRS", run.cfg->csrs.anchor.external, kNoValue, "", 9.0e-11,
                kNoValue);
    summary_row(os, "fidelity", "CSRS", pf.fidelity.value_or(kNoValue), pf.fidelity_sigma.value_or(kNoValue), "",
                0.904, kNoValue);
  });
  run.say("wrote " + std::to_string(run.outputs.size()) + " files to " + run.out.string());
  return code;
}

void write_manifest(Run& run) {
  RunManifest m;
  m.command = run.command;
  m.args = run.args;
  m.config_hash = config_hash(run.doc);
  m.seed = run.cfg ? run.cfg->seed : 0;
  m.tool_version = tool_version();
  m.timestamp = utc_timestamp();
  m.inputs = run.inputs;
  std::sort(run.outputs.begin(), run.outputs.end());
  run.outputs.erase(std::unique(run.outputs.begin(), run.outputs.end()), run.outputs.end());
  for (const auto& rel : run.outputs) m.outputs.push_back({rel, sha256_file(run.out / rel)});
  m.config = run.doc;
  fs::create_directories(run.out);
  m.write(run.out / "manifest.json");
}

/// Arguments as stored in the manifest. The output directory does not
/// influence any output, so it is left out to keep manifests comparable.
std::vector<std::string> recorded_args(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    kept.push_back(args[i]);
  }
  return kept;
}

struct Invocation {
  std::optional<json> pinned_config;
  std::optional<std::string> out_override;
};

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Invocation& inv);

int cmd_replay(const std::string& manifest_path, const std::string& out_dir, std::ostream& out,
               std::ostream& err) {
  const auto m = RunManifest::load(manifest_path);
  if (m.command == "replay") throw InputError("a replay manifest cannot be replayed again");
  for (const auto& in : m.inputs) {
    if (!fs::exists(in.path)) {
      err << "warning: input " << in.path << " no longer exists\n";
    } else if (sha256_file(in.path) != in.sha256) {
      err << "warning: input " << in.path << " changed since the recorded run\n";
    }
  }
  if (tool_version() != m.tool_version) {
    err << "warning: manifest was written by csrslab " << m.tool_version << ", this is " << tool_version() << '\n';
  }
  const int code = dispatch(m.args, out, err, Invocation{std::optional<json>(m.config), out_dir});
  if (code == kOk || code == kNotConverged) {
    const auto again = RunManifest::load(fs::path(out_dir) / "manifest.json");
    bool same = again.outputs.size() == m.outputs.size();
    for (std::size_t i = 0; same && i < m.outputs.size(); ++i) {
      same = again.outputs[i].path == m.outputs[i].path && again.outputs[i].sha256 == m.outputs[i].sha256;
    }
    out << (same ? "replay reproduced all outputs byte-identically\n" : "replay outputs differ from the manifest\n");
    if (!same) return kInputError;
  }
  return code;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Invocation& inv) {
  CLI::App app{"Gas-phase Raman frequency conversion: simulation and analysis", "csrslab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  Run run;
  run.log = &out;
  app.add_option("--config", run.globals.config_path, "JSON config file (falls back to $CSRSLAB_CONFIG)");
  app.add_option("--seed", run.globals.seed, "Override the RNG seed");
  app.add_option("--out", run.globals.out_dir, "Output directory")->capture_default_str();
  app.add_flag("--json-only", run.globals.json_only, "Emit only JSON artifacts and a JSON summary on stdout");

  // simulate-spectrum
  auto* spec_cmd = app.add_subcommand("simulate-spectrum", "Resonance scans for each pressure and channel");
  std::vector<double> pressures;
  int points = 0;
  double dwell = 0.0;
  bool no_noise = false;
  std::string process = "both";
  spec_cmd->add_option("--pressures", pressures, "Pressures in bar")->delimiter(',');
  spec_cmd->add_option("--points", points, "Detuning points per spectrum")->check(CLI::PositiveNumber);
  spec_cmd->add_option("--dwell", dwell, "Dwell time per detuning step, s")->check(CLI::PositiveNumber);
  spec_cmd->add_flag("--no-noise", no_noise, "Write expectation values instead of Poisson draws");
  spec_cmd->add_option("--process", process, "CARS, CSRS or both")->capture_default_str();

  // scan-efficiency
  auto* eff_cmd = app.add_subcommand("scan-efficiency", "On-resonance conversion efficiency versus pressure");
  std::optional<double> p_min, p_max, p_step;
  std::string kernel;
  eff_cmd->add_option("--p-min", p_min, "Lowest pressure, bar");
  eff_cmd->add_option("--p-max", p_max, "Highest pressure, bar");
  eff_cmd->add_option("--step", p_step, "Pressure step, bar");
  eff_cmd->add_option("--kernel", kernel, "Overlap kernel: mode-projected, single-gouy or plane-wave");
  eff_cmd->add_option("--process", process, "CARS, CSRS or both")->capture_default_str();

  // simulate-polarization
  auto* pol_cmd = app.add_subcommand("simulate-polarization", "Two-detector polarization scans");
  std::string basis = "both";
  std::string preset;
  std::optional<double> input_angle;
  pol_cmd->add_option("--basis", basis, "linear, circular or both")->capture_default_str();
  pol_cmd->add_option("--preset", preset, "Imperfection preset: ideal or paper-like");
  pol_cmd->add_option("--input-angle", input_angle, "Input linear polarization angle, deg");
  pol_cmd->add_flag("--no-noise", no_noise, "Write expectation values instead of Poisson draws");

  // analyze
  auto* ana_cmd = app.add_subcommand("analyze", "Fit CSV data and write a JSON report");
  std::string kind;
  std::vector<std::string> files;
  std::string ana_process;
  std::string ana_basis;
  ana_cmd->add_option("--kind", kind, "spectrum, pressure-series or polarization")
      ->required()
      ->check(CLI::IsMember({"spectrum", "pressure-series", "polarization"}));
  ana_cmd->add_option("inputs", files, "Input CSV files")->required();
  ana_cmd->add_option("--process", ana_process, "Channel of the spectra (default: from the path, else CSRS)");
  ana_cmd->add_option("--basis", ana_basis, "Basis of the polarization scans (default: from the file name)");

  // reproduce-paper
  auto* rep_cmd = app.add_subcommand("reproduce-paper", "Regenerate every dataset, fit and the summary table");

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  std::string manifest_path;
  replay_cmd->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kOk : kInputError;
  }

  if (inv.out_override) run.globals.out_dir = *inv.out_override;
  run.out = run.globals.out_dir;
  run.args = recorded_args(args);

  if (replay_cmd->parsed()) {
    if (inv.pinned_config) throw InputError("nested replay");
    return cmd_replay(manifest_path, run.globals.out_dir, out, err);
  }

  std::function<void(json&)> overrides;
  std::function<int()> body;
  if (spec_cmd->parsed()) {
    run.command = "simulate-spectrum";
    overrides = [&](json& d) {
      if (!pressures.empty()) d["spectrum"]["pressures_bar"] = pressures;
      if (points > 0) d["spectrum"]["points"] = points;
      if (dwell > 0.0) d["spectrum"]["dwell_s"] = dwell;
    };
    body = [&] { return cmd_simulate_spectrum(run, process, !no_noise); };
  } else if (eff_cmd->parsed()) {
    run.command = "scan-efficiency";
    overrides = [&](json& d) {
      if (p_min) d["efficiency_scan"]["p_min_bar"] = *p_min;
      if (p_max) d["efficiency_scan"]["p_max_bar"] = *p_max;
      if (p_step) d["efficiency_scan"]["step_bar"] = *p_step;
      if (!kernel.empty()) d["geometry"]["overlap_kernel"] = kernel;
    };
    body = [&] { return cmd_scan_efficiency(run, process); };
  } else if (pol_cmd->parsed()) {
    run.command = "simulate-polarization";
    overrides = [&](json& d) {
      if (!preset.empty()) {
        // a named preset replaces any individually configured imperfections
        auto& po = d["polarization"];
        for (const char* key : {"hwp_retardance_error_deg", "qwp_retardance_error_deg", "axis_error_deg",
                                "pbs_leakage", "background_d1", "background_d2"}) {
          po.erase(key);
        }
        po["preset"] = preset;
      }
      if (input_angle) d["polarization"]["input_angle_deg"] = *input_angle;
    };
    body = [&] { return cmd_simulate_polarization(run, basis, !no_noise); };
  } else if (ana_cmd->parsed()) {
    run.command = "analyze";
    body = [&] { return cmd_analyze(run, kind, files, ana_process, ana_basis); };
  } else if (rep_cmd->parsed()) {
    run.command = "reproduce-paper";
    body = [&] { return cmd_reproduce_paper(run); };
  }

  run.doc = resolve_document(run, inv.pinned_config, overrides);
  run.cfg.emplace(ExperimentConfig::from_document(run.doc));
  fs::create_directories(run.out);
  const int code = body();
  write_manifest(run);
  if (run.globals.json_only) {
    json s = run.summary;
    s["command"] = run.command;
    s["out_dir"] = run.out.generic_string();
    s["outputs"] = run.outputs;
    s["exit_code"] = code;
    out << s.dump(2) << '\n';
  }
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err, {});
  } catch (const ConfigError& e) {
    err << "config error at " << e.field() << ": " << e.what() << '\n';
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kInputError;
}

}  // namespace csrslab::cli
