#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csrslab/cli.hpp"
#include "csrslab/config.hpp"
#include "csrslab/csv.hpp"
#include "csrslab/detection.hpp"
#include "csrslab/experiment.hpp"
#include "csrslab/lineshape.hpp"
#include "csrslab/manifest.hpp"

using namespace csrslab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("csrslab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<fs::path> files_with(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("two pressures give two spectra per channel of the requested length") {
  const auto dir = scratch("shape");
  const auto r = invoke({"--out", dir.string(), "simulate-spectrum", "--pressures", "2,8.5", "--points", "100"});
  REQUIRE(r.code == cli::kOk);
  const auto csvs = files_with(dir, ".csv");
  CHECK(csvs.size() == 4);
  for (const char* kind : {"CARS", "CSRS"}) {
    for (const char* tag : {"p_2.csv", "p_8.5.csv"}) {
      const auto t = csv::read_file(dir / "spectra" / kind / tag);
      CHECK(t.rows.size() == 100);
    }
  }
  CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("noise-free spectra are the expected Lorentzian count levels") {
  const auto dir = scratch("exact");
  REQUIRE(invoke({"--out", dir.string(), "simulate-spectrum", "--pressures", "4", "--no-noise"}).code == cli::kOk);
  const auto cfg = ExperimentConfig::defaults();
  for (auto kind : {raman::ProcessKind::Cars, raman::ProcessKind::Csrs}) {
    const std::string name(raman::to_string(kind));
    const auto t = csv::read_file(dir / "spectra" / name / "p_4.csv");
    const auto s = csv::read_spectrum(t, name);
    const auto& ch = cfg.channel(kind);
    const double tau = detect::effective_dead_time_ns(ch.detector, cfg.module_dead_time_ns);
    const double gamma = raman::linewidth(ch.line, 4.0);
    const double center = raman::resonance_center(ch.line, 4.0);
    double ratio0 = 0.0;
    for (const auto& row : s.rows) {
      const double expect = experiment::expected_count_rate(cfg, kind, 4.0, row.pump_difference_thz) * row.duration_s;
      CHECK(row.counts == doctest::Approx(expect).epsilon(1e-14));
      // undo dead time and dark counts, then compare with the bare Lorentzian
      const double rate = detect::dead_time_correct(row.counts / row.duration_s, tau) - ch.detector.dark_rate;
      const double d = (row.pump_difference_thz - center) * 1e6;
      const double lorentz = 0.25 * gamma * gamma / (d * d + 0.25 * gamma * gamma);
      const double ratio = rate / lorentz;
      if (ratio0 == 0.0) ratio0 = ratio;
      CHECK(ratio == doctest::Approx(ratio0).epsilon(1e-9));
    }
  }
}

TEST_CASE("the same seed writes identical files and another seed does not") {
  const auto a = scratch("seed_a"), b = scratch("seed_b"), c = scratch("seed_c");
  REQUIRE(invoke({"--seed", "11", "--out", a.string(), "simulate-spectrum", "--pressures", "3"}).code == 0);
  REQUIRE(invoke({"--seed", "11", "--out", b.string(), "simulate-spectrum", "--pressures", "3"}).code == 0);
  REQUIRE(invoke({"--seed", "12", "--out", c.string(), "simulate-spectrum", "--pressures", "3"}).code == 0);
  const auto rel = fs::path("spectra") / "CSRS" / "p_3.csv";
  CHECK(slurp(a / rel) == slurp(b / rel));
  CHECK(slurp(a / rel) != slurp(c / rel));
}

TEST_CASE("analyzing simulated spectra recovers the configured line") {
  const auto dir = scratch("roundtrip");
  REQUIRE(invoke({"--out", (dir / "sim").string(), "simulate-spectrum"}).code == cli::kOk);
  const auto cfg = ExperimentConfig::defaults();
  for (const char* kind : {"CARS", "CSRS"}) {
    std::vector<std::string> args{"--out", (dir / kind).string(), "analyze", "--kind", "pressure-series"};
    for (const auto& f : files_with(dir / "sim" / "spectra" / kind, ".csv")) args.push_back(f.string());
    const auto r = invoke(args);
    REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
    std::ifstream in(dir / kind / "report.json");
    const auto report = json::parse(in);
    const auto& proc = report.at("processes").at(0);
    CHECK(proc.at("process") == kind);
    const auto& line = std::string(kind) == "CARS" ? cfg.cars.line : cfg.csrs.line;
    CHECK(std::abs(proc.at("shift_MHz_per_bar").at("value").get<double>() - line.shift_mhz_per_bar) <= 1.0);
    CHECK(std::abs(proc.at("nu0_THz").at("value").get<double>() - line.nu0_thz) * 1e6 <= 2.0);
    CHECK(std::abs(proc.at("broadening_MHz_per_bar").at("value").get<double>() - line.broadening_mhz_per_bar) <=
          0.5);
    CHECK(fs::exists(dir / kind / "fits" / (std::string(kind) + "_spectrum_fits.csv")));
  }
}

TEST_CASE("analyze --json-only writes no CSV files") {
  const auto dir = scratch("jsononly");
  REQUIRE(invoke({"--out", (dir / "sim").string(), "simulate-spectrum", "--pressures", "5"}).code == 0);
  const auto r = invoke({"--json-only", "--out", (dir / "fit").string(), "analyze", "--kind", "spectrum",
                         (dir / "sim" / "spectra" / "CSRS" / "p_5.csv").string()});
  REQUIRE(r.code == cli::kOk);
  CHECK(files_with(dir / "fit", ".csv").empty());
  CHECK(fs::exists(dir / "fit" / "report.json"));
  const auto summary = json::parse(r.out);
  CHECK(summary.at("exit_code") == 0);
}

TEST_CASE("malformed input exits with code 1") {
  const auto dir = scratch("bad");
  std::ofstream(dir / "empty.csv").close();
  auto r = invoke({"--out", (dir / "o").string(), "analyze", "--kind", "spectrum", (dir / "empty.csv").string()});
  CHECK(r.code == cli::kInputError);
  CHECK(r.err.find("empty.csv") != std::string::npos);

  std::ofstream(dir / "ragged.csv") << "pressure_bar,detuning_MHz,counts,duration_s\n1,0,5,1\n1,2\n";
  r = invoke({"--out", (dir / "o").string(), "analyze", "--kind", "spectrum", (dir / "ragged.csv").string()});
  CHECK(r.code == cli::kInputError);
  CHECK(r.err.find("ragged.csv:3") != std::string::npos);

  std::ofstream(dir / "cfg.json") << R"({"spectrum": {"points": 1}})";
  r = invoke({"--config", (dir / "cfg.json").string(), "--out", (dir / "o").string(), "simulate-spectrum"});
  CHECK(r.code == cli::kInputError);
  CHECK(r.err.find("spectrum.points") != std::string::npos);

  r = invoke({"--out", (dir / "o").string(), "simulate-spectrum", "--pressures", "-3"});
  CHECK(r.code == cli::kInputError);
  r = invoke({"no-such-command"});
  CHECK(r.code == cli::kInputError);
}

TEST_CASE("efficiency and polarization commands write their tables") {
  const auto dir = scratch("other");
  REQUIRE(invoke({"--out", dir.string(), "scan-efficiency", "--p-min", "1", "--p-max", "20", "--step", "1"}).code ==
          0);
  const auto eff = csv::read_efficiency(csv::read_file(dir / "efficiency" / "CSRS.csv"), "CSRS.csv");
  CHECK(eff.points.size() == 20);
  CHECK(*std::max_element(eff.normalized.begin(), eff.normalized.end()) == 1.0);

  REQUIRE(invoke({"--out", dir.string(), "simulate-polarization", "--basis", "both", "--preset", "ideal",
                  "--no-noise"})
              .code == 0);
  const auto lin = csv::read_polarization(csv::read_file(dir / "polarization" / "linear.csv"), "linear.csv");
  for (const auto& pt : lin.points) CHECK(pt.counts_d1 + pt.counts_d2 == doctest::Approx(lin.points[0].counts_d1 + lin.points[0].counts_d2));

  const auto r = invoke({"--out", (dir / "fit").string(), "analyze", "--kind", "polarization",
                         (dir / "polarization" / "linear.csv").string(),
                         (dir / "polarization" / "circular.csv").string()});
  REQUIRE(r.code == 0);
  std::ifstream in(dir / "fit" / "report.json");
  const auto report = json::parse(in);
  CHECK(report.at("polarization").at("contrasts").size() == 4);
  CHECK(report.at("polarization").at("fidelity").at("value").get<double>() == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("replaying a manifest reproduces the outputs byte for byte") {
  const auto dir = scratch("replay");
  REQUIRE(invoke({"--seed", "99", "--out", (dir / "first").string(), "simulate-spectrum", "--pressures", "2,6"})
              .code == 0);
  const auto r = invoke({"--out", (dir / "again").string(), "replay", (dir / "first" / "manifest.json").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto first = files_with(dir / "first", ".csv");
  REQUIRE(first.size() == 4);
  for (const auto& f : first) {
    const auto rel = fs::relative(f, dir / "first");
    CHECK(slurp(f) == slurp(dir / "again" / rel));
  }
  const auto m = RunManifest::load(dir / "first" / "manifest.json");
  CHECK(m.seed == 99u);
  CHECK(m.outputs.size() == 4);
  for (const auto& o : m.outputs) CHECK(o.sha256 == sha256_file(dir / "first" / o.path));
}

TEST_CASE("reproduce-paper writes the summary table") {
  const auto dir = scratch("paper");
  const auto r = invoke({"--out", dir.string(), "reproduce-paper"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto t = csv::read_file(dir / "summary.csv");
  const auto q = t.column("quantity"), p = t.column("process"), v = t.column("value"), pv = t.column("paper_value");
  bool cars_shift = false, fidelity = false;
  for (const auto& row : t.rows) {
    if (row[q] == "shift" && row[p] == "CARS") {
      cars_shift = true;
      CHECK(std::stod(row[pv]) == -94.0);
      CHECK(std::abs(std::stod(row[v]) + 94.0) <= 1.0);
    }
    if (row[q] == "fidelity") {
      fidelity = true;
      CHECK(std::stod(row[pv]) == 0.904);
    }
  }
  CHECK(cars_shift);
  CHECK(fidelity);
  CHECK(fs::exists(dir / "report.json"));
}
