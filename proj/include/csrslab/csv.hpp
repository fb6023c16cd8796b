#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "csrslab/conversion.hpp"
#include "csrslab/detection.hpp"
#include "csrslab/experiment.hpp"
#include "csrslab/polarization.hpp"

namespace csrslab::csv {

/// Header plus rows of raw cells. Comma separated; double quotes allowed
/// around cells that contain commas. Blank lines are skipped.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  /// Column index by name, or npos.
  std::size_t column(std::string_view name) const;
  bool has(std::string_view name) const { return column(name) != npos; }
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Throws InputError naming `source` and the offending line.
Table parse(std::istream& in, const std::string& source = "<input>");
Table read_file(const std::filesystem::path& path);

/// Shortest round-trip decimal form.
std::string format_number(double x);

void write_spectrum(std::ostream& out, const experiment::Spectrum& spectrum);
experiment::Spectrum read_spectrum(const Table& table, const std::string& source);

/// Groups rows by their pressure_bar column, in order of first appearance.
std::vector<experiment::Spectrum> split_by_pressure(const experiment::Spectrum& all);

void write_efficiency(std::ostream& out, const fwm::EfficiencyScan& scan);
fwm::EfficiencyScan read_efficiency(const Table& table, const std::string& source);

void write_polarization(std::ostream& out, const pol::PolarizationScan& scan);
pol::PolarizationScan read_polarization(const Table& table, const std::string& source);

void write_count_records(std::ostream& out, const std::vector<detect::CountRecord>& records);
std::vector<detect::CountRecord> read_count_records(const Table& table, const std::string& source);

/// Writes `body(out)` to `path`, creating parent directories.
template <class Body>
void write_to(const std::filesystem::path& path, Body&& body);

}  // namespace csrslab::csv

#include <fstream>

#include "csrslab/errors.hpp"

template <class Body>
void csrslab::csv::write_to(const std::filesystem::path& path, Body&& body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  body(out);
  if (!out) throw InputError("write failed for " + path.string());
}
