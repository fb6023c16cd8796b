#include "csrslab/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

namespace csrslab::csv {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line, const std::string& where) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"' && trim(cell).empty()) {
      quoted = true;
      was_quoted = true;
      cell.clear();
    } else if (c == ',') {
      cells.push_back(was_quoted ? cell : trim(cell));
      cell.clear();
      was_quoted = false;
    } else {
      cell.push_back(c);
    }
  }
  if (quoted) throw InputError(where + ": unterminated quoted field");
  cells.push_back(was_quoted ? cell : trim(cell));
  return cells;
}

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

double number_cell(const Table& t, std::size_t row, std::size_t col, const std::string& source) {
  const std::string& s = t.rows[row][col];
  double value = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw InputError(where(source, t.line_numbers[row]) + ": column '" + t.header[col] +
                     "' is not a number: '" + s + "'");
  }
  return value;
}

std::size_t require(const Table& t, std::string_view name, const std::string& source) {
  const auto c = t.column(name);
  if (c == Table::npos) {
    throw InputError(source + ": missing required column '" + std::string(name) + "'");
  }
  return c;
}

void require_rows(const Table& t, const std::string& source) {
  if (t.rows.empty()) throw InputError(source + ": no data rows");
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? npos : static_cast<std::size_t>(it - header.begin());
}

Table parse(std::istream& in, const std::string& source) {
  Table table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split_line(line, where(source, line_no));
    if (!have_header) {
      table.header = std::move(cells);
      for (const auto& h : table.header) {
        if (h.empty()) throw InputError(where(source, line_no) + ": empty column name in header");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw InputError(where(source, line_no) + ": expected " + std::to_string(table.header.size()) +
                       " fields, found " + std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw InputError(source + ": empty file (a header row is required)");
  return table;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return parse(in, path.string());
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

void write_spectrum(std::ostream& out, const experiment::Spectrum& spectrum) {
  out << "pressure_bar,pump_difference_THz,detuning_MHz,counts,duration_s\n";
  for (const auto& r : spectrum.rows) {
    out << format_number(r.pressure_bar) << ',' << format_number(r.pump_difference_thz) << ','
        << format_number(r.detuning_mhz) << ',' << format_number(r.counts) << ','
        << format_number(r.duration_s) << '\n';
  }
}

experiment::Spectrum read_spectrum(const Table& t, const std::string& source) {
  require_rows(t, source);
  const auto cp = require(t, "pressure_bar", source);
  const auto cc = require(t, "counts", source);
  const auto cd = require(t, "duration_s", source);
  const auto ct = t.column("pump_difference_THz");
  const auto cm = t.column("detuning_MHz");
  if (ct == Table::npos && cm == Table::npos) {
    throw InputError(source + ": need a 'detuning_MHz' or 'pump_difference_THz' column");
  }
  experiment::Spectrum s;
  s.pressure_bar = number_cell(t, 0, cp, source);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    experiment::SpectrumRow r;
    r.pressure_bar = number_cell(t, i, cp, source);
    r.pump_difference_thz = ct != Table::npos ? number_cell(t, i, ct, source) : std::nan("");
    r.detuning_mhz = cm != Table::npos ? number_cell(t, i, cm, source) : std::nan("");
    r.counts = number_cell(t, i, cc, source);
    r.duration_s = number_cell(t, i, cd, source);
    if (!(r.pressure_bar > 0.0)) {
      throw InputError(where(source, t.line_numbers[i]) + ": pressure_bar must be positive");
    }
    if (!(r.counts >= 0.0)) {
      throw InputError(where(source, t.line_numbers[i]) + ": counts must be non-negative");
    }
    if (!(r.duration_s > 0.0)) {
      throw InputError(where(source, t.line_numbers[i]) + ": duration_s must be positive");
    }
    s.rows.push_back(r);
  }
  return s;
}

std::vector<experiment::Spectrum> split_by_pressure(const experiment::Spectrum& all) {
  std::vector<experiment::Spectrum> groups;
  for (const auto& r : all.rows) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.pressure_bar == r.pressure_bar; });
    if (it == groups.end()) {
      groups.push_back({all.kind, r.pressure_bar, {}});
      it = groups.end() - 1;
    }
    it->rows.push_back(r);
  }
  return groups;
}

void write_efficiency(std::ostream& out, const fwm::EfficiencyScan& scan) {
  out << "pressure_bar,eta_internal,eta_external,delta_k_rad_per_m,normalized\n";
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const auto& p = scan.points[i];
    out << format_number(p.pressure_bar) << ',' << format_number(p.internal) << ','
        << format_number(p.external) << ',' << format_number(scan.delta_k[i]) << ','
        << format_number(scan.normalized[i]) << '\n';
  }
}

fwm::EfficiencyScan read_efficiency(const Table& t, const std::string& source) {
  require_rows(t, source);
  const auto cp = require(t, "pressure_bar", source);
  const auto ci = require(t, "eta_internal", source);
  const auto ce = require(t, "eta_external", source);
  const auto ck = require(t, "delta_k_rad_per_m", source);
  const auto cn = require(t, "normalized", source);
  fwm::EfficiencyScan scan;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    scan.points.push_back({number_cell(t, i, cp, source), number_cell(t, i, ci, source),
                           number_cell(t, i, ce, source)});
    scan.delta_k.push_back(number_cell(t, i, ck, source));
    scan.normalized.push_back(number_cell(t, i, cn, source));
    if (scan.points[i].internal > scan.points[scan.peak_index].internal) scan.peak_index = i;
  }
  return scan;
}

void write_polarization(std::ostream& out, const pol::PolarizationScan& scan) {
  out << "angle_deg,counts_d1,counts_d2\n";
  for (const auto& p : scan.points) {
    out << format_number(p.angle_deg) << ',' << format_number(p.counts_d1) << ','
        << format_number(p.counts_d2) << '\n';
  }
}

pol::PolarizationScan read_polarization(const Table& t, const std::string& source) {
  require_rows(t, source);
  const auto ca = require(t, "angle_deg", source);
  const auto c1 = require(t, "counts_d1", source);
  const auto c2 = require(t, "counts_d2", source);
  pol::PolarizationScan scan;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    pol::ScanPoint p{number_cell(t, i, ca, source), number_cell(t, i, c1, source),
                     number_cell(t, i, c2, source)};
    if (p.counts_d1 < 0.0 || p.counts_d2 < 0.0) {
      throw InputError(where(source, t.line_numbers[i]) + ": counts must be non-negative");
    }
    scan.points.push_back(p);
  }
  return scan;
}

void write_count_records(std::ostream& out, const std::vector<detect::CountRecord>& records) {
  out << "duration_s,counts,detector_name\n";
  for (const auto& r : records) {
    out << format_number(r.duration_s) << ',' << r.counts << ',' << r.detector_name << '\n';
  }
}

std::vector<detect::CountRecord> read_count_records(const Table& t, const std::string& source) {
  require_rows(t, source);
  const auto cd = require(t, "duration_s", source);
  const auto cc = require(t, "counts", source);
  const auto cn = require(t, "detector_name", source);
  std::vector<detect::CountRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double d = number_cell(t, i, cd, source);
    const std::string& s = t.rows[i][cc];
    std::uint64_t counts = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), counts);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw InputError(where(source, t.line_numbers[i]) + ": counts must be a non-negative integer");
    }
    if (!(d > 0.0)) throw InputError(where(source, t.line_numbers[i]) + ": duration_s must be positive");
    out.push_back({d, counts, t.rows[i][cn]});
  }
  return out;
}

}  // namespace csrslab::csv
