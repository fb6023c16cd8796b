#include "csrslab/polarization.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "csrslab/errors.hpp"

namespace csrslab::pol {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
const std::complex<double> kI(0.0, 1.0);

Eigen::Matrix2cd rotation(double angle_deg) {
  const double c = std::cos(angle_deg * kDeg);
  const double s = std::sin(angle_deg * kDeg);
  Eigen::Matrix2cd r;
  r << c, s, -s, c;
  return r;
}

double wrap(double angle, double period) {
  double a = std::fmod(angle, period);
  if (a < 0.0) a += period;
  return a;
}

}  // namespace

JonesVector::JonesVector(std::complex<double> h, std::complex<double> v) : amp_(h, v) {
  if (amp_.squaredNorm() == 0.0 || !amp_.allFinite()) {
    throw InputError("Jones vector must be finite and non-zero");
  }
}

JonesVector::JonesVector(const Eigen::Vector2cd& amplitudes) : JonesVector(amplitudes(0), amplitudes(1)) {}

JonesVector JonesVector::diagonal() { return linear(45.0); }
JonesVector JonesVector::antidiagonal() { return linear(-45.0); }
JonesVector JonesVector::right_circular() { return {M_SQRT1_2, -kI * M_SQRT1_2}; }
JonesVector JonesVector::left_circular() { return {M_SQRT1_2, kI * M_SQRT1_2}; }
JonesVector JonesVector::linear(double angle_deg) {
  return {std::cos(angle_deg * kDeg), std::sin(angle_deg * kDeg)};
}

JonesVector JonesVector::normalized() const { return JonesVector(amp_ / amp_.norm()); }

bool JonesVector::same_state(const JonesVector& other, double tol) const {
  const double overlap = std::norm(amp_.dot(other.amp_));
  return std::abs(overlap - intensity() * other.intensity()) <= tol * intensity() * other.intensity();
}

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::HalfWave: return "hwp";
    case ElementKind::QuarterWave: return "qwp";
    case ElementKind::Retarder: return "retarder";
    case ElementKind::Polarizer: return "polarizer";
    case ElementKind::Rotator: return "rotator";
    case ElementKind::PbsPort: return "pbs";
  }
  return "?";
}

OpticalElement OpticalElement::half_wave(double angle_deg, double retardance_error_deg) {
  return {ElementKind::HalfWave, angle_deg, 180.0 + retardance_error_deg, 0.0, Port::H};
}

OpticalElement OpticalElement::quarter_wave(double angle_deg, double retardance_error_deg) {
  return {ElementKind::QuarterWave, angle_deg, 90.0 + retardance_error_deg, 0.0, Port::H};
}

OpticalElement OpticalElement::retarder(double retardance_deg, double angle_deg) {
  return {ElementKind::Retarder, angle_deg, retardance_deg, 0.0, Port::H};
}

OpticalElement OpticalElement::polarizer(double axis_deg) {
  return {ElementKind::Polarizer, axis_deg, 0.0, 0.0, Port::H};
}

OpticalElement OpticalElement::rotator(double angle_deg) {
  return {ElementKind::Rotator, angle_deg, 0.0, 0.0, Port::H};
}

OpticalElement OpticalElement::pbs_port(Port port, double leakage) {
  if (!(leakage >= 0.0 && leakage <= 0.5)) throw DomainError("PBS leakage must lie in [0, 0.5]");
  return {ElementKind::PbsPort, 0.0, 0.0, leakage, port};
}

Eigen::Matrix2cd OpticalElement::matrix() const {
  Eigen::Matrix2cd m;
  switch (kind) {
    case ElementKind::HalfWave:
    case ElementKind::QuarterWave:
    case ElementKind::Retarder: {
      Eigen::Matrix2cd d = Eigen::Matrix2cd::Zero();
      d(0, 0) = 1.0;
      d(1, 1) = std::exp(kI * (retardance_deg * kDeg));
      return rotation(-angle_deg) * d * rotation(angle_deg);
    }
    case ElementKind::Polarizer: {
      const double c = std::cos(angle_deg * kDeg);
      const double s = std::sin(angle_deg * kDeg);
      m << c * c, c * s, c * s, s * s;
      return m;
    }
    case ElementKind::Rotator:
      return rotation(-angle_deg);
    case ElementKind::PbsPort: {
      const double pass = std::sqrt(1.0 - leakage);
      const double leak = std::sqrt(leakage);
      m = Eigen::Matrix2cd::Zero();
      m(0, 0) = port == Port::H ? pass : leak;
      m(1, 1) = port == Port::H ? leak : pass;
      return m;
    }
  }
  return Eigen::Matrix2cd::Identity();
}

OpticalElement OpticalElement::from_json(const nlohmann::json& doc) {
  const auto kind = doc.at("kind").get<std::string>();
  const double angle = doc.value("angle_deg", 0.0);
  OpticalElement e;
  if (kind == "hwp") {
    e = half_wave(angle);
  } else if (kind == "qwp") {
    e = quarter_wave(angle);
  } else if (kind == "retarder") {
    e = retarder(doc.at("retardance_deg").get<double>(), angle);
  } else if (kind == "polarizer") {
    e = polarizer(angle);
  } else if (kind == "rotator") {
    e = rotator(angle);
  } else if (kind == "pbs") {
    const auto port = doc.value("port", std::string("H"));
    if (port != "H" && port != "V") throw InputError("pbs port must be H or V");
    e = pbs_port(port == "H" ? Port::H : Port::V, doc.value("extinction", 0.0));
  } else {
    throw InputError("unknown optical element kind '" + kind + "'");
  }
  if (doc.contains("retardance_deg")) e.retardance_deg = doc["retardance_deg"].get<double>();
  return e;
}

nlohmann::json OpticalElement::to_json() const {
  nlohmann::json doc{{"kind", std::string(to_string(kind))}, {"angle_deg", angle_deg}};
  switch (kind) {
    case ElementKind::HalfWave:
    case ElementKind::QuarterWave:
    case ElementKind::Retarder:
      doc["retardance_deg"] = retardance_deg;
      break;
    case ElementKind::PbsPort:
      doc["extinction"] = leakage;
      doc["port"] = port == Port::H ? "H" : "V";
      break;
    default:
      break;
  }
  return doc;
}

std::vector<OpticalElement> chain_from_json(const nlohmann::json& doc) {
  std::vector<OpticalElement> chain;
  for (const auto& e : doc) chain.push_back(OpticalElement::from_json(e));
  return chain;
}

JonesVector apply_chain(const JonesVector& input, std::span<const OpticalElement> chain) {
  Eigen::Vector2cd state = input.amplitudes();
  for (const auto& element : chain) state = element.matrix() * state;
  if (state.squaredNorm() == 0.0) {
    // fully extinguished; keep a representable vector with the right axis
    throw InputError("optics chain extinguishes the beam completely");
  }
  return JonesVector(state);
}

JonesVector convert_polarization(const JonesVector& input, const JonesVector& /*pump*/) {
  return input;
}

Stokes stokes(const JonesVector& state) {
  const auto h = state.h();
  const auto v = state.v();
  const auto cross = h * std::conj(v);
  return {std::norm(h) + std::norm(v), std::norm(h) - std::norm(v), 2.0 * cross.real(),
          2.0 * cross.imag()};
}

std::pair<double, double> port_probabilities(const JonesVector& state, double leakage) {
  const auto n = state.normalized();
  const double ph = std::norm(n.h());
  const double pv = std::norm(n.v());
  return {(1.0 - leakage) * ph + leakage * pv, leakage * ph + (1.0 - leakage) * pv};
}

double scan_period_deg(ElementKind scanned) {
  switch (scanned) {
    case ElementKind::HalfWave: return 90.0;
    case ElementKind::QuarterWave: return 180.0;
    case ElementKind::Polarizer: return 180.0;
    case ElementKind::Rotator: return 180.0;
    default: break;
  }
  throw InputError("element kind '" + std::string(to_string(scanned)) + "' has no fixed scan period");
}

double ScanSetup::period_deg() const {
  const auto& side = scanned_side == ScanSide::Signal ? signal_optics : analyzer_optics;
  if (scanned_index >= side.size()) throw InputError("scanned element index out of range");
  return scan_period_deg(side[scanned_index].kind);
}

PolarizationScan simulate_scan(const ScanSetup& setup, const ScanLevels& levels,
                               std::span<const double> angles_deg) {
  if (!(levels.amplitude >= 0.0 && levels.background_d1 >= 0.0 && levels.background_d2 >= 0.0)) {
    throw DomainError("scan amplitude and backgrounds must be non-negative");
  }
  PolarizationScan scan;
  scan.period_deg = setup.period_deg();
  auto signal = setup.signal_optics;
  auto analyzer = setup.analyzer_optics;
  auto& scanned = setup.scanned_side == ScanSide::Signal ? signal : analyzer;
  const double offset = scanned[setup.scanned_index].angle_deg;
  for (double angle : angles_deg) {
    if (!(angle >= 0.0 && angle < 360.0)) throw DomainError("scan angles must lie in [0, 360)");
    scanned[setup.scanned_index].angle_deg = angle + offset;
    const auto prepared = apply_chain(setup.input, signal);
    const auto converted = convert_polarization(prepared, setup.pump);
    const auto analyzed = apply_chain(converted, analyzer);
    // analysed intensity relative to the input keeps any polarizer loss
    const double through = analyzed.intensity() / setup.input.intensity();
    const auto [p1, p2] = port_probabilities(analyzed, setup.pbs_leakage);
    scan.points.push_back({angle, levels.amplitude * through * p1 + levels.background_d1,
                           levels.amplitude * through * p2 + levels.background_d2});
  }
  return scan;
}

double contrast(double amplitude, double offset) {
  if (!(amplitude >= 0.0)) throw DomainError("sine amplitude must be non-negative");
  if (amplitude == 0.0) return 0.0;
  if (offset < amplitude) throw DomainError("unphysical fit: offset below amplitude");
  return amplitude / offset;
}

double fidelity(std::span<const double> contrasts) {
  if (contrasts.size() != 4) {
    throw DomainError("fidelity needs exactly four contrasts, got " + std::to_string(contrasts.size()));
  }
  double sum = 0.0;
  for (double c : contrasts) {
    if (!(c >= 0.0 && c <= 1.0)) throw DomainError("contrast outside [0, 1]");
    sum += c;
  }
  return sum / 4.0;
}

std::string_view to_string(Basis basis) { return basis == Basis::Linear ? "linear" : "circular"; }

Basis parse_basis(std::string_view name) {
  if (name == "linear") return Basis::Linear;
  if (name == "circular") return Basis::Circular;
  throw InputError("unknown basis '" + std::string(name) + "' (expected linear or circular)");
}

Imperfections Imperfections::paper_like() {
  Imperfections p;
  p.hwp_retardance_error_deg = 1.0;
  p.qwp_retardance_error_deg = 1.5;
  p.axis_error_deg = 0.1;
  p.pbs_leakage = 0.002;
  p.background_d1 = 0.004;
  p.background_d2 = 0.106;
  return p;
}

Imperfections Imperfections::preset(std::string_view name) {
  if (name == "ideal") return ideal();
  if (name == "paper-like") return paper_like();
  throw InputError("unknown imperfection preset '" + std::string(name) + "'");
}

Imperfections Imperfections::from_json(const nlohmann::json& doc) {
  Imperfections p;
  if (doc.contains("preset")) p = preset(doc["preset"].get<std::string>());
  p.hwp_retardance_error_deg = doc.value("hwp_retardance_error_deg", p.hwp_retardance_error_deg);
  p.qwp_retardance_error_deg = doc.value("qwp_retardance_error_deg", p.qwp_retardance_error_deg);
  p.axis_error_deg = doc.value("axis_error_deg", p.axis_error_deg);
  p.pbs_leakage = doc.value("pbs_leakage", p.pbs_leakage);
  p.background_d1 = doc.value("background_d1", p.background_d1);
  p.background_d2 = doc.value("background_d2", p.background_d2);
  if (!(p.pbs_leakage >= 0.0 && p.pbs_leakage <= 0.5)) throw DomainError("pbs_leakage outside [0, 0.5]");
  if (!(p.background_d1 >= 0.0 && p.background_d2 >= 0.0)) throw DomainError("backgrounds must be >= 0");
  return p;
}

nlohmann::json Imperfections::to_json() const {
  return {{"hwp_retardance_error_deg", hwp_retardance_error_deg},
          {"qwp_retardance_error_deg", qwp_retardance_error_deg},
          {"axis_error_deg", axis_error_deg},
          {"pbs_leakage", pbs_leakage},
          {"background_d1", background_d1},
          {"background_d2", background_d2}};
}

ScanSetup basis_setup(Basis basis, const Imperfections& optics, double input_angle_deg) {
  ScanSetup setup;
  setup.input = JonesVector::linear(input_angle_deg);
  setup.pbs_leakage = optics.pbs_leakage;
  setup.scanned_side = ScanSide::Signal;
  setup.scanned_index = 0;
  if (basis == Basis::Linear) {
    setup.signal_optics = {OpticalElement::half_wave(optics.axis_error_deg, optics.hwp_retardance_error_deg)};
  } else {
    setup.signal_optics = {
        OpticalElement::quarter_wave(optics.axis_error_deg, optics.qwp_retardance_error_deg)};
    setup.analyzer_optics = {
        OpticalElement::quarter_wave(-optics.axis_error_deg, optics.qwp_retardance_error_deg),
        OpticalElement::half_wave(22.5 + optics.axis_error_deg, optics.hwp_retardance_error_deg)};
  }
  return setup;
}

double implied_input_angle(Basis basis, double peak_angle_deg) {
  if (basis == Basis::Linear) return wrap(2.0 * peak_angle_deg, 180.0);
  return wrap(peak_angle_deg - 45.0, 180.0);
}

}  // namespace csrslab::pol
