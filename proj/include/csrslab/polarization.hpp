#pragma once

#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace csrslab::pol {

/// Polarization state in the H/V basis. Angles throughout are in degrees,
/// measured from horizontal, counter-clockwise looking against propagation.
/// Right-circular is (1, -i)/sqrt(2), i.e. S3 = 2 Im(E_H conj(E_V)) = +1.
class JonesVector {
 public:
  JonesVector(std::complex<double> h, std::complex<double> v);
  explicit JonesVector(const Eigen::Vector2cd& amplitudes);

  static JonesVector horizontal() { return {1.0, 0.0}; }
  static JonesVector vertical() { return {0.0, 1.0}; }
  static JonesVector diagonal();
  static JonesVector antidiagonal();
  static JonesVector right_circular();
  static JonesVector left_circular();
  static JonesVector linear(double angle_deg);

  const Eigen::Vector2cd& amplitudes() const noexcept { return amp_; }
  std::complex<double> h() const noexcept { return amp_(0); }
  std::complex<double> v() const noexcept { return amp_(1); }
  double intensity() const noexcept { return amp_.squaredNorm(); }
  JonesVector normalized() const;

  /// Same physical state up to global phase and normalization.
  bool same_state(const JonesVector& other, double tol = 1e-12) const;

 private:
  Eigen::Vector2cd amp_;
};

enum class ElementKind { HalfWave, QuarterWave, Retarder, Polarizer, Rotator, PbsPort };
enum class Port { H, V };

std::string_view to_string(ElementKind kind);

/// One element of the optics chain. Waveplates carry their actual retardance
/// so imperfect plates are the same kind with a perturbed value.
struct OpticalElement {
  ElementKind kind = ElementKind::HalfWave;
  double angle_deg = 0.0;
  double retardance_deg = 180.0;
  double leakage = 0.0;  // PBS port: fraction of the wrong polarization transmitted
  Port port = Port::H;

  static OpticalElement half_wave(double angle_deg, double retardance_error_deg = 0.0);
  static OpticalElement quarter_wave(double angle_deg, double retardance_error_deg = 0.0);
  static OpticalElement retarder(double retardance_deg, double angle_deg);
  static OpticalElement polarizer(double axis_deg);
  static OpticalElement rotator(double angle_deg);
  static OpticalElement pbs_port(Port port, double leakage = 0.0);

  Eigen::Matrix2cd matrix() const;
  bool is_unitary() const noexcept { return kind != ElementKind::Polarizer && kind != ElementKind::PbsPort; }

  /// {kind, angle_deg, retardance_deg?, extinction?, port?}
  static OpticalElement from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

std::vector<OpticalElement> chain_from_json(const nlohmann::json& doc);

/// Elements act in propagation order: the first element is applied first.
JonesVector apply_chain(const JonesVector& input, std::span<const OpticalElement> chain);

/// Isotropic Q-branch conversion: the output carries the input state. The
/// pump state only scales the amplitude, which is fixed to one here.
JonesVector convert_polarization(const JonesVector& input, const JonesVector& pump);

struct Stokes {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
};

Stokes stokes(const JonesVector& state);

/// Detection probabilities on the two PBS outputs for a normalized state.
std::pair<double, double> port_probabilities(const JonesVector& state, double leakage = 0.0);

struct ScanPoint {
  double angle_deg = 0.0;
  double counts_d1 = 0.0;
  double counts_d2 = 0.0;
};

struct PolarizationScan {
  std::string label;
  double period_deg = 90.0;
  std::vector<ScanPoint> points;
};

/// Fixed period of a count trace when the given plate is rotated.
double scan_period_deg(ElementKind scanned);

enum class ScanSide { Signal, Analyzer };

/// Signal preparation, conversion, analysis optics and a two-port PBS. One
/// element of either side is rotated; its angle is the scan angle plus the
/// element's own angle_deg (an axis offset).
struct ScanSetup {
  JonesVector input = JonesVector::horizontal();
  JonesVector pump = JonesVector::horizontal();
  std::vector<OpticalElement> signal_optics;
  std::vector<OpticalElement> analyzer_optics;
  ScanSide scanned_side = ScanSide::Signal;
  std::size_t scanned_index = 0;
  double pbs_leakage = 0.0;

  double period_deg() const;
};

struct ScanLevels {
  double amplitude = 1.0;
  double background_d1 = 0.0;
  double background_d2 = 0.0;
};

/// Deterministic expected counts: amplitude * port probability + background.
PolarizationScan simulate_scan(const ScanSetup& setup, const ScanLevels& levels,
                               std::span<const double> angles_deg);

/// (max - min) / (max + min) of a fitted sine, i.e. amplitude / offset.
double contrast(double amplitude, double offset);

/// Mean of exactly four basis-scan contrasts.
double fidelity(std::span<const double> contrasts);

enum class Basis { Linear, Circular };
std::string_view to_string(Basis basis);
Basis parse_basis(std::string_view name);

/// Deviations of the real optics from ideal. Backgrounds are given as a
/// fraction of the scan amplitude.
struct Imperfections {
  double hwp_retardance_error_deg = 0.0;
  double qwp_retardance_error_deg = 0.0;
  double axis_error_deg = 0.0;
  double pbs_leakage = 0.0;
  double background_d1 = 0.0;
  double background_d2 = 0.0;

  static Imperfections ideal() { return {}; }
  /// Tuned so the four basis contrasts average to about 0.904.
  static Imperfections paper_like();
  static Imperfections preset(std::string_view name);

  static Imperfections from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

/// Linear basis: a half-wave plate rotates the signal ahead of the cell, the
/// PBS analyses H/V. Circular basis: a quarter-wave plate on the signal, then
/// a quarter-wave plate at 0 deg and a half-wave plate at 22.5 deg map
/// R/L onto the PBS axes. `input_angle_deg` is the linear signal polarization
/// entering the scanned plate.
ScanSetup basis_setup(Basis basis, const Imperfections& optics, double input_angle_deg = 0.0);

/// Input polarization angle implied by a detector-1 intensity maximum at
/// `peak_angle_deg` for the given basis setup (ideal optics).
double implied_input_angle(Basis basis, double peak_angle_deg);

}  // namespace csrslab::pol
