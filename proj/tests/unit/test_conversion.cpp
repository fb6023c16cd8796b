#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "csrslab/errors.hpp"
#include "csrslab/conversion.hpp"

using namespace csrslab;
using namespace csrslab::fwm;

namespace {

constexpr double kC = 299792458.0;

double peck_hung_stp(double lambda_nm) {
  const double s2 = std::pow(1000.0 / lambda_nm, 2);
  return 0.0148956 / (180.7 - s2) + 0.0049037 / (92.0 - s2);
}

// Independent phase-mismatch oracle: sum of +-2 pi (n - 1) nu / c over the
// four fields, with the converted frequency from energy conservation.
double oracle_delta_k(ProcessKind kind, double p_bar, double t_k) {
  const double scale = (p_bar * 1e5 / (1.380649e-23 * t_k)) / (101325.0 / (1.380649e-23 * 273.15));
  const double nu_s = kC / 863e-9, nu_hi = kC / 938e-9, nu_lo = kC / 1538e-9;
  const double nu_c = kind == ProcessKind::Cars ? nu_s + nu_hi - nu_lo : nu_s - nu_hi + nu_lo;
  auto excess = [&](double nu) { return 2.0 * std::numbers::pi * nu / kC * scale * peck_hung_stp(kC / nu * 1e9); };
  if (kind == ProcessKind::Cars) return excess(nu_s) + excess(nu_hi) - excess(nu_lo) - excess(nu_c);
  return excess(nu_s) + excess(nu_lo) - excess(nu_hi) - excess(nu_c);
}

struct Channel {
  ProcessConfig config;
  raman::RamanLine line;
  gas::DispersionModel model = gas::DispersionModel::hydrogen();
};

Channel calibrated(ProcessKind kind, double p, double eta) {
  Channel c{ProcessConfig::defaults(kind), raman::RamanLine::defaults(kind)};
  c.config.scale = calibrate_scale(c.config, c.line, c.model, {p, eta, 0.0});
  return c;
}

}  // namespace

TEST_CASE("converted wavelengths from energy conservation") {
  const auto csrs = ProcessConfig::defaults(ProcessKind::Csrs);
  const auto cars = ProcessConfig::defaults(ProcessKind::Cars);
  CHECK(std::abs(converted_wavelength_nm(csrs) - 1346.0) < 1.0);
  CHECK(std::abs(converted_wavelength_nm(cars) - 635.0) < 1.0);

  const double pump_difference = frequency_thz(938.0) - frequency_thz(1538.0);
  CHECK(pump_difference == doctest::Approx(kC / 938e-9 * 1e-12 - kC / 1538e-9 * 1e-12).epsilon(1e-14));
  CHECK(std::abs(pump_difference - 124.7) < 0.05);
  // lies next to the Q1(1) resonance the pumps are tuned across
  CHECK(std::abs(pump_difference - 124.571) < 0.2);

  CHECK(converted_frequency(cars) - frequency_thz(863.0) == doctest::Approx(pump_difference).epsilon(1e-12));
  CHECK(frequency_thz(863.0) - converted_frequency(csrs) == doctest::Approx(pump_difference).epsilon(1e-12));
}

TEST_CASE("converted wavelength outside the dispersion band is rejected") {
  auto cfg = ProcessConfig::defaults(ProcessKind::Cars);
  cfg.signal_nm = 520.0;  // converted light near 410 nm
  CHECK_THROWS_AS(cfg.validate(gas::DispersionModel::hydrogen()), DomainError);
  cfg = ProcessConfig::defaults(ProcessKind::Csrs);
  cfg.waist_um = 0.0;
  CHECK_THROWS_AS(cfg.validate(gas::DispersionModel::hydrogen()), DomainError);
}

TEST_CASE("phase mismatch vanishes in vacuum and is linear in pressure") {
  const auto model = gas::DispersionModel::hydrogen();
  for (auto kind : {ProcessKind::Cars, ProcessKind::Csrs}) {
    const auto cfg = ProcessConfig::defaults(kind);
    CHECK(phase_mismatch(cfg, gas::GasState::vacuum(), model) == 0.0);
    for (double p : {0.5, 1.0, 4.0, 8.0, 15.0, 30.0}) {
      const double a = phase_mismatch(cfg, gas::GasState(p), model);
      const double b = phase_mismatch(cfg, gas::GasState(2.0 * p), model);
      CHECK(std::abs(b / (2.0 * a) - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("phase mismatch matches the oracle") {
  const auto model = gas::DispersionModel::hydrogen();
  for (auto kind : {ProcessKind::Cars, ProcessKind::Csrs}) {
    const auto cfg = ProcessConfig::defaults(kind);
    for (double p : {1.0, 8.0, 20.0}) {
      CHECK(phase_mismatch(cfg, gas::GasState(p), model) ==
            doctest::Approx(oracle_delta_k(kind, p, 296.0)).epsilon(1e-8));
    }
  }
  // regression value for the CARS configuration at 8 bar
  const double dk8 = phase_mismatch(ProcessConfig::defaults(ProcessKind::Cars), gas::GasState(8.0), model);
  CHECK(dk8 == doctest::Approx(oracle_delta_k(ProcessKind::Cars, 8.0, 296.0)).epsilon(1e-8));
  CHECK(dk8 < 0.0);
}

TEST_CASE("overlap integral at zero mismatch and in the plane-wave limit") {
  const double L = 0.14;
  for (auto kernel : {OverlapKernel::ModeProjected, OverlapKernel::SingleGouy}) {
    CHECK(std::abs(gaussian_overlap(0.0, 1e4 * L, L, kernel)) == doctest::Approx(L).epsilon(1e-3));
    // b atan(L / b) is the closed form of both kernels at dk = 0
    for (double b : {0.01, 0.04, 0.5}) {
      CHECK(gaussian_overlap(0.0, b, L, kernel).real() == doctest::Approx(b * std::atan(L / b)).epsilon(1e-9));
    }
  }
  CHECK(std::abs(gaussian_overlap(10.0, 0.04, L, OverlapKernel::PlaneWave)) ==
        doctest::Approx(std::abs(plane_wave_overlap(10.0, L))).epsilon(1e-9));
  CHECK(plane_wave_overlap(0.0, L) == L);
}

TEST_CASE("overlap magnitude matches L |sinc| for b >= 1e3 L") {
  const double L = 0.14;
  for (auto kernel : {OverlapKernel::ModeProjected, OverlapKernel::SingleGouy}) {
    for (double b : {1e3 * L, 1e4 * L}) {
      // a grid within the central lobe and the first side lobes, away from nodes
      for (double x = -7.5; x <= 7.5; x += 0.5) {
        if (std::abs(std::sin(x)) < 0.2 && x != 0.0) continue;
        const double dk = 2.0 * x / L;
        const double pw = std::abs(plane_wave_overlap(dk, L));
        CHECK(std::abs(std::abs(gaussian_overlap(dk, b, L, kernel)) / pw - 1.0) < 0.01);
      }
    }
  }
}

TEST_CASE("overlap symmetry about the focus") {
  const double L = 0.14, b = 0.04;
  for (double dk : {0.3, 5.0, 37.0, 120.0}) {
    // even real kernel: J is real and even in dk
    const auto plus = gaussian_overlap(dk, b, L, OverlapKernel::ModeProjected);
    const auto minus = gaussian_overlap(-dk, b, L, OverlapKernel::ModeProjected);
    CHECK(plus.real() == doctest::Approx(minus.real()).epsilon(1e-9));
    CHECK(std::abs(plus.imag()) < 1e-9 * L);

    // K(-z) = conj K(z): J is real, but the Gouy phase breaks dk -> -dk symmetry
    const auto g = gaussian_overlap(dk, b, L, OverlapKernel::SingleGouy);
    CHECK(std::abs(g.imag()) < 1e-9 * L);
    const double oracle = 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double z) {
          const double u = 2.0 * z / b;
          return (std::cos(dk * z) + u * std::sin(dk * z)) / (1.0 + u * u);
        },
        0.0, L / 2, 20, 1e-13);
    CHECK(g.real() == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("overlap rejects invalid geometry") {
  CHECK_THROWS_AS(gaussian_overlap(1.0, 0.0, 0.14), DomainError);
  CHECK_THROWS_AS(gaussian_overlap(1.0, 0.1, -0.14), DomainError);
  CHECK_THROWS_AS(gaussian_overlap(NAN, 0.1, 0.14), DomainError);
}

TEST_CASE("calibration pins the anchor exactly") {
  const auto c = calibrated(ProcessKind::Cars, 8.0, 8.1e-10);
  const double eta = internal_efficiency(c.config, gas::GasState(8.0), c.model, c.line);
  CHECK(eta == doctest::Approx(8.1e-10).epsilon(1e-12));

  const auto s = calibrated(ProcessKind::Csrs, 10.0, 1.1e-9);
  CHECK(internal_efficiency(s.config, gas::GasState(10.0), s.model, s.line) == doctest::Approx(1.1e-9).epsilon(1e-12));
}

TEST_CASE("efficiency is bilinear in the pump powers and blind to the signal power") {
  auto c = calibrated(ProcessKind::Cars, 8.0, 8.1e-10);
  const gas::GasState st(6.0);
  const double base = internal_efficiency(c.config, st, c.model, c.line);

  auto doubled_lo = c.config;
  doubled_lo.pump_lo_w *= 2.0;
  CHECK(internal_efficiency(doubled_lo, st, c.model, c.line) == doctest::Approx(2.0 * base).epsilon(1e-12));

  auto tripled_hi = c.config;
  tripled_hi.pump_hi_w *= 3.0;
  CHECK(internal_efficiency(tripled_hi, st, c.model, c.line) == doctest::Approx(3.0 * base).epsilon(1e-12));

  auto brighter_signal = c.config;
  brighter_signal.signal_w *= 100.0;
  CHECK(internal_efficiency(brighter_signal, st, c.model, c.line) == base);

  auto no_pump = c.config;
  no_pump.pump_hi_w = 0.0;
  CHECK(internal_efficiency(no_pump, st, c.model, c.line) == 0.0);
  no_pump = c.config;
  no_pump.pump_lo_w = 0.0;
  CHECK(internal_efficiency(no_pump, st, c.model, c.line) == 0.0);
}

TEST_CASE("recalibration absorbs a geometry change") {
  auto c = calibrated(ProcessKind::Cars, 8.0, 8.1e-10);
  c.config.waist_um = 40.0;
  c.config.scale = calibrate_scale(c.config, c.line, c.model, {8.0, 8.1e-10, 0.0});
  CHECK(internal_efficiency(c.config, gas::GasState(8.0), c.model, c.line) == doctest::Approx(8.1e-10).epsilon(1e-12));
}

TEST_CASE("calibration errors") {
  Channel c{ProcessConfig::defaults(ProcessKind::Cars), raman::RamanLine::defaults(ProcessKind::Cars)};
  CHECK_THROWS_AS(calibrate_scale(c.config, c.line, c.model, {8.0, 0.0, 0.0}), CalibrationError);
  CHECK_THROWS_AS(calibrate_scale(c.config, c.line, c.model, {0.0, 1e-9, 0.0}), CalibrationError);
  c.config.pump_lo_w = 0.0;
  CHECK_THROWS_AS(calibrate_scale(c.config, c.line, c.model, {8.0, 1e-9, 0.0}), CalibrationError);
}

TEST_CASE("plane-wave kernel changes the efficiency by under 1% when b >= 1e3 L") {
  auto c = calibrated(ProcessKind::Cars, 8.0, 8.1e-10);
  c.config.waist_um = 12000.0;  // b of a few hundred metres
  REQUIRE(c.config.confocal_parameter_m() >= 1e3 * c.config.cell_length_m());
  auto flat = c.config;
  flat.kernel = OverlapKernel::PlaneWave;
  for (double p : {0.5, 1.0, 2.0, 4.0, 6.0}) {
    const double focused = efficiency_response(c.config, gas::GasState(p), c.model, c.line, 0.0);
    const double plane = efficiency_response(flat, gas::GasState(p), c.model, c.line, 0.0);
    CHECK(std::abs(plane / focused - 1.0) < 0.01);
  }
}

TEST_CASE("external efficiency applies the transmission chain") {
  const double optics = 1.5e-11 / (8.1e-10 * 0.045);
  CHECK(optics == doctest::Approx(0.412).epsilon(1e-3));
  const std::vector<double> chain{0.412, 0.045};
  CHECK(external_efficiency(8.1e-10, chain) == doctest::Approx(1.5e-11).epsilon(0.02));
  CHECK(external_efficiency(8.1e-10, {}) == 8.1e-10);
  const std::vector<double> with_filter{0.93, 0.5};
  CHECK(external_efficiency(1e-9, with_filter) == doctest::Approx(1e-9 * 0.93 * 0.5).epsilon(1e-15));
  const std::vector<double> bad{1.2};
  CHECK_THROWS_AS(external_efficiency(1e-9, bad), DomainError);
  const std::vector<double> negative{-0.1};
  CHECK_THROWS_AS(external_efficiency(1e-9, negative), DomainError);
}

TEST_CASE("CSRS on-resonance efficiency stays flat between 5 and 20 bar") {
  const auto c = calibrated(ProcessKind::Csrs, 10.0, 1.1e-9);
  double lo = INFINITY, hi = 0.0;
  for (double p = 5.0; p <= 20.0; p += 0.25) {
    const double eta = internal_efficiency(c.config, gas::GasState(p), c.model, c.line);
    lo = std::min(lo, eta);
    hi = std::max(hi, eta);
  }
  CHECK(hi / lo < 3.0);
}

TEST_CASE("efficiency scan: grid order, normalisation and bounds") {
  const auto c = calibrated(ProcessKind::Cars, 8.0, 8.1e-10);
  const std::vector<double> grid{12.0, 0.5, 3.0, 8.0, 25.0, 1.0};
  const std::vector<double> chain{0.93, 0.44, 0.045};
  const auto scan = efficiency_scan(c.config, c.line, c.model, grid, chain);
  REQUIRE(scan.points.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(scan.points[i].pressure_bar == grid[i]);
    CHECK(scan.points[i].external >= 0.0);
    CHECK(scan.points[i].external <= scan.points[i].internal);
    CHECK(scan.points[i].internal <= 1.0);
    CHECK(scan.normalized[i] <= 1.0);
    CHECK(scan.delta_k[i] == phase_mismatch(c.config, gas::GasState(grid[i]), c.model));
  }
  CHECK(scan.normalized[scan.peak_index] == 1.0);
  CHECK(std::count(scan.normalized.begin(), scan.normalized.end(), 1.0) == 1);

  const std::vector<double> one{4.0};
  const auto single = efficiency_scan(c.config, c.line, c.model, one);
  CHECK(single.normalized.front() == 1.0);
  CHECK(single.points.front().external == single.points.front().internal);

  CHECK_THROWS_AS(efficiency_scan(c.config, c.line, c.model, std::vector<double>{}), InputError);
  CHECK_THROWS_AS(efficiency_scan(c.config, c.line, c.model, std::vector<double>{0.0}), DomainError);
}

TEST_CASE("internal efficiency is clamped to one") {
  auto c = calibrated(ProcessKind::Cars, 8.0, 8.1e-10);
  c.config.scale *= 1e12;
  CHECK(internal_efficiency(c.config, gas::GasState(8.0), c.model, c.line) == 1.0);
}
