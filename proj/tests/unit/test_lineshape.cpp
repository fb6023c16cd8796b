#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "csrslab/errors.hpp"
#include "csrslab/lineshape.hpp"

using namespace csrslab;
using namespace csrslab::raman;

TEST_CASE("default lines per channel") {
  const auto cars = RamanLine::defaults(ProcessKind::Cars);
  const auto csrs = RamanLine::defaults(ProcessKind::Csrs);
  CHECK(cars.nu0_thz == 124.571257);
  CHECK(cars.shift_mhz_per_bar == -94.0);
  CHECK(cars.broadening_mhz_per_bar == 42.7);
  CHECK(csrs.nu0_thz == 124.571304);
  CHECK(csrs.shift_mhz_per_bar == -93.0);
  CHECK(csrs.broadening_mhz_per_bar == 46.9);
  CHECK(cars.dicke_mhz_bar >= 0.0);
  CHECK(to_string(ProcessKind::Cars) == "CARS");
  CHECK(parse_process_kind("csrs") == ProcessKind::Csrs);
  CHECK_THROWS_AS(parse_process_kind("SRS"), InputError);
}

TEST_CASE("resonance center examples") {
  const auto cars = RamanLine::defaults(ProcessKind::Cars);
  const auto csrs = RamanLine::defaults(ProcessKind::Csrs);
  CHECK(resonance_center(csrs, 0.0) == 124.571304);
  CHECK(resonance_center(cars, 0.0) == 124.571257);
  CHECK(resonance_center(csrs, 10.0) == doctest::Approx(124.571304 - 93e-6 * 10.0).epsilon(1e-15));
  CHECK(resonance_center(csrs, 10.0) == doctest::Approx(124.570374).epsilon(1e-12));
  CHECK_THROWS_AS(resonance_center(csrs, 61.0), DomainError);
}

TEST_CASE("resonance center is affine in pressure") {
  const auto line = RamanLine::defaults(ProcessKind::Csrs);
  for (double p = 1.0; p <= 58.0; p += 2.5) {
    // second difference, in MHz so the THz offset does not swamp it
    const double a = (resonance_center(line, p) - line.nu0_thz) * 1e6;
    const double b = (resonance_center(line, p + 1.0) - line.nu0_thz) * 1e6;
    const double c = (resonance_center(line, p + 2.0) - line.nu0_thz) * 1e6;
    CHECK(std::abs(a - 2.0 * b + c) < 1e-6);
  }
}

TEST_CASE("linewidth examples") {
  auto cars = RamanLine::defaults(ProcessKind::Cars);
  cars.dicke_mhz_bar = 0.0;
  CHECK(linewidth(cars, 2.0) == doctest::Approx(85.4).epsilon(1e-12));

  RamanLine l{124.57, -94.0, 170.8, 42.7};
  CHECK(narrowest_pressure(l) == doctest::Approx(2.0).epsilon(1e-12));
  for (double p : {1.0, 1.5, 1.9, 2.1, 3.0, 10.0}) CHECK(linewidth(l, p) > linewidth(l, 2.0));

  CHECK_THROWS_AS(linewidth(l, 0.0), DomainError);
  CHECK_THROWS_AS(linewidth(l, -1.0), DomainError);
}

TEST_CASE("linewidth slope approaches the broadening coefficient") {
  const RamanLine l = RamanLine::defaults(ProcessKind::Cars);
  const double p_star = std::sqrt(l.dicke_mhz_bar / l.broadening_mhz_per_bar);
  for (double p = 10.5 * p_star; p < 59.0; p += 3.0) {
    const double h = 1e-3;
    const double slope = (linewidth(l, p + h) - linewidth(l, p - h)) / (2.0 * h);
    CHECK(slope == doctest::Approx(l.broadening_mhz_per_bar - l.dicke_mhz_bar / (p * p)).epsilon(1e-6));
    CHECK(std::abs(slope / l.broadening_mhz_per_bar - 1.0) < 0.01);
  }
}

TEST_CASE("linewidth stays positive for every valid line") {
  for (double a : {0.0, 50.0, 309.0, 1000.0}) {
    for (double b : {1.0, 42.7, 100.0}) {
      RamanLine l{124.57, -90.0, a, b};
      for (double p = 0.01; p <= 60.0; p *= 1.7) CHECK(linewidth(l, p) > 0.0);
    }
  }
  RamanLine bad{124.57, -90.0, 10.0, 0.0};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("raman response is a complex Lorentzian") {
  const auto line = RamanLine::defaults(ProcessKind::Csrs);
  const double p = 4.0;
  const double g = linewidth(line, p);
  const auto peak = raman_response(line, p, 0.0);
  CHECK(std::abs(peak.real()) < 1e-15 * std::abs(peak));
  CHECK(peak.imag() != 0.0);

  const double n = gas::number_density(p, gas::kDefaultTemperatureK) / kResponseDensityUnit;
  CHECK(std::norm(peak) == doctest::Approx(std::pow(2.0 * n / g, 2)).epsilon(1e-12));

  CHECK(std::norm(raman_response(line, p, g / 2)) == doctest::Approx(0.5 * std::norm(peak)).epsilon(1e-12));
  CHECK(std::norm(raman_response(line, p, -g / 2)) == doctest::Approx(0.5 * std::norm(peak)).epsilon(1e-12));
  for (double d : {-1000.0, -50.0, 30.0, 400.0}) CHECK(std::norm(raman_response(line, p, d)) < std::norm(peak));
}

TEST_CASE("response symmetry: |chi|^2 even, arg chi(-d) = pi - arg chi(d)") {
  const auto line = RamanLine::defaults(ProcessKind::Cars);
  for (double p : {0.5, 3.0, 12.0}) {
    for (double d : {1.0, 17.0, 250.0, 3000.0}) {
      const auto plus = raman_response(line, p, d);
      const auto minus = raman_response(line, p, -d);
      CHECK(std::norm(plus) == doctest::Approx(std::norm(minus)).epsilon(1e-14));
      double diff = std::arg(minus) - (std::numbers::pi - std::arg(plus));
      diff = std::remainder(diff, 2.0 * std::numbers::pi);
      CHECK(std::abs(diff) < 1e-12);
    }
  }
}

TEST_CASE("numerical FWHM of |chi|^2 equals the model linewidth") {
  const auto line = RamanLine::defaults(ProcessKind::Csrs);
  for (double p : {0.8, 2.5, 8.0, 20.0}) {
    const double g = linewidth(line, p);
    const double half = 0.5 * std::norm(raman_response(line, p, 0.0));
    auto f = [&](double d) { return std::norm(raman_response(line, p, d)) - half; };
    boost::math::tools::eps_tolerance<double> tol(40);
    std::uintmax_t iters = 200;
    const auto [lo, hi] = boost::math::tools::toms748_solve(f, 1e-6, 50.0 * g, tol, iters);
    const double fwhm = 2.0 * 0.5 * (lo + hi);
    CHECK(std::abs(fwhm / g - 1.0) < 1e-3);
  }
}

TEST_CASE("integrated |chi|^2 scales as density^2 / linewidth") {
  // with Gamma(p) = Gamma(2p) the peak grows exactly fourfold on doubling p
  const RamanLine line{124.57, -93.0, 300.0, 40.0};
  const double p = std::sqrt(line.dicke_mhz_bar / (2.0 * line.broadening_mhz_per_bar));
  CHECK(linewidth(line, p) == doctest::Approx(linewidth(line, 2.0 * p)).epsilon(1e-12));
  CHECK(std::norm(raman_response(line, 2.0 * p, 0.0)) ==
        doctest::Approx(4.0 * std::norm(raman_response(line, p, 0.0))).epsilon(1e-12));

  // midpoint sum on a wide grid against 2 pi N^2 / Gamma
  for (double pp : {1.0, 5.0, 15.0}) {
    const double g = linewidth(line, pp);
    const double span = 2000.0 * g;
    const int steps = 400000;
    const double h = 2.0 * span / steps;
    double area = 0.0;
    for (int i = 0; i < steps; ++i) area += std::norm(raman_response(line, pp, -span + (i + 0.5) * h)) * h;
    const double n = gas::number_density(pp, gas::kDefaultTemperatureK) / kResponseDensityUnit;
    CHECK(area == doctest::Approx(2.0 * std::numbers::pi * n * n / g).epsilon(1e-3));
  }
}

TEST_CASE("line parameters round-trip through JSON keys") {
  const auto line = RamanLine::defaults(ProcessKind::Cars);
  const auto doc = line.to_json();
  CHECK(doc.contains("nu0_THz"));
  CHECK(doc.contains("shift_MHz_per_bar"));
  CHECK(doc.contains("A_MHz_bar"));
  CHECK(doc.contains("B_MHz_per_bar"));
  const auto back = RamanLine::from_json(doc);
  CHECK(back.nu0_thz == line.nu0_thz);
  CHECK(back.dicke_mhz_bar == line.dicke_mhz_bar);
}
