#pragma once

#include <span>
#include <utility>

#include "csrslab/least_squares.hpp"
#include "csrslab/polarization.hpp"

namespace csrslab::fit {

/// offset + amplitude * (w/2)^2 / ((x - center)^2 + (w/2)^2)
double lorentzian(double x, double center, double fwhm, double amplitude, double offset);

/// Parameters {center, fwhm, amplitude, offset} in the units of x and y.
/// Start: center at the first maximum, offset = min y, amplitude = max - min,
/// FWHM from the half-height crossings. Throws InputError for fewer than five
/// points or data without an interior peak.
FitResult fit_lorentzian(std::span<const WeightedPoint> points);

/// Weighted straight line through resonance centers. x in bar, y in THz.
/// Parameters {slope_MHz_per_bar, intercept_THz}. All x equal gives a
/// singular status.
FitResult fit_center_vs_pressure(std::span<const WeightedPoint> centers);

/// Gamma(p) = A/p + B p with x in bar, y in MHz. Parameters
/// {A_MHz_bar, B_MHz_per_bar}. A warning is attached when A is constrained
/// worse than 50 %.
FitResult fit_dicke_width(std::span<const WeightedPoint> widths);

/// offset + amplitude * sin(2 pi (theta - phase) / period), theta in degrees.
/// Parameters {amplitude, phase_deg, offset}; amplitude >= 0 and phase in
/// [0, period). The period is fixed by the scanned optic.
FitResult fit_sine(std::span<const WeightedPoint> points, double period_deg);

/// Sine fits for both detectors of a scan, sigma = sqrt(counts).
std::pair<FitResult, FitResult> fit_sine(const pol::PolarizationScan& scan);

/// Angle of the fitted maximum in [0, period).
double sine_peak_angle(const FitResult& sine, double period_deg);

/// Contrast amplitude/offset of a sine fit with its propagated 1 sigma.
std::pair<double, double> sine_contrast(const FitResult& sine);

}  // namespace csrslab::fit
