#include "csrslab/fits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "csrslab/errors.hpp"

namespace csrslab::fit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap(double angle, double period) {
  double a = std::fmod(angle, period);
  if (a < 0.0) a += period;
  if (a >= period) a -= period;
  return a;
}

std::vector<WeightedPoint> sorted_by_x(std::span<const WeightedPoint> points) {
  std::vector<WeightedPoint> sorted(points.begin(), points.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const WeightedPoint& a, const WeightedPoint& b) { return a.x < b.x; });
  return sorted;
}

// x where the segment (a, b) crosses level
double crossing(const WeightedPoint& a, const WeightedPoint& b, double level) {
  if (b.y == a.y) return 0.5 * (a.x + b.x);
  return a.x + (level - a.y) * (b.x - a.x) / (b.y - a.y);
}

Model lorentzian_model() {
  Model m;
  m.names = {"center", "fwhm", "amplitude", "offset"};
  m.value = [](double x, const Eigen::VectorXd& p) { return lorentzian(x, p(0), p(1), p(2), p(3)); };
  m.gradient = [](double x, const Eigen::VectorXd& p, Eigen::Ref<Eigen::VectorXd> g) {
    const double h = 0.5 * p(1);
    const double d = x - p(0);
    const double den = d * d + h * h;
    const double den2 = den * den;
    g(0) = p(2) * h * h * 2.0 * d / den2;
    g(1) = p(2) * h * d * d / den2;
    g(2) = h * h / den;
    g(3) = 1.0;
  };
  return m;
}

}  // namespace

double lorentzian(double x, double center, double fwhm, double amplitude, double offset) {
  const double h = 0.5 * fwhm;
  const double d = x - center;
  return offset + amplitude * h * h / (d * d + h * h);
}

FitResult fit_lorentzian(std::span<const WeightedPoint> points) {
  if (points.size() < 5) throw InputError("Lorentzian fit needs at least five points");
  const auto pts = sorted_by_x(points);
  const auto n = pts.size();

  std::size_t imax = 0;
  double ymin = pts[0].y;
  for (std::size_t i = 1; i < n; ++i) {
    if (pts[i].y > pts[imax].y) imax = i;  // strict: lowest index wins on plateaus
    ymin = std::min(ymin, pts[i].y);
  }
  const double amp = pts[imax].y - ymin;
  if (!(amp > 0.0)) throw InputError("flat data: no resonance peak to fit");
  if (imax == 0 || imax == n - 1) {
    throw InputError("no interior maximum: data look monotone, not like a resonance");
  }
  const double half = ymin + 0.5 * amp;
  double left = pts.front().x;
  for (std::size_t i = imax; i > 0; --i) {
    if (pts[i - 1].y < half) {
      left = crossing(pts[i - 1], pts[i], half);
      break;
    }
  }
  double right = pts.back().x;
  for (std::size_t i = imax; i + 1 < n; ++i) {
    if (pts[i + 1].y < half) {
      right = crossing(pts[i], pts[i + 1], half);
      break;
    }
  }
  const double span = pts.back().x - pts.front().x;
  double width = right - left;
  if (!(width > 0.0)) width = 0.25 * span;

  Eigen::VectorXd start(4);
  start << pts[imax].x, width, amp, ymin;
  Bounds bounds{Eigen::VectorXd(4), Eigen::VectorXd(4)};
  bounds.lower << -kInf, 1e-9 * span, -kInf, -kInf;
  bounds.upper << kInf, kInf, kInf, kInf;
  return least_squares(lorentzian_model(), pts, start, bounds);
}

FitResult fit_center_vs_pressure(std::span<const WeightedPoint> centers) {
  if (centers.size() < 2) throw InputError("center-vs-pressure fit needs at least two points");
  for (const auto& c : centers) {
    if (!std::isfinite(c.x) || !std::isfinite(c.y) || !(c.sigma > 0.0)) {
      throw InputError("center points need finite values and positive sigma");
    }
  }
  // work in MHz relative to the first center to keep full precision
  const double ref = centers.front().y;
  double s = 0.0, sx = 0.0, sy = 0.0;
  for (const auto& c : centers) {
    const double w = 1.0 / ((c.sigma * 1e6) * (c.sigma * 1e6));
    s += w;
    sx += w * c.x;
    sy += w * (c.y - ref) * 1e6;
  }
  const double xm = sx / s;
  const double ym = sy / s;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& c : centers) {
    const double w = 1.0 / ((c.sigma * 1e6) * (c.sigma * 1e6));
    const double dx = c.x - xm;
    sxx += w * dx * dx;
    sxy += w * dx * ((c.y - ref) * 1e6 - ym);
  }

  FitResult r;
  r.names = {"slope_MHz_per_bar", "intercept_THz"};
  r.iterations = 1;
  if (!(sxx > 0.0)) {
    r.status = FitStatus::Singular;
    r.values = Eigen::VectorXd::Constant(2, std::numeric_limits<double>::quiet_NaN());
    r.uncertainties = r.values;
    r.covariance = Eigen::MatrixXd::Constant(2, 2, std::numeric_limits<double>::quiet_NaN());
    r.warnings.emplace_back("all pressures are equal");
    return r;
  }
  const double slope = sxy / sxx;
  const double intercept_mhz = ym - slope * xm;
  r.values = Eigen::Vector2d(slope, ref + intercept_mhz * 1e-6);
  r.covariance.resize(2, 2);
  r.covariance(0, 0) = 1.0 / sxx;
  r.covariance(1, 1) = (1.0 / s + xm * xm / sxx) * 1e-12;
  r.covariance(0, 1) = r.covariance(1, 0) = -xm / sxx * 1e-6;
  r.uncertainties = r.covariance.diagonal().cwiseSqrt();
  double chi2 = 0.0;
  for (const auto& c : centers) {
    const double model = intercept_mhz + slope * c.x;
    const double res = ((c.y - ref) * 1e6 - model) / (c.sigma * 1e6);
    chi2 += res * res;
  }
  r.chi2 = chi2;
  r.reduced_chi2 = centers.size() > 2 ? chi2 / static_cast<double>(centers.size() - 2) : 0.0;
  r.status = FitStatus::Converged;
  return r;
}

FitResult fit_dicke_width(std::span<const WeightedPoint> widths) {
  if (widths.size() < 3) throw InputError("Dicke width fit needs at least three pressures");
  for (const auto& w : widths) {
    if (!(w.x > 0.0)) throw InputError("Dicke width fit needs positive pressures");
    if (!(w.y > 0.0)) throw InputError("Dicke width fit needs positive widths");
  }
  // linear in (A, B): weighted normal equations give the starting point
  Eigen::Matrix2d ata = Eigen::Matrix2d::Zero();
  Eigen::Vector2d atb = Eigen::Vector2d::Zero();
  for (const auto& w : widths) {
    const Eigen::Vector2d row(1.0 / w.x / w.sigma, w.x / w.sigma);
    ata += row * row.transpose();
    atb += row * (w.y / w.sigma);
  }
  Eigen::VectorXd start = ata.ldlt().solve(atb);
  if (!start.allFinite()) start = Eigen::Vector2d(0.0, widths.back().y / widths.back().x);

  Model m;
  m.names = {"A_MHz_bar", "B_MHz_per_bar"};
  m.value = [](double p, const Eigen::VectorXd& q) { return q(0) / p + q(1) * p; };
  m.gradient = [](double p, const Eigen::VectorXd&, Eigen::Ref<Eigen::VectorXd> g) {
    g(0) = 1.0 / p;
    g(1) = p;
  };
  auto r = least_squares(m, widths, start);

  if (r.values(0) > 0.0 && r.values(1) > 0.0) {
    const double narrowest = std::sqrt(r.values(0) / r.values(1));
    const bool below = std::any_of(widths.begin(), widths.end(),
                                   [&](const WeightedPoint& w) { return w.x < narrowest; });
    if (!below) r.warnings.emplace_back("no pressure below the width minimum sqrt(A/B)");
  }
  if (r.status != FitStatus::Singular &&
      !(r.uncertainties(0) <= 0.5 * std::abs(r.values(0)))) {
    r.warnings.emplace_back("Dicke coefficient A poorly constrained (relative uncertainty > 50%)");
  }
  return r;
}

FitResult fit_sine(std::span<const WeightedPoint> points, double period_deg) {
  if (points.size() < 5) throw InputError("sine fit needs at least five angles");
  if (!(period_deg > 0.0)) throw InputError("sine period must be positive");
  const double omega = 2.0 * std::numbers::pi / period_deg;

  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  double lo = points.front().x, hi = points.front().x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pt = points[static_cast<std::size_t>(i)];
    a(i, 0) = std::sin(omega * pt.x) / pt.sigma;
    a(i, 1) = std::cos(omega * pt.x) / pt.sigma;
    a(i, 2) = 1.0 / pt.sigma;
    b(i) = pt.y / pt.sigma;
    lo = std::min(lo, pt.x);
    hi = std::max(hi, pt.x);
  }
  const Eigen::Vector3d lin = a.colPivHouseholderQr().solve(b);
  Eigen::VectorXd start(3);
  start << std::hypot(lin(0), lin(1)), std::atan2(-lin(1), lin(0)) / omega, lin(2);

  Model m;
  m.names = {"amplitude", "phase_deg", "offset"};
  m.value = [omega](double t, const Eigen::VectorXd& q) {
    return q(2) + q(0) * std::sin(omega * (t - q(1)));
  };
  m.gradient = [omega](double t, const Eigen::VectorXd& q, Eigen::Ref<Eigen::VectorXd> g) {
    g(0) = std::sin(omega * (t - q(1)));
    g(1) = -q(0) * omega * std::cos(omega * (t - q(1)));
    g(2) = 1.0;
  };
  auto r = least_squares(m, points, start);
  if (r.values(0) < 0.0) {
    r.values(0) = -r.values(0);
    r.values(1) += 0.5 * period_deg;
    r.covariance.row(0) *= -1.0;
    r.covariance.col(0) *= -1.0;
  }
  if (r.values(2) < r.values(0)) {
    // counts cannot go negative: refit on the boundary amplitude = offset
    Model edge;
    edge.names = {"phase_deg", "offset"};
    edge.value = [omega](double t, const Eigen::VectorXd& q) {
      return q(1) * (1.0 + std::sin(omega * (t - q(0))));
    };
    edge.gradient = [omega](double t, const Eigen::VectorXd& q, Eigen::Ref<Eigen::VectorXd> g) {
      g(0) = -q(1) * omega * std::cos(omega * (t - q(0)));
      g(1) = 1.0 + std::sin(omega * (t - q(0)));
    };
    Eigen::VectorXd edge_start(2);
    edge_start << r.values(1), 0.5 * (r.values(0) + r.values(2));
    const auto e = least_squares(edge, points, edge_start);
    Eigen::Matrix<double, 3, 2> t;
    t << 0, 1, 1, 0, 0, 1;
    r.values << e.values(1), e.values(0), e.values(1);
    r.covariance = t * e.covariance * t.transpose();
    r.uncertainties = r.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    r.chi2 = e.chi2;
    r.reduced_chi2 = e.chi2 / static_cast<double>(std::max<Eigen::Index>(n - 3, 1));
    r.gradient_norm = e.gradient_norm;
    r.status = e.status;
    r.iterations += e.iterations;
    r.warnings.insert(r.warnings.end(), e.warnings.begin(), e.warnings.end());
    r.warnings.emplace_back("offset fell below amplitude; refitted with full modulation");
  }
  r.values(1) = wrap(r.values(1), period_deg);
  const double span = (hi - lo) * static_cast<double>(n) / static_cast<double>(n - 1);
  if (span < period_deg * (1.0 - 1e-9)) {
    r.warnings.emplace_back("angle span shorter than one period");
  }
  return r;
}

std::pair<FitResult, FitResult> fit_sine(const pol::PolarizationScan& scan) {
  std::vector<double> angles, d1, d2;
  for (const auto& pt : scan.points) {
    angles.push_back(pt.angle_deg);
    d1.push_back(pt.counts_d1);
    d2.push_back(pt.counts_d2);
  }
  const auto p1 = count_points(angles, d1);
  const auto p2 = count_points(angles, d2);
  return {fit_sine(p1, scan.period_deg), fit_sine(p2, scan.period_deg)};
}

double sine_peak_angle(const FitResult& sine, double period_deg) {
  return wrap(sine.value("phase_deg") + 0.25 * period_deg, period_deg);
}

std::pair<double, double> sine_contrast(const FitResult& sine) {
  const auto ia = static_cast<Eigen::Index>(sine.index("amplitude"));
  const auto ic = static_cast<Eigen::Index>(sine.index("offset"));
  const double amp = sine.values(ia);
  const double off = sine.values(ic);
  const double c = pol::contrast(amp, off);
  const double da = 1.0 / off;
  const double dc = -amp / (off * off);
  const double var = da * da * sine.covariance(ia, ia) + dc * dc * sine.covariance(ic, ic) +
                     2.0 * da * dc * sine.covariance(ia, ic);
  return {c, std::sqrt(std::max(var, 0.0))};
}

}  // namespace csrslab::fit
