#include "csrslab/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "csrslab/errors.hpp"

namespace csrslab::fit {

std::vector<WeightedPoint> count_points(std::span<const double> x, std::span<const double> counts) {
  if (x.size() != counts.size()) throw InputError("x and counts differ in length");
  std::vector<WeightedPoint> points;
  points.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    points.push_back({x[i], counts[i], std::sqrt(std::max(counts[i], 1.0))});
  }
  return points;
}

std::string_view to_string(FitStatus status) {
  switch (status) {
    case FitStatus::Converged: return "converged";
    case FitStatus::MaxIterations: return "max-iterations";
    case FitStatus::Singular: return "singular";
  }
  return "?";
}

std::size_t FitResult::index(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw InputError("fit has no parameter named '" + std::string(name) + "'");
}

namespace {

struct Linearization {
  Eigen::VectorXd residual;  // (y - f) / sigma
  Eigen::MatrixXd jacobian;  // (df/dp) / sigma
};

Linearization linearize(const Model& model, std::span<const WeightedPoint> points,
                        const Eigen::VectorXd& p) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Linearization lin{Eigen::VectorXd(n), Eigen::MatrixXd(n, p.size())};
  Eigen::VectorXd grad(p.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pt = points[static_cast<std::size_t>(i)];
    const double f = model.value(pt.x, p);
    model.gradient(pt.x, p, grad);
    if (!std::isfinite(f) || !grad.allFinite()) {
      throw InputError("model produced a non-finite value at x = " + std::to_string(pt.x));
    }
    lin.residual(i) = (pt.y - f) / pt.sigma;
    lin.jacobian.row(i) = grad.transpose() / pt.sigma;
  }
  return lin;
}

double cost_of(const Model& model, std::span<const WeightedPoint> points, const Eigen::VectorXd& p) {
  double sum = 0.0;
  for (const auto& pt : points) {
    const double r = (pt.y - model.value(pt.x, p)) / pt.sigma;
    sum += r * r;
  }
  return sum;
}

// Cosine between each Jacobian column and the residual. The residual norm is
// floored at one sigma so exact-model data does not turn rounding into angle.
double scaled_gradient(const Linearization& lin) {
  const double rnorm = std::max(lin.residual.norm(), 1.0);
  const Eigen::VectorXd g = lin.jacobian.transpose() * lin.residual;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double cn = lin.jacobian.col(j).norm();
    if (cn > 0.0) worst = std::max(worst, std::abs(g(j)) / (cn * rnorm));
  }
  return worst;
}

void project(Eigen::VectorXd& p, const std::optional<Bounds>& bounds) {
  if (!bounds) return;
  p = p.cwiseMax(bounds->lower).cwiseMin(bounds->upper);
}

}  // namespace

FitResult least_squares(const Model& model, std::span<const WeightedPoint> points,
                        const Eigen::VectorXd& initial, const std::optional<Bounds>& bounds,
                        const SolverOptions& options) {
  const auto m = initial.size();
  if (static_cast<Eigen::Index>(model.names.size()) != m) {
    throw InputError("initial guess does not match the model's parameter count");
  }
  if (points.size() < static_cast<std::size_t>(m)) {
    throw InputError("need at least as many points as parameters");
  }
  for (const auto& pt : points) {
    if (!std::isfinite(pt.x) || !std::isfinite(pt.y) || !std::isfinite(pt.sigma)) {
      throw InputError("non-finite data point");
    }
    if (!(pt.sigma > 0.0)) throw InputError("point uncertainties must be positive");
  }
  if (!initial.allFinite()) throw InputError("non-finite initial guess");
  if (bounds && (bounds->lower.size() != m || bounds->upper.size() != m)) {
    throw InputError("bounds do not match the parameter count");
  }

  FitResult result;
  result.names = model.names;
  Eigen::VectorXd p = initial;
  project(p, bounds);

  auto lin = linearize(model, points, p);
  double cost = lin.residual.squaredNorm();
  double lambda = options.initial_damping;
  result.status = FitStatus::MaxIterations;

  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (scaled_gradient(lin) < options.gradient_tolerance) {
      result.status = FitStatus::Converged;
      break;
    }
    const Eigen::MatrixXd jtj = lin.jacobian.transpose() * lin.jacobian;
    const Eigen::VectorXd g = lin.jacobian.transpose() * lin.residual;
    Eigen::VectorXd diag = jtj.diagonal().cwiseMax(std::numeric_limits<double>::min());

    bool accepted = false;
    bool stalled = false;
    while (!accepted) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += lambda * diag;
      const Eigen::VectorXd step = damped.ldlt().solve(g);
      if (!step.allFinite()) {
        lambda *= 10.0;
        if (lambda > 1e16) {
          stalled = true;
          break;
        }
        continue;
      }
      Eigen::VectorXd trial = p + step;
      project(trial, bounds);
      const Eigen::VectorXd moved = trial - p;
      if (moved.norm() <= options.step_tolerance * (p.norm() + options.step_tolerance)) {
        stalled = true;
        break;
      }
      const double trial_cost = cost_of(model, points, trial);
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        p = trial;
        const double previous = cost;
        lin = linearize(model, points, p);
        cost = lin.residual.squaredNorm();
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        if (previous - cost <= 1e-16 * previous &&
            moved.norm() <= 1e-10 * (p.norm() + 1e-10)) {
          stalled = true;
        }
      } else {
        lambda *= 10.0;
        if (lambda > 1e16) {
          stalled = true;
          break;
        }
      }
    }
    if (stalled) {
      // no further decrease is representable: a stationary point in floating point
      result.status = FitStatus::Converged;
      ++iter;
      break;
    }
  }
  result.iterations = iter;
  result.values = p;
  result.chi2 = cost;
  const auto dof = static_cast<double>(points.size()) - static_cast<double>(m);
  result.reduced_chi2 = dof > 0.0 ? cost / dof : 0.0;
  result.gradient_norm = scaled_gradient(lin);

  // conditioning is judged on the unit-diagonal form so parameter units do not matter
  const Eigen::MatrixXd jtj = lin.jacobian.transpose() * lin.jacobian;
  const Eigen::VectorXd d = jtj.diagonal();
  const bool dead_column = (d.array() <= 0.0).any();
  const Eigen::VectorXd inv_scale = d.cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd corr = inv_scale.asDiagonal() * jtj * inv_scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  const double max_ev = eig.eigenvalues().cwiseAbs().maxCoeff();
  const double min_ev = eig.eigenvalues().minCoeff();
  if (dead_column || !(max_ev > 0.0) || min_ev <= 1e-13 * max_ev) {
    result.status = FitStatus::Singular;
    result.covariance = Eigen::MatrixXd::Constant(m, m, std::numeric_limits<double>::quiet_NaN());
    result.uncertainties = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::quiet_NaN());
    result.warnings.emplace_back("normal equations are singular");
    return result;
  }
  result.covariance = inv_scale.asDiagonal() *
                      (eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                       eig.eigenvectors().transpose()) *
                      inv_scale.asDiagonal();
  result.covariance = 0.5 * (result.covariance + result.covariance.transpose());
  result.uncertainties = result.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return result;
}

}  // namespace csrslab::fit
