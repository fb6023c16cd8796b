#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace csrslab::fit {

struct WeightedPoint {
  double x = 0.0;
  double y = 0.0;
  double sigma = 1.0;
};

/// Points with sigma = sqrt(counts); zero counts get sigma = 1.
std::vector<WeightedPoint> count_points(std::span<const double> x, std::span<const double> counts);

enum class FitStatus { Converged, MaxIterations, Singular };
std::string_view to_string(FitStatus status);

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd values;
  Eigen::VectorXd uncertainties;  // sqrt(diag(covariance))
  Eigen::MatrixXd covariance;
  double chi2 = 0.0;
  double reduced_chi2 = 0.0;
  double gradient_norm = 0.0;     // scaled, see least_squares
  FitStatus status = FitStatus::Singular;
  int iterations = 0;
  std::vector<std::string> warnings;

  bool converged() const noexcept { return status == FitStatus::Converged; }
  std::size_t index(std::string_view name) const;
  double value(std::string_view name) const { return values(static_cast<Eigen::Index>(index(name))); }
  double sigma(std::string_view name) const {
    return uncertainties(static_cast<Eigen::Index>(index(name)));
  }
};

/// Parametric curve y = f(x; p) with an analytic gradient df/dp.
struct Model {
  std::vector<std::string> names;
  std::function<double(double, const Eigen::VectorXd&)> value;
  std::function<void(double, const Eigen::VectorXd&, Eigen::Ref<Eigen::VectorXd>)> gradient;
};

struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct SolverOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
  double step_tolerance = 1e-14;
  double initial_damping = 1e-3;
};

/// Levenberg-Marquardt on the weighted residuals (y - f) / sigma, with
/// Marquardt diagonal scaling and projection onto optional box bounds.
///
/// Converges when the scaled gradient max_i |J_i . r| / (|J_i| |r|) drops
/// below gradient_tolerance, or when a step no longer changes the parameters.
/// The covariance is (J^T J)^-1 at the solution using the supplied sigmas.
/// Throws InputError for too few points, non-finite data or NaN model output.
FitResult least_squares(const Model& model, std::span<const WeightedPoint> points,
                        const Eigen::VectorXd& initial, const std::optional<Bounds>& bounds = {},
                        const SolverOptions& options = {});

}  // namespace csrslab::fit
