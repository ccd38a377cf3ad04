#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace qdmem {

// model value at x for the given parameter vector
using ModelFn = std::function<double(double, const std::vector<double>&)>;

struct FitOptions {
  int max_iterations = 300;
  double gradient_tol = 1e-11;
  double step_tol = 1e-13;
  double cost_tol = 1e-12;  // relative cost-reduction floor
  // minimize the Poisson deviance instead of weighted squares; y must be
  // counts and the supplied sigmas are ignored
  bool poisson_ml = false;
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> sigmas;
  Eigen::MatrixXd covariance;
  double chi2 = 0.0;  // weighted residual norm (deviance in poisson_ml mode)
  int dof = 0;
  int iterations = 0;
  bool converged = false;
  bool ill_conditioned = false;  // near-singular normal equations
  bool clamped = false;          // some parameter pinned at a bound
  std::string message;

  int index(std::string_view name) const;
  double value(std::string_view name) const;
  double sigma(std::string_view name) const;
};

struct FitProblem {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sigma;  // per-point standard deviation; empty = unit
  ModelFn model;
  std::vector<std::string> param_names;
  std::vector<double> initial;
  std::vector<double> lower;  // optional box bounds, empty = unbounded
  std::vector<double> upper;
  std::vector<bool> fixed;    // optional, per-parameter
};

// Levenberg-Marquardt with Nielsen damping and a central-difference
// jacobian; covariance = (J^T J)^-1 in units of the supplied sigmas
FitResult fit_model(const FitProblem& problem, const FitOptions& opts = {});

// per-point Poisson standard deviations, sqrt(max(count, 1))
std::vector<double> poisson_sigmas(const std::vector<double>& counts);

}  // namespace qdmem
