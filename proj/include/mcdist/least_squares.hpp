#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "mcdist/errors.hpp"

namespace mcdist {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct LMOptions {
  double mu0 = 1e-3;       // initial damping
  double gamma = 10.0;     // damping step factor
  int max_iters = 500;
  double cost_tol = 1e-12; // stop when E(theta) falls below
  double step_tol = 1e-10; // stop on relative parameter change
  enum class Mode { LM, GaussNewton };
  Mode mode = Mode::LM;

  // Invoked after every accepted step; returning false stops the iteration.
  // Used by the neural trainer for validation-based early stopping.
  std::function<bool(int iter, const Eigen::VectorXd& theta, double cost)> on_accept;

  void validate() const {
    if (gamma <= 1.0) throw ConfigError("LM gamma must be > 1");
    if (mu0 <= 0.0) throw ConfigError("LM mu0 must be > 0");
    if (max_iters < 1) throw ConfigError("LM max_iters must be >= 1");
  }
};

struct FitResult {
  Eigen::VectorXd params;
  double final_cost = 0.0;  // E(theta) = 1/2 sum e_i^2
  int iterations = 0;
  bool converged = false;
  double residual_rmse = 0.0;
};

// Damped Gauss-Newton iteration on theta -= (J^T J + mu I)^{-1} J^T e.
// A step is accepted only when E(theta) decreases; mu shrinks by gamma on
// acceptance and grows by gamma on rejection. GaussNewton mode pins mu = 0.
FitResult lm_fit(const ResidualFn& residuals, const JacobianFn& jacobian,
                 const Eigen::VectorXd& theta0, const LMOptions& opts = {});

struct ExpCurveParams {
  double amplitude = 0.0;  // a
  double rate = 0.0;       // b, 1/cm
  double rmse_of_fit = 0.0;
};

// Fits y = a * exp(b * d) with an analytic Jacobian. When prepend_origin is
// set, a (0, 0) point is added before fitting (peak-time curve only); the
// reported RMSE always covers just the supplied points.
ExpCurveParams fit_exponential(const std::vector<std::pair<double, double>>& points,
                               std::pair<double, double> theta0, const LMOptions& opts,
                               bool prepend_origin);

}  // namespace mcdist
