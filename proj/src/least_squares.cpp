#include "mcdist/least_squares.hpp"

#include <cmath>
#include <limits>

namespace mcdist {

namespace {

constexpr int kMaxDampingRetries = 60;

double half_squared_norm(const Eigen::VectorXd& e) { return 0.5 * e.squaredNorm(); }

bool solvable(const Eigen::LDLT<Eigen::MatrixXd>& ldlt, const Eigen::MatrixXd& normal,
              const Eigen::VectorXd& rhs, Eigen::VectorXd& step) {
  if (ldlt.info() != Eigen::Success) return false;
  step = ldlt.solve(rhs);
  if (!step.allFinite()) return false;
  const double residual = (normal * step - rhs).norm();
  return residual <= 1e-8 * (rhs.norm() + 1.0);
}

}  // namespace

FitResult lm_fit(const ResidualFn& residuals, const JacobianFn& jacobian,
                 const Eigen::VectorXd& theta0, const LMOptions& opts) {
  opts.validate();
  if (!theta0.allFinite()) throw NonFiniteResidual("initial parameters are not finite");

  Eigen::VectorXd theta = theta0;
  Eigen::VectorXd e = residuals(theta);
  if (!e.allFinite()) throw NonFiniteResidual("residuals are not finite at theta0");

  FitResult result;
  result.params = theta;
  result.final_cost = half_squared_norm(e);
  result.residual_rmse = e.size() > 0 ? std::sqrt(e.squaredNorm() / e.size()) : 0.0;

  if (result.final_cost <= opts.cost_tol) {
    result.converged = true;
    return result;
  }

  const bool gauss_newton = opts.mode == LMOptions::Mode::GaussNewton;
  double mu = gauss_newton ? 0.0 : opts.mu0;
  double cost = result.final_cost;

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    const Eigen::MatrixXd jac = jacobian(theta);
    if (jac.rows() != e.size() || jac.cols() != theta.size())
      throw DimensionMismatch("Jacobian dimensions do not match residuals/parameters");
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const Eigen::VectorXd gradient = jac.transpose() * e;

    // Undamped normal equations may still be consistent when J^T J is rank
    // deficient, so LDLT alone cannot flag the degeneracy.
    if (gauss_newton && Eigen::FullPivLU<Eigen::MatrixXd>(normal).rank() < normal.cols())
      throw SingularNormalMatrix("Gauss-Newton normal matrix is singular");

    bool accepted = false;
    Eigen::VectorXd step;
    for (int retry = 0; retry < kMaxDampingRetries; ++retry) {
      Eigen::MatrixXd damped = normal;
      damped.diagonal().array() += mu;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
      if (!solvable(ldlt, damped, gradient, step)) {
        if (gauss_newton)
          throw SingularNormalMatrix("Gauss-Newton normal matrix is singular");
        mu *= opts.gamma;
        continue;
      }
      const Eigen::VectorXd candidate = theta - step;
      const Eigen::VectorXd e_candidate = residuals(candidate);
      const double candidate_cost =
          e_candidate.allFinite() ? half_squared_norm(e_candidate)
                                  : std::numeric_limits<double>::infinity();
      if (candidate_cost < cost) {
        theta = candidate;
        e = e_candidate;
        cost = candidate_cost;
        if (!gauss_newton) mu = std::max(mu / opts.gamma, 1e-300);
        accepted = true;
        break;
      }
      if (gauss_newton) break;  // nothing left to damp
      mu *= opts.gamma;
    }

    if (!accepted) {
      if (!gauss_newton && mu >= 1e280)
        throw SingularNormalMatrix("normal matrix not invertible after damping escalation");
      break;  // stalled
    }

    result.iterations = iter;
    result.params = theta;
    result.final_cost = cost;
    result.residual_rmse = e.size() > 0 ? std::sqrt(e.squaredNorm() / e.size()) : 0.0;

    if (opts.on_accept && !opts.on_accept(iter, theta, cost)) break;
    if (cost <= opts.cost_tol || step.norm() <= opts.step_tol * (1.0 + theta.norm())) {
      result.converged = true;
      break;
    }
  }

  result.params = theta;
  result.final_cost = cost;
  result.residual_rmse = e.size() > 0 ? std::sqrt(e.squaredNorm() / e.size()) : 0.0;
  return result;
}

ExpCurveParams fit_exponential(const std::vector<std::pair<double, double>>& points,
                               std::pair<double, double> theta0, const LMOptions& opts,
                               bool prepend_origin) {
  if (points.size() < 2) throw InsufficientData("exponential fit requires at least 2 points");

  std::vector<std::pair<double, double>> data;
  if (prepend_origin) data.emplace_back(0.0, 0.0);
  data.insert(data.end(), points.begin(), points.end());

  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::VectorXd d(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d[i] = data[static_cast<std::size_t>(i)].first;
    y[i] = data[static_cast<std::size_t>(i)].second;
  }

  const ResidualFn residuals = [&](const Eigen::VectorXd& th) -> Eigen::VectorXd {
    return y.array() - th[0] * (th[1] * d.array()).exp();
  };
  const JacobianFn jac = [&](const Eigen::VectorXd& th) -> Eigen::MatrixXd {
    Eigen::MatrixXd j(n, 2);
    const Eigen::ArrayXd ebd = (th[1] * d.array()).exp();
    j.col(0) = -ebd;
    j.col(1) = -th[0] * d.array() * ebd;
    return j;
  };

  Eigen::VectorXd th0(2);
  th0 << theta0.first, theta0.second;
  const FitResult fit = lm_fit(residuals, jac, th0, opts);

  ExpCurveParams out;
  out.amplitude = fit.params[0];
  out.rate = fit.params[1];
  double sse = 0.0;
  for (const auto& [di, yi] : points) {
    const double r = yi - out.amplitude * std::exp(out.rate * di);
    sse += r * r;
  }
  out.rmse_of_fit = std::sqrt(sse / static_cast<double>(points.size()));
  return out;
}

}  // namespace mcdist
