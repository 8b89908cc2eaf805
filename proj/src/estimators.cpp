#include "mcdist/estimators.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <random>

namespace mcdist {

LinearModel mlr_train(const Eigen::MatrixXd& design, const Eigen::VectorXd& distances,
                      std::vector<std::string> feature_order) {
  const Eigen::Index n = design.rows();
  const Eigen::Index cols = design.cols();
  if (n != distances.size())
    throw DimensionMismatch("design rows and distance count differ");
  if (n <= cols) throw InsufficientData("mlr_train requires N > m + 1");

  const Eigen::MatrixXd normal = design.transpose() * design;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
  if (lu.rank() < cols)
    throw RankDeficient("feature matrix is rank deficient; X^T X is singular");

  LinearModel model;
  model.theta = lu.solve(design.transpose() * distances);
  model.feature_order = std::move(feature_order);
  return model;
}

double mlr_predict(const LinearModel& model, const Eigen::VectorXd& features) {
  if (features.size() + 1 != model.theta.size())
    throw DimensionMismatch("feature count does not match the trained model");
  return model.theta[0] + model.theta.tail(features.size()).dot(features);
}

// ---------------------------------------------------------------------------
// NNR
// ---------------------------------------------------------------------------

namespace {

constexpr double kNormHalfRange = 0.8;

double normalize_scalar(double x, double lo, double hi) {
  if (hi <= lo) return 0.0;
  return -kNormHalfRange + 2.0 * kNormHalfRange * (x - lo) / (hi - lo);
}

double denormalize_scalar(double xn, double lo, double hi) {
  if (hi <= lo) return lo;
  return lo + (xn + kNormHalfRange) * (hi - lo) / (2.0 * kNormHalfRange);
}

Eigen::VectorXd normalize_features(const NeuralModel& m, const Eigen::VectorXd& x) {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    out[i] = normalize_scalar(x[i], m.input_min[i], m.input_max[i]);
  return out;
}

}  // namespace

double nn_forward_normalized(const NeuralModel& model, const Eigen::VectorXd& x_normalized) {
  const int n = model.inputs;
  const int p = model.hidden_nodes;
  if (x_normalized.size() != n) throw DimensionMismatch("input size does not match network");

  double z_out = model.theta[(n + 1) * p];  // output bias
  for (int j = 0; j < p; ++j) {
    const auto base = j * (n + 1);
    double z = model.theta[base];  // hidden bias
    z += model.theta.segment(base + 1, n).dot(x_normalized);
    z_out += model.theta[(n + 1) * p + 1 + j] * nn_activation(z);
  }
  return model.output_activation == OutputActivation::Tanh ? nn_activation(z_out) : z_out;
}

void nn_residuals_jacobian(const NeuralModel& model, const Eigen::MatrixXd& x_normalized,
                           const Eigen::VectorXd& y_normalized, Eigen::VectorXd& residuals,
                           Eigen::MatrixXd& jacobian) {
  const int n = model.inputs;
  const int p = model.hidden_nodes;
  const Eigen::Index patterns = x_normalized.rows();
  if (x_normalized.cols() != n || y_normalized.size() != patterns)
    throw DimensionMismatch("pattern matrix does not match network/targets");

  residuals.resize(patterns);
  jacobian.resize(patterns, model.weight_count());

  const Eigen::Index out_base = (n + 1) * p;
  Eigen::VectorXd hidden(p), hidden_z(p);
  for (Eigen::Index r = 0; r < patterns; ++r) {
    const Eigen::VectorXd x = x_normalized.row(r).transpose();
    double z_out = model.theta[out_base];
    for (int j = 0; j < p; ++j) {
      const auto base = j * (n + 1);
      double z = model.theta[base] + model.theta.segment(base + 1, n).dot(x);
      hidden_z[j] = z;
      hidden[j] = nn_activation(z);
      z_out += model.theta[out_base + 1 + j] * hidden[j];
    }
    const bool tanh_out = model.output_activation == OutputActivation::Tanh;
    const double out = tanh_out ? nn_activation(z_out) : z_out;
    const double dout = tanh_out ? 1.0 - out * out : 1.0;  // tanh'(z) = 1 - tanh(z)^2

    residuals[r] = y_normalized[r] - out;

    // e = y - o, so every sensitivity picks up a minus sign.
    jacobian(r, out_base) = -dout;
    for (int j = 0; j < p; ++j) {
      jacobian(r, out_base + 1 + j) = -dout * hidden[j];
      const double dhidden = 1.0 - hidden[j] * hidden[j];
      const double chain = -dout * model.theta[out_base + 1 + j] * dhidden;
      const auto base = j * (n + 1);
      jacobian(r, base) = chain;
      for (int i = 0; i < n; ++i) jacobian(r, base + 1 + i) = chain * x[i];
    }
  }
}

NeuralModel nnr_train(const Eigen::MatrixXd& features, const Eigen::VectorXd& distances,
                      const NNRTrainConfig& cfg, const Eigen::MatrixXd* validation_features,
                      const Eigen::VectorXd* validation_distances) {
  if (cfg.hidden_nodes < 1) throw ConfigError("nnr_train requires at least one hidden node");
  const Eigen::Index patterns = features.rows();
  if (patterns != distances.size())
    throw DimensionMismatch("feature rows and distance count differ");
  if (patterns < 1) throw InsufficientData("nnr_train requires at least one pattern");

  NeuralModel model;
  model.inputs = static_cast<int>(features.cols());
  model.hidden_nodes = cfg.hidden_nodes;
  model.output_activation = cfg.output_activation;
  model.input_min = features.colwise().minCoeff();
  model.input_max = features.colwise().maxCoeff();
  model.target_min = distances.minCoeff();
  model.target_max = distances.maxCoeff();

  Eigen::MatrixXd x_norm(patterns, model.inputs);
  for (Eigen::Index r = 0; r < patterns; ++r)
    x_norm.row(r) = normalize_features(model, features.row(r).transpose()).transpose();
  Eigen::VectorXd y_norm(patterns);
  for (Eigen::Index r = 0; r < patterns; ++r)
    y_norm[r] = normalize_scalar(distances[r], model.target_min, model.target_max);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> init(-0.5, 0.5);
  Eigen::VectorXd theta0(model.weight_count());
  for (Eigen::Index i = 0; i < theta0.size(); ++i) theta0[i] = init(rng);

  const ResidualFn residuals = [&](const Eigen::VectorXd& th) {
    NeuralModel probe = model;
    probe.theta = th;
    Eigen::VectorXd e;
    Eigen::MatrixXd j;
    nn_residuals_jacobian(probe, x_norm, y_norm, e, j);
    if (!e.allFinite()) throw NonFiniteLoss("non-finite training loss");
    return e;
  };
  const JacobianFn jacobian = [&](const Eigen::VectorXd& th) {
    NeuralModel probe = model;
    probe.theta = th;
    Eigen::VectorXd e;
    Eigen::MatrixXd j;
    nn_residuals_jacobian(probe, x_norm, y_norm, e, j);
    return j;
  };

  LMOptions opts = cfg.lm;
  Eigen::VectorXd best_theta;
  if (validation_features != nullptr && validation_distances != nullptr &&
      validation_features->rows() > 0) {
    Eigen::MatrixXd xv(validation_features->rows(), model.inputs);
    for (Eigen::Index r = 0; r < xv.rows(); ++r)
      xv.row(r) = normalize_features(model, validation_features->row(r).transpose()).transpose();
    Eigen::VectorXd yv(validation_distances->size());
    for (Eigen::Index r = 0; r < yv.size(); ++r)
      yv[r] = normalize_scalar((*validation_distances)[r], model.target_min, model.target_max);

    auto best_loss = std::make_shared<double>(std::numeric_limits<double>::infinity());
    auto stale = std::make_shared<int>(0);
    auto best = std::make_shared<Eigen::VectorXd>();
    const int patience = cfg.validation_patience;
    opts.on_accept = [&, xv, yv, best_loss, stale, best](int, const Eigen::VectorXd& th,
                                                         double) {
      NeuralModel probe = model;
      probe.theta = th;
      double loss = 0.0;
      for (Eigen::Index r = 0; r < xv.rows(); ++r) {
        const double e = yv[r] - nn_forward_normalized(probe, xv.row(r).transpose());
        loss += e * e;
      }
      if (loss < *best_loss) {
        *best_loss = loss;
        *best = th;
        *stale = 0;
      } else if (++*stale >= patience) {
        return false;
      }
      return true;
    };
    const FitResult fit = lm_fit(residuals, jacobian, theta0, opts);
    model.theta = best->size() > 0 ? *best : fit.params;
  } else {
    const FitResult fit = lm_fit(residuals, jacobian, theta0, opts);
    model.theta = fit.params;
  }
  return model;
}

double nnr_predict(const NeuralModel& model, const Eigen::VectorXd& features) {
  if (features.size() != model.inputs)
    throw DimensionMismatch("feature count does not match the trained network");
  const double out = nn_forward_normalized(model, normalize_features(model, features));
  return denormalize_scalar(out, model.target_min, model.target_max);
}

// ---------------------------------------------------------------------------
// Curve-inversion estimators
// ---------------------------------------------------------------------------

const CurveRow& CurveEstimatorParams::row_for(double emission_time) const {
  for (const CurveRow& row : rows)
    if (std::abs(row.emission_time - emission_time) <= 1e-9) return row;
  throw UnknownEmissionTime("no curve parameters for T_e = " + std::to_string(emission_time));
}

double power_based_estimate(double received, double transmitted, double amplitude, double rate) {
  if (rate == 0.0) throw DegenerateRates("power curve rate b1 must be nonzero");
  if (received <= 0.0 || transmitted <= 0.0 || amplitude <= 0.0)
    throw DomainError("power_based_estimate requires positive P_R, P_T and a1");
  return std::log(received / (transmitted * amplitude)) / rate;
}

double peak_time_estimate(double t_peak, double amplitude, double rate) {
  if (rate == 0.0) throw DegenerateRates("peak-time curve rate b2 must be nonzero");
  if (t_peak <= 0.0 || amplitude <= 0.0)
    throw DomainError("peak_time_estimate requires positive t_peak and a2");
  return std::log(t_peak / amplitude) / rate;
}

double combined_estimate(double received, double transmitted, double t_peak,
                         double power_amplitude, double power_rate, double peak_amplitude,
                         double peak_rate) {
  if (power_rate == peak_rate) throw DegenerateRates("combined estimate requires b1 != b2");
  if (received <= 0.0 || transmitted <= 0.0 || t_peak <= 0.0 || power_amplitude <= 0.0 ||
      peak_amplitude <= 0.0)
    throw DomainError("combined_estimate requires strictly positive inputs");
  return std::log(received * peak_amplitude / (transmitted * t_peak * power_amplitude)) /
         (power_rate - peak_rate);
}

}  // namespace mcdist
