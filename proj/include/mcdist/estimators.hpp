#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcdist/errors.hpp"
#include "mcdist/least_squares.hpp"

namespace mcdist {

// ---------------------------------------------------------------------------
// Multivariate linear regression
// ---------------------------------------------------------------------------

struct LinearModel {
  Eigen::VectorXd theta;  // length m + 1, bias first
  std::vector<std::string> feature_order;
};

// Closed-form normal-equation solution; X carries the leading column of ones.
LinearModel mlr_train(const Eigen::MatrixXd& design, const Eigen::VectorXd& distances,
                      std::vector<std::string> feature_order = {});

double mlr_predict(const LinearModel& model, const Eigen::VectorXd& features);

// ---------------------------------------------------------------------------
// Neural network regression (single hidden layer, LM-trained)
// ---------------------------------------------------------------------------

enum class OutputActivation { Tanh, Linear };

struct NeuralModel {
  int inputs = 0;        // n
  int hidden_nodes = 0;  // p
  OutputActivation output_activation = OutputActivation::Tanh;
  Eigen::VectorXd theta;  // (n+1)*p hidden weights then (p+1) output weights

  // per-feature min/max and target range, mapped onto [-0.8, 0.8]
  Eigen::VectorXd input_min, input_max;
  double target_min = 0.0, target_max = 0.0;

  int weight_count() const { return (inputs + 1) * hidden_nodes + hidden_nodes + 1; }
};

// g(z) = 2 / (1 + exp(-2 z)) - 1
inline double nn_activation(double z) { return 2.0 / (1.0 + std::exp(-2.0 * z)) - 1.0; }

// Forward pass in normalized space.
double nn_forward_normalized(const NeuralModel& model, const Eigen::VectorXd& x_normalized);

// Per-pattern residuals e_i = y_i - o_i and the r x N Jacobian d e_i / d theta_j,
// both in normalized space. Exposed so the gradient check can probe it directly.
void nn_residuals_jacobian(const NeuralModel& model, const Eigen::MatrixXd& x_normalized,
                           const Eigen::VectorXd& y_normalized, Eigen::VectorXd& residuals,
                           Eigen::MatrixXd& jacobian);

struct NNRTrainConfig {
  int hidden_nodes = 1;
  OutputActivation output_activation = OutputActivation::Tanh;
  LMOptions lm;
  std::uint64_t seed = 0;
  int validation_patience = 6;
};

// Trains by LM backpropagation. Inputs and targets are min-max normalized to
// [-0.8, 0.8]; weights start from a seeded uniform draw on [-0.5, 0.5]. An
// optional validation set enables patience-based early stopping.
NeuralModel nnr_train(const Eigen::MatrixXd& features, const Eigen::VectorXd& distances,
                      const NNRTrainConfig& cfg,
                      const Eigen::MatrixXd* validation_features = nullptr,
                      const Eigen::VectorXd* validation_distances = nullptr);

double nnr_predict(const NeuralModel& model, const Eigen::VectorXd& features);

// ---------------------------------------------------------------------------
// Curve-inversion estimators
// ---------------------------------------------------------------------------

struct CurveRow {
  double emission_time = 0.0;  // s
  double power_amplitude = 0.0, power_rate = 0.0;      // a1, b1
  double peaktime_amplitude = 0.0, peaktime_rate = 0.0;  // a2, b2
  double transmit_power = 0.0;  // mean P_T, V^2
};

struct CurveEstimatorParams {
  std::vector<CurveRow> rows;

  const CurveRow& row_for(double emission_time) const;
};

inline double received_power(double energy, Eigen::Index sample_count) {
  if (sample_count < 1) throw DomainError("received_power requires N_R >= 1");
  return energy / static_cast<double>(sample_count);
}

// d = (1/b1) ln(P_R / (P_T a1))
double power_based_estimate(double received, double transmitted, double amplitude, double rate);

// d = (1/b2) ln(t_peak / a2)
double peak_time_estimate(double t_peak, double amplitude, double rate);

// d = (1/(b1-b2)) ln(P_R a2 / (P_T t_peak a1))
double combined_estimate(double received, double transmitted, double t_peak,
                         double power_amplitude, double power_rate, double peak_amplitude,
                         double peak_rate);

}  // namespace mcdist
