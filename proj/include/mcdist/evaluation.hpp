#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mcdist/errors.hpp"
#include "mcdist/estimators.hpp"
#include "mcdist/feature_extraction.hpp"

namespace mcdist {

// One labeled trial after feature extraction; the unit of the features CSV.
struct FeatureRecord {
  std::string trial_id;
  FeatureVector features;
  double distance = -1.0;  // cm; negative = unlabeled
};

double rmse(const Eigen::VectorXd& estimates, const Eigen::VectorXd& actuals);

// (100/M) sum |d_hat_i - d| / d for one actual-distance group.
double mape_per_distance(const Eigen::VectorXd& estimates, double actual_distance);

// Ratio of distance to first-peak arrival time.
double average_velocity(double distance, double t_peak);

// Stable per-trial seed derivation (splitmix64 mix of the master seed and the
// trial index) so scheduling order can never change results.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial_index);

struct DistanceStats {
  double distance = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  double mape = 0.0;
  long count = 0;
};

struct EstimateRecord {
  std::string trial_id;
  double actual = 0.0;
  double estimate = 0.0;
};

struct EvaluationReport {
  std::string method;
  double rmse = 0.0;
  std::vector<DistanceStats> per_distance;
  std::vector<double> per_trial_rmse;  // one entry per Monte-Carlo trial
  long trials = 1;
  std::uint64_t seed = 0;
  long excluded = 0;
  std::vector<EstimateRecord> estimates;  // data-analysis mode only
};

enum class MLMethod { MLR, NNR };

struct SplitFractions {
  double train = 0.7;
  double validation = 0.0;
  double test = 0.3;
};

struct MonteCarloOptions {
  long trials = 1000;
  SplitFractions split;  // validation fraction is only consumed by NNR
  std::uint64_t seed = 0;
  NNRTrainConfig nnr;  // hidden nodes, LM options, early-stopping patience
};

// Shuffle/split/train/test `trials` times with deterministic per-trial seeds;
// aggregates mean/std of the estimates per distance and averages rho.
EvaluationReport monte_carlo_evaluate(const std::vector<FeatureRecord>& dataset, MLMethod method,
                                      const MonteCarloOptions& opts);

enum class DataAnalysisMethod { Power, PeakTime, Combined };

// Applies the chosen closed-form estimator to every trial (no split). Trials
// hitting a domain error are excluded and counted, never imputed.
// N_R is recovered from t_peak and the sampling rate.
EvaluationReport evaluate_data_analysis(const std::vector<FeatureRecord>& dataset,
                                        const CurveEstimatorParams& params,
                                        DataAnalysisMethod method, double sampling_rate);

struct VelocityRow {
  double distance = 0.0;
  double emission_time = 0.0;  // s; <0 marks the cross-T_e mean
  double mean_velocity = 0.0;  // cm/s
  long count = 0;
};

// Per-distance mean of d / t_peak, grouped by T_e, plus the cross-T_e mean.
std::vector<VelocityRow> velocity_profile(const std::vector<FeatureRecord>& dataset);

}  // namespace mcdist
