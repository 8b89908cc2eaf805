#include "mcdist/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace mcdist {

double rmse(const Eigen::VectorXd& estimates, const Eigen::VectorXd& actuals) {
  if (estimates.size() != actuals.size())
    throw DimensionMismatch("rmse requires equal-length vectors");
  if (estimates.size() == 0) throw InsufficientData("rmse of empty vectors");
  return std::sqrt((estimates - actuals).squaredNorm() / estimates.size());
}

double mape_per_distance(const Eigen::VectorXd& estimates, double actual_distance) {
  if (estimates.size() == 0) throw InsufficientData("mape of empty vector");
  if (actual_distance <= 0.0) throw DomainError("mape_per_distance requires d > 0");
  return 100.0 * (estimates.array() - actual_distance).abs().mean() / actual_distance;
}

double average_velocity(double distance, double t_peak) {
  if (t_peak <= 0.0) throw DomainError("average_velocity requires t_peak > 0");
  return distance / t_peak;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial_index) {
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return mix(mix(seed) ^ mix(trial_index + 1));
}

namespace {

// Accumulates mean/std/mape per actual distance in insertion-independent form.
class DistanceAccumulator {
public:
  void add(double distance, double estimate) {
    auto& cell = cells_[distance];
    cell.count += 1;
    cell.sum += estimate;
    cell.sum_sq += estimate * estimate;
    cell.abs_err += std::abs(estimate - distance);
  }

  std::vector<DistanceStats> finish() const {
    std::vector<DistanceStats> out;
    out.reserve(cells_.size());
    for (const auto& [distance, cell] : cells_) {
      DistanceStats s;
      s.distance = distance;
      s.count = cell.count;
      const double n = static_cast<double>(cell.count);
      s.mean = cell.sum / n;
      const double var =
          cell.count > 1 ? std::max(0.0, (cell.sum_sq - cell.sum * cell.sum / n) / (n - 1.0))
                         : 0.0;
      s.stddev = std::sqrt(var);
      s.mape = distance > 0.0 ? 100.0 * cell.abs_err / (n * distance) : 0.0;
      out.push_back(s);
    }
    return out;
  }

private:
  struct Cell {
    long count = 0;
    double sum = 0.0, sum_sq = 0.0, abs_err = 0.0;
  };
  std::map<double, Cell> cells_;
};

Eigen::MatrixXd feature_matrix(const std::vector<FeatureRecord>& dataset,
                               const std::vector<std::size_t>& indices) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(indices.size()), 9);
  for (std::size_t r = 0; r < indices.size(); ++r)
    x.row(static_cast<Eigen::Index>(r)) = dataset[indices[r]].features.as_vector().transpose();
  return x;
}

Eigen::VectorXd distance_vector(const std::vector<FeatureRecord>& dataset,
                                const std::vector<std::size_t>& indices) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t r = 0; r < indices.size(); ++r)
    d[static_cast<Eigen::Index>(r)] = dataset[indices[r]].distance;
  return d;
}

}  // namespace

EvaluationReport monte_carlo_evaluate(const std::vector<FeatureRecord>& dataset, MLMethod method,
                                      const MonteCarloOptions& opts) {
  const std::size_t n = dataset.size();
  const bool use_validation = method == MLMethod::NNR;
  const auto n_train = static_cast<std::size_t>(std::floor(opts.split.train * n));
  const auto n_val =
      use_validation ? static_cast<std::size_t>(std::floor(opts.split.validation * n)) : 0;
  if (n_train < 1 || n_train + n_val >= n)
    throw InsufficientData("dataset too small for the requested split");
  if (method == MLMethod::MLR && n_train <= 10)
    throw InsufficientData("MLR training split needs more rows than parameters");

  EvaluationReport report;
  report.method = method == MLMethod::MLR ? "mlr" : "nnr";
  report.trials = opts.trials;
  report.seed = opts.seed;

  DistanceAccumulator per_distance;
  double rho_sum = 0.0;
  report.per_trial_rmse.reserve(static_cast<std::size_t>(opts.trials));

  std::vector<std::size_t> order(n);
  for (long trial = 0; trial < opts.trials; ++trial) {
    std::iota(order.begin(), order.end(), 0u);
    std::mt19937_64 rng(trial_seed(opts.seed, static_cast<std::uint64_t>(trial)));
    std::shuffle(order.begin(), order.end(), rng);

    const std::vector<std::size_t> train(order.begin(), order.begin() + n_train);
    const std::vector<std::size_t> val(order.begin() + n_train,
                                       order.begin() + n_train + n_val);
    const std::vector<std::size_t> test(order.begin() + n_train + n_val, order.end());

    const Eigen::MatrixXd x_train = feature_matrix(dataset, train);
    const Eigen::VectorXd d_train = distance_vector(dataset, train);
    const Eigen::MatrixXd x_test = feature_matrix(dataset, test);
    const Eigen::VectorXd d_test = distance_vector(dataset, test);

    Eigen::VectorXd estimates(x_test.rows());
    if (method == MLMethod::MLR) {
      Eigen::MatrixXd design(x_train.rows(), x_train.cols() + 1);
      design.col(0).setOnes();
      design.rightCols(x_train.cols()) = x_train;
      const LinearModel model = mlr_train(design, d_train);
      for (Eigen::Index i = 0; i < x_test.rows(); ++i)
        estimates[i] = mlr_predict(model, x_test.row(i).transpose());
    } else {
      NNRTrainConfig cfg = opts.nnr;
      cfg.seed = trial_seed(opts.seed, static_cast<std::uint64_t>(trial) ^ 0x5eedULL);
      NeuralModel model;
      if (!val.empty()) {
        const Eigen::MatrixXd x_val = feature_matrix(dataset, val);
        const Eigen::VectorXd d_val = distance_vector(dataset, val);
        model = nnr_train(x_train, d_train, cfg, &x_val, &d_val);
      } else {
        model = nnr_train(x_train, d_train, cfg);
      }
      for (Eigen::Index i = 0; i < x_test.rows(); ++i)
        estimates[i] = nnr_predict(model, x_test.row(i).transpose());
    }

    const double rho = rmse(estimates, d_test);
    report.per_trial_rmse.push_back(rho);
    rho_sum += rho;
    for (Eigen::Index i = 0; i < estimates.size(); ++i)
      per_distance.add(d_test[i], estimates[i]);
  }

  report.rmse = rho_sum / static_cast<double>(opts.trials);
  report.per_distance = per_distance.finish();
  return report;
}

EvaluationReport evaluate_data_analysis(const std::vector<FeatureRecord>& dataset,
                                        const CurveEstimatorParams& params,
                                        DataAnalysisMethod method, double sampling_rate) {
  if (sampling_rate <= 0.0) throw ConfigError("sampling rate must be > 0");
  EvaluationReport report;
  switch (method) {
    case DataAnalysisMethod::Power: report.method = "power"; break;
    case DataAnalysisMethod::PeakTime: report.method = "peaktime"; break;
    case DataAnalysisMethod::Combined: report.method = "combined"; break;
  }

  DistanceAccumulator per_distance;
  double sq_sum = 0.0;
  long included = 0;
  for (const FeatureRecord& rec : dataset) {
    try {
      const CurveRow& row = params.row_for(rec.features.emission_time);
      const auto n_r =
          static_cast<Eigen::Index>(std::llround(rec.features.t_peak * sampling_rate)) + 1;
      double estimate = 0.0;
      switch (method) {
        case DataAnalysisMethod::Power: {
          const double p_r = received_power(rec.features.received_energy, n_r);
          estimate = power_based_estimate(p_r, row.transmit_power, row.power_amplitude,
                                          row.power_rate);
          break;
        }
        case DataAnalysisMethod::PeakTime:
          estimate =
              peak_time_estimate(rec.features.t_peak, row.peaktime_amplitude, row.peaktime_rate);
          break;
        case DataAnalysisMethod::Combined: {
          const double p_r = received_power(rec.features.received_energy, n_r);
          estimate = combined_estimate(p_r, row.transmit_power, rec.features.t_peak,
                                       row.power_amplitude, row.power_rate,
                                       row.peaktime_amplitude, row.peaktime_rate);
          break;
        }
      }
      report.estimates.push_back({rec.trial_id, rec.distance, estimate});
      per_distance.add(rec.distance, estimate);
      sq_sum += (estimate - rec.distance) * (estimate - rec.distance);
      ++included;
    } catch (const Error&) {
      ++report.excluded;
    }
  }
  if (included == 0) throw InsufficientData("every trial was excluded");
  report.rmse = std::sqrt(sq_sum / static_cast<double>(included));
  report.per_distance = per_distance.finish();
  return report;
}

std::vector<VelocityRow> velocity_profile(const std::vector<FeatureRecord>& dataset) {
  std::map<std::pair<double, double>, std::pair<double, long>> groups;  // (d, Te) -> (sum, n)
  std::map<double, std::pair<double, long>> overall;                    // d -> (sum of means, n)
  for (const FeatureRecord& rec : dataset) {
    const double v = average_velocity(rec.distance, rec.features.t_peak);
    auto& g = groups[{rec.distance, rec.features.emission_time}];
    g.first += v;
    g.second += 1;
  }
  std::vector<VelocityRow> out;
  for (const auto& [key, acc] : groups) {
    VelocityRow row;
    row.distance = key.first;
    row.emission_time = key.second;
    row.count = acc.second;
    row.mean_velocity = acc.first / static_cast<double>(acc.second);
    out.push_back(row);
    auto& o = overall[key.first];
    o.first += row.mean_velocity;
    o.second += 1;
  }
  for (const auto& [distance, acc] : overall) {
    VelocityRow row;
    row.distance = distance;
    row.emission_time = -1.0;  // cross-T_e mean
    row.count = acc.second;
    row.mean_velocity = acc.first / static_cast<double>(acc.second);
    out.push_back(row);
  }
  return out;
}

}  // namespace mcdist
