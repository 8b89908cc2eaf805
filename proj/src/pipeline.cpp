#include "mcdist/pipeline.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>

#include "mcdist/channel.hpp"
#include "mcdist/dataset.hpp"
#include "mcdist/estimators.hpp"
#include "mcdist/evaluation.hpp"
#include "mcdist/feature_extraction.hpp"
#include "mcdist/least_squares.hpp"
#include "mcdist/model_io.hpp"

namespace mcdist {

namespace {

const std::vector<std::string> kFeatureNames = {
    "t_low", "c_low", "r", "delta_c", "g", "t_peak", "c_peak", "e_r", "emission_time"};

ChannelModel parse_model(const std::string& name) {
  if (name == "diffusion") return ChannelModel::Diffusion;
  if (name == "flow") return ChannelModel::Flow;
  if (name == "advection") return ChannelModel::Advection;
  throw ConfigError("unknown channel model '" + name + "'");
}

// te=value pairs, e.g. --transmit-power 0.25=7.3598
std::map<double, double> parse_te_map(const std::vector<std::string>& entries) {
  std::map<double, double> out;
  for (const std::string& e : entries) {
    const auto eq = e.find('=');
    if (eq == std::string::npos) throw ConfigError("expected te=value, got '" + e + "'");
    out[std::stod(e.substr(0, eq))] = std::stod(e.substr(eq + 1));
  }
  return out;
}

std::vector<FeatureRecord> extract_all(const Dataset& dataset, const ExtractionConfig& cfg,
                                       std::vector<std::pair<std::string, std::string>>* excluded) {
  std::vector<FeatureRecord> records;
  for (const SampledSignal& sig : dataset.trials) {
    try {
      FeatureRecord rec;
      rec.trial_id = sig.trial_id;
      rec.features = extract_features(sig, cfg, sig.emission_time);
      rec.distance = sig.distance;
      records.push_back(std::move(rec));
    } catch (const Error& err) {
      if (excluded) excluded->emplace_back(sig.trial_id, err.error_class());
    }
  }
  return records;
}

struct GroupedAverages {
  // emission time -> distance -> mean value
  std::map<double, std::map<double, double>> power_ratio;
  std::map<double, std::map<double, double>> peak_time;
};

GroupedAverages group_averages(const std::vector<FeatureRecord>& records,
                               const std::map<double, double>& transmit_power,
                               double sampling_rate) {
  struct Cell {
    double power_sum = 0.0, peak_sum = 0.0;
    long count = 0;
  };
  std::map<std::pair<double, double>, Cell> acc;
  for (const FeatureRecord& rec : records) {
    const auto n_r =
        static_cast<Eigen::Index>(std::llround(rec.features.t_peak * sampling_rate)) + 1;
    const double p_r = received_power(rec.features.received_energy, n_r);
    Cell& cell = acc[{rec.features.emission_time, rec.distance}];
    cell.power_sum += p_r;
    cell.peak_sum += rec.features.t_peak;
    cell.count += 1;
  }
  GroupedAverages out;
  for (const auto& [key, cell] : acc) {
    const auto& [te, d] = key;
    const auto pt = transmit_power.find(te);
    if (pt == transmit_power.end())
      throw UnknownEmissionTime("no transmitted power configured for T_e = " +
                                std::to_string(te));
    const double n = static_cast<double>(cell.count);
    out.power_ratio[te][d] = cell.power_sum / n / pt->second;
    out.peak_time[te][d] = cell.peak_sum / n;
  }
  return out;
}

double measured_transmit_power(const SampledSignal& sig, int offset_samples) {
  // Offset from the trailing samples: the transmitted pulse occupies the
  // start of the record.
  const Eigen::Index p = std::min<Eigen::Index>(offset_samples, sig.size());
  const double offset = sig.samples.tail(p).mean();
  const auto window =
      std::min<Eigen::Index>(sig.size(),
                             static_cast<Eigen::Index>(std::llround(sig.emission_time /
                                                                    sig.dt)) + 1);
  return (sig.samples.head(window).array() - offset).square().mean();
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"macroscale molecular-communication distance estimation toolkit"};
  app.require_subcommand(1);
  app.set_config("--config")->envname("MCDIST_CONFIG");

  // ----- simulate ---------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "generate a synthetic labeled dataset");
  std::string sim_signals = "signals.csv", sim_labels = "labels.csv", sim_model = "flow";
  std::vector<double> sim_distances = {100, 110, 120, 130, 140, 150, 160, 170, 180, 190, 200};
  std::vector<double> sim_tes = {0.25, 0.5, 0.75};
  int sim_reps = 10;
  std::uint64_t sim_seed = 0;
  ChannelParams channel;
  SensorConfig sensor;
  sim->add_option("--signals", sim_signals, "output signals CSV");
  sim->add_option("--labels", sim_labels, "output labels CSV");
  sim->add_option("--channel-model", sim_model, "diffusion|flow|advection");
  sim->add_option("--distances", sim_distances, "distance grid (cm)");
  sim->add_option("--emission-times", sim_tes, "emission time grid (s)");
  sim->add_option("--replications", sim_reps, "replications per grid cell");
  sim->add_option("--seed", sim_seed, "master seed");
  sim->add_option("--released-quantity", channel.released_quantity, "Q");
  sim->add_option("--diffusion-coeff", channel.diffusion_coeff, "D (cm^2/s)");
  sim->add_option("--flow-velocity", channel.flow_velocity, "v (cm/s)");
  sim->add_option("--released-mass", channel.released_mass, "m_t (advection model)");
  sim->add_option("--sampling-rate", sensor.sampling_rate, "Hz");
  sim->add_option("--record-duration", sensor.record_duration, "s");
  sim->add_option("--offset-level", sensor.offset_level, "true sensor offset (V)");
  sim->add_option("--noise-std", sensor.noise_std, "additive Gaussian noise sigma (V)");
  sim->add_option("--gain", sensor.gain, "V per concentration unit");
  sim->add_option("--quantizer-bits", sensor.quantizer_bits, "0 disables the ADC model");
  sim->add_option("--full-scale-lo", sensor.full_scale_lo, "ADC range low (V)");
  sim->add_option("--full-scale-hi", sensor.full_scale_hi, "ADC range high (V)");

  // ----- extract ----------------------------------------------------------
  auto* ext = app.add_subcommand("extract", "extract features from a signals/labels pair");
  std::string ext_signals = "signals.csv", ext_labels = "labels.csv";
  std::string ext_features = "features.csv", ext_exclusions = "exclusions.csv";
  ExtractionConfig extraction;
  ext->add_option("--signals", ext_signals, "input signals CSV");
  ext->add_option("--labels", ext_labels, "input labels CSV");
  ext->add_option("--features", ext_features, "output features CSV");
  ext->add_option("--exclusions", ext_exclusions, "output exclusion log CSV");
  ext->add_option("--offset-samples", extraction.offset_samples, "p");
  ext->add_option("--threshold-margin", extraction.threshold_margin, "A_thr (V)");
  ext->add_option("--window-before", extraction.window_before, "W1");
  ext->add_option("--window-after", extraction.window_after, "W2");

  // ----- fit-curves -------------------------------------------------------
  auto* fit = app.add_subcommand("fit-curves", "fit the power and peak-time curves per T_e");
  std::string fit_features = "features.csv", fit_params = "curve_params.csv";
  std::vector<std::string> fit_pt_entries;
  std::string fit_tx_signals, fit_tx_labels;
  double fit_rate = 10.0;
  std::vector<double> power_init = {1.0, -0.01}, peak_init = {1.0, 0.01};
  int fit_offset_samples = 5;
  fit->add_option("--features", fit_features, "input features CSV");
  fit->add_option("--params", fit_params, "output curve parameters CSV");
  fit->add_option("--transmit-power", fit_pt_entries,
                  "mean transmitted power per emission time, te=value");
  fit->add_option("--tx-signals", fit_tx_signals,
                  "measured transmitted-signal CSV (alternative to --transmit-power)");
  fit->add_option("--tx-labels", fit_tx_labels, "labels CSV for --tx-signals");
  fit->add_option("--sampling-rate", fit_rate, "Hz, used to recover N_R from t_peak");
  fit->add_option("--power-init", power_init, "initial (a,b) for the power fit")
      ->expected(2);
  fit->add_option("--peaktime-init", peak_init, "initial (a,b) for the peak-time fit")
      ->expected(2);
  fit->add_option("--offset-samples", fit_offset_samples,
                  "offset window for measured TX power");

  // ----- train ------------------------------------------------------------
  auto* train = app.add_subcommand("train", "train an MLR or NNR model on features");
  std::string train_features = "features.csv", train_method = "mlr", train_out = "model.txt";
  std::string train_activation = "tanh";
  int train_hidden = 1;
  std::uint64_t train_seed = 0;
  train->add_option("--features", train_features, "input features CSV");
  train->add_option("--method", train_method, "mlr|nnr");
  train->add_option("--model-out", train_out, "output model file");
  train->add_option("--hidden", train_hidden, "NNR hidden nodes");
  train->add_option("--seed", train_seed, "NNR weight-init seed");
  train->add_option("--output-activation", train_activation, "NNR output: tanh|linear");

  // ----- estimate ---------------------------------------------------------
  auto* est = app.add_subcommand("estimate", "estimate distances for every feature row");
  std::string est_features = "features.csv", est_method = "peaktime";
  std::string est_model, est_params = "curve_params.csv", est_out = "predictions.csv";
  double est_rate = 10.0;
  est->add_option("--features", est_features, "input features CSV");
  est->add_option("--method", est_method, "mlr|nnr|power|peaktime|combined");
  est->add_option("--model", est_model, "model file (mlr/nnr methods)");
  est->add_option("--params", est_params, "curve parameters CSV (data-analysis methods)");
  est->add_option("--predictions", est_out, "output predictions CSV");
  est->add_option("--sampling-rate", est_rate, "Hz, used to recover N_R from t_peak");

  // ----- evaluate ---------------------------------------------------------
  auto* eval = app.add_subcommand("evaluate", "evaluate an estimation method");
  std::string eval_features = "features.csv", eval_method = "mlr";
  std::string eval_params = "curve_params.csv";
  std::string eval_report = "report.csv", eval_summary = "summary.csv";
  long eval_trials = 1000;
  std::uint64_t eval_seed = 0;
  int eval_hidden = 1, eval_patience = 6;
  double eval_rate = 10.0;
  eval->add_option("--features", eval_features, "input features CSV");
  eval->add_option("--method", eval_method, "mlr|nnr|power|peaktime|combined");
  eval->add_option("--params", eval_params, "curve parameters CSV (data-analysis methods)");
  eval->add_option("--report", eval_report, "output per-distance report CSV");
  eval->add_option("--summary", eval_summary, "output summary CSV");
  eval->add_option("--trials", eval_trials, "Monte-Carlo trials (ML methods)");
  eval->add_option("--seed", eval_seed, "Monte-Carlo seed");
  eval->add_option("--hidden", eval_hidden, "NNR hidden nodes");
  eval->add_option("--patience", eval_patience, "NNR early-stopping patience");
  eval->add_option("--sampling-rate", eval_rate, "Hz, used to recover N_R from t_peak");

  // ----- velocity-profile -------------------------------------------------
  auto* vel = app.add_subcommand("velocity-profile", "per-distance mean molecule velocity");
  std::string vel_features = "features.csv", vel_out = "velocity_profile.csv";
  vel->add_option("--features", vel_features, "input features CSV");
  vel->add_option("--out", vel_out, "output velocity CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) {
      const Dataset dataset = generate_design(sim_distances, sim_tes, sim_reps, channel, sensor,
                                              parse_model(sim_model), sim_seed);
      save_signals_csv(dataset, sim_signals);
      save_labels_csv(dataset, sim_labels);
      std::cout << "wrote " << dataset.trials.size() << " trials to " << sim_signals << " / "
                << sim_labels << '\n';
    } else if (ext->parsed()) {
      const Dataset dataset = load_dataset(ext_signals, ext_labels);
      std::vector<std::pair<std::string, std::string>> excluded;
      const std::vector<FeatureRecord> records = extract_all(dataset, extraction, &excluded);
      save_features_csv(records, ext_features);
      std::ofstream log(ext_exclusions);
      if (!log) throw ConfigError("cannot write " + ext_exclusions);
      log << "trial_id,error_class\n";
      for (const auto& [id, cls] : excluded) log << id << ',' << cls << '\n';
      std::cout << "extracted " << records.size() << " trials, excluded " << excluded.size()
                << '\n';
    } else if (fit->parsed()) {
      const std::vector<FeatureRecord> records = load_features_csv(fit_features);
      std::map<double, double> transmit_power =
          parse_te_map(fit_pt_entries.empty() && fit_tx_signals.empty()
                           ? std::vector<std::string>{"0.25=7.3598", "0.5=9.3666",
                                                      "0.75=11.0108"}
                           : fit_pt_entries);
      if (!fit_tx_signals.empty()) {
        const Dataset tx = load_dataset(fit_tx_signals, fit_tx_labels);
        std::map<double, std::pair<double, long>> acc;
        for (const SampledSignal& sig : tx.trials) {
          auto& cell = acc[sig.emission_time];
          cell.first += measured_transmit_power(sig, fit_offset_samples);
          cell.second += 1;
        }
        for (const auto& [te, cell] : acc)
          transmit_power[te] = cell.first / static_cast<double>(cell.second);
      }
      const GroupedAverages averages = group_averages(records, transmit_power, fit_rate);

      CurveFitSummary summary;
      LMOptions opts;
      opts.max_iters = 500;
      for (const auto& [te, by_distance] : averages.power_ratio) {
        std::vector<std::pair<double, double>> power_points(by_distance.begin(),
                                                            by_distance.end());
        std::vector<std::pair<double, double>> peak_points(averages.peak_time.at(te).begin(),
                                                           averages.peak_time.at(te).end());
        const ExpCurveParams power =
            fit_exponential(power_points, {power_init[0], power_init[1]}, opts, false);
        const ExpCurveParams peak =
            fit_exponential(peak_points, {peak_init[0], peak_init[1]}, opts, true);
        CurveRow row;
        row.emission_time = te;
        row.power_amplitude = power.amplitude;
        row.power_rate = power.rate;
        row.peaktime_amplitude = peak.amplitude;
        row.peaktime_rate = peak.rate;
        row.transmit_power = transmit_power.at(te);
        summary.params.rows.push_back(row);
        summary.power_rmse.push_back(power.rmse_of_fit);
        summary.peaktime_rmse.push_back(peak.rmse_of_fit);
      }
      save_curve_params_csv(summary, fit_params);
      std::cout << "fitted curves for " << summary.params.rows.size() << " emission times\n";
    } else if (train->parsed()) {
      const std::vector<FeatureRecord> records = load_features_csv(train_features);
      if (records.empty()) throw InsufficientData("no feature rows to train on");
      Eigen::MatrixXd x(static_cast<Eigen::Index>(records.size()), 9);
      Eigen::VectorXd d(static_cast<Eigen::Index>(records.size()));
      for (std::size_t i = 0; i < records.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) = records[i].features.as_vector().transpose();
        d[static_cast<Eigen::Index>(i)] = records[i].distance;
      }
      if (train_method == "mlr") {
        Eigen::MatrixXd design(x.rows(), x.cols() + 1);
        design.col(0).setOnes();
        design.rightCols(x.cols()) = x;
        save_model(mlr_train(design, d, kFeatureNames), train_out);
      } else if (train_method == "nnr") {
        NNRTrainConfig cfg;
        cfg.hidden_nodes = train_hidden;
        cfg.seed = train_seed;
        cfg.output_activation =
            train_activation == "linear" ? OutputActivation::Linear : OutputActivation::Tanh;
        save_model(nnr_train(x, d, cfg), train_out);
      } else {
        throw ConfigError("train supports methods mlr|nnr");
      }
      std::cout << "wrote model to " << train_out << '\n';
    } else if (est->parsed()) {
      const std::vector<FeatureRecord> records = load_features_csv(est_features);
      std::vector<EstimateRecord> predictions;
      if (est_method == "mlr" || est_method == "nnr") {
        if (est_model.empty()) throw ConfigError("--model is required for ML methods");
        const AnyModel model = load_model(est_model);
        for (const FeatureRecord& rec : records) {
          const Eigen::VectorXd x = rec.features.as_vector();
          const double estimate =
              std::holds_alternative<LinearModel>(model)
                  ? mlr_predict(std::get<LinearModel>(model), x)
                  : nnr_predict(std::get<NeuralModel>(model), x);
          predictions.push_back({rec.trial_id, rec.distance, estimate});
        }
      } else {
        const CurveEstimatorParams params = load_curve_params_csv(est_params);
        DataAnalysisMethod method;
        if (est_method == "power")
          method = DataAnalysisMethod::Power;
        else if (est_method == "peaktime")
          method = DataAnalysisMethod::PeakTime;
        else if (est_method == "combined")
          method = DataAnalysisMethod::Combined;
        else
          throw ConfigError("unknown estimate method '" + est_method + "'");
        const EvaluationReport report =
            evaluate_data_analysis(records, params, method, est_rate);
        predictions = report.estimates;
        if (report.excluded > 0)
          std::cerr << "excluded " << report.excluded << " trials\n";
      }
      save_predictions_csv(predictions, est_method, est_out);
      std::cout << "wrote " << predictions.size() << " predictions to " << est_out << '\n';
    } else if (eval->parsed()) {
      const std::vector<FeatureRecord> records = load_features_csv(eval_features);
      EvaluationReport report;
      if (eval_method == "mlr" || eval_method == "nnr") {
        MonteCarloOptions opts;
        opts.trials = eval_trials;
        opts.seed = eval_seed;
        opts.nnr.hidden_nodes = eval_hidden;
        opts.nnr.validation_patience = eval_patience;
        if (eval_method == "nnr") opts.split = {0.7, 0.15, 0.15};
        report = monte_carlo_evaluate(
            records, eval_method == "mlr" ? MLMethod::MLR : MLMethod::NNR, opts);
      } else {
        const CurveEstimatorParams params = load_curve_params_csv(eval_params);
        DataAnalysisMethod method;
        if (eval_method == "power")
          method = DataAnalysisMethod::Power;
        else if (eval_method == "peaktime")
          method = DataAnalysisMethod::PeakTime;
        else if (eval_method == "combined")
          method = DataAnalysisMethod::Combined;
        else
          throw ConfigError("unknown evaluate method '" + eval_method + "'");
        report = evaluate_data_analysis(records, params, method, eval_rate);
      }
      save_report_csv(report, eval_report);
      save_summary_csv(report, eval_summary);
      std::cout << eval_method << " rmse " << report.rmse << " cm\n";
    } else if (vel->parsed()) {
      const std::vector<FeatureRecord> records = load_features_csv(vel_features);
      save_velocity_csv(velocity_profile(records), vel_out);
      std::cout << "wrote velocity profile to " << vel_out << '\n';
    }
  } catch (const Error& err) {
    std::cerr << err.error_class() << ": " << err.what() << std::endl;
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "Error: " << err.what() << std::endl;
    return 1;
  }
  return 0;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace mcdist
