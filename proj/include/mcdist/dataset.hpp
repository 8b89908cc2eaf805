#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mcdist/channel.hpp"
#include "mcdist/errors.hpp"
#include "mcdist/evaluation.hpp"

namespace mcdist {

struct DesignDescriptor {
  std::vector<double> distances;       // cm
  std::vector<double> emission_times;  // s
  int replications = 0;
};

struct Dataset {
  std::vector<SampledSignal> trials;
  DesignDescriptor design;
};

// Full-factorial synthetic dataset over the distance/emission-time grid.
// The default Table-II-style grid (11 distances x 3 emission times x 10
// replications) yields 330 trials. Deterministic in the seed.
Dataset generate_design(const std::vector<double>& distances,
                        const std::vector<double>& emission_times, int replications,
                        const ChannelParams& channel, const SensorConfig& sensor,
                        ChannelModel model, std::uint64_t seed);

// Long-format signal rows: trial_id,sample_index,time_s,voltage_v
void save_signals_csv(const Dataset& dataset, const std::filesystem::path& path);
// trial_id,distance_cm,emission_time_s
void save_labels_csv(const Dataset& dataset, const std::filesystem::path& path);

// Joins signals to labels by trial_id and validates uniform sampling
// (tolerance 1e-9 s). Throws ParseError, MissingLabel, NonUniformSampling.
Dataset load_dataset(const std::filesystem::path& signals_path,
                     const std::filesystem::path& labels_path);

// trial_id,t_low_s,c_low_v,r_s,delta_c_v,g_v_per_s,t_peak_s,c_peak_v,e_r_v2,
// emission_time_s,distance_cm
void save_features_csv(const std::vector<FeatureRecord>& records,
                       const std::filesystem::path& path);
std::vector<FeatureRecord> load_features_csv(const std::filesystem::path& path);

// Curve parameter rows mirroring the power / peak-time tables:
// model_name,emission_time_s,a,b,rmse. Transmit power travels in the same
// file as model_name=transmit_power rows (a = P_T, b = rmse = 0).
struct CurveFitSummary {
  CurveEstimatorParams params;
  std::vector<double> power_rmse;     // aligned with params.rows
  std::vector<double> peaktime_rmse;  // aligned with params.rows
};
void save_curve_params_csv(const CurveFitSummary& fit, const std::filesystem::path& path);
CurveEstimatorParams load_curve_params_csv(const std::filesystem::path& path);

// trial_id,method,distance_cm,estimate_cm
void save_predictions_csv(const std::vector<EstimateRecord>& estimates,
                          const std::string& method, const std::filesystem::path& path);

// method,distance_cm,count,mean_cm,std_cm,mape_pct
void save_report_csv(const EvaluationReport& report, const std::filesystem::path& path);
// method,rmse_cm,trials,excluded,seed
void save_summary_csv(const EvaluationReport& report, const std::filesystem::path& path);
// distance_cm,emission_time_s,mean_velocity_cm_s,count  (emission_time_s = -1
// marks the cross-T_e mean row)
void save_velocity_csv(const std::vector<VelocityRow>& rows, const std::filesystem::path& path);

// Locale-independent full-precision numeric text (>= 17 significant digits).
std::string format_double(double value);

}  // namespace mcdist
