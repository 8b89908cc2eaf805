#pragma once

#include <Eigen/Dense>

#include "mcdist/channel.hpp"
#include "mcdist/errors.hpp"

namespace mcdist {

struct ExtractionConfig {
  int offset_samples = 5;       // p
  double threshold_margin = 0.1;  // A_thr, V
  int window_before = 3;        // W1
  int window_after = 3;         // W2

  void validate() const {
    if (offset_samples < 1) throw ConfigError("offset sample count p must be >= 1");
    if (threshold_margin <= 0.0) throw ConfigError("threshold margin A_thr must be > 0");
    if (window_before < 0 || window_after < 0)
      throw ConfigError("moving average windows must be >= 0");
  }
};

// The nine estimator inputs extracted from one trial.
struct FeatureVector {
  double t_low = 0.0;            // s
  double c_low = 0.0;            // V
  double rise_time = 0.0;        // R, s
  double delta_c = 0.0;          // V
  double gradient = 0.0;         // G = delta_c / rise_time, V/s
  double t_peak = 0.0;           // s
  double c_peak = 0.0;           // V
  double received_energy = 0.0;  // E_R, V^2 * samples
  double emission_time = 0.0;    // T_e, s

  // bookkeeping, not part of the serialized feature set
  Eigen::Index peak_index = 0;
  Eigen::Index sample_count_to_peak = 0;  // N_R

  Eigen::Matrix<double, 9, 1> as_vector() const {
    Eigen::Matrix<double, 9, 1> v;
    v << t_low, c_low, rise_time, delta_c, gradient, t_peak, c_peak, received_energy,
        emission_time;
    return v;
  }
};

// Mean of the first p raw samples.
double estimate_offset(const SampledSignal& sig, int p);

inline double detection_threshold(double offset, double margin) { return offset + margin; }

// Moving average with a truncated (shrinking) window at the boundaries.
SampledSignal smooth(const SampledSignal& sig, int window_before, int window_after);

// True iff any sample is strictly above the threshold.
bool detect(const SampledSignal& sig, double threshold);

// Index where the first difference changes sign from positive to negative.
// Zero differences carry the previous sign, so a plateau peak resolves to the
// last plateau sample. Throws NoPeak if the signal never turns down.
Eigen::Index find_first_peak(const SampledSignal& sig);

// Nearest local minimum at or before peak_index; 0 when the prefix is monotone.
Eigen::Index find_preceding_local_min(const SampledSignal& sig, Eigen::Index peak_index);

struct ReferencePoints {
  double t_low, c_low, t_high, c_high;
};

// 10% / 90% time-index reference points between the local minimum and the
// peak, using round-half-up on the fractional indices.
ReferencePoints reference_points(const SampledSignal& sig, Eigen::Index min_index,
                                 Eigen::Index peak_index);

// Sum of squared offset-removed samples over the first n_r samples.
double received_energy(const SampledSignal& sig, double offset, Eigen::Index n_r);

// The full extraction pipeline. Throws NoDetection, NoPeak or DegenerateEdge.
FeatureVector extract_features(const SampledSignal& sig, const ExtractionConfig& cfg,
                               double emission_time);

}  // namespace mcdist
