#include "mcdist/feature_extraction.hpp"

#include <algorithm>
#include <cmath>

namespace mcdist {

double estimate_offset(const SampledSignal& sig, int p) {
  if (p < 1) throw ConfigError("estimate_offset requires p >= 1");
  if (sig.size() < p) throw InsufficientData("signal shorter than the offset window p");
  return sig.samples.head(p).mean();
}

SampledSignal smooth(const SampledSignal& sig, int window_before, int window_after) {
  const Eigen::Index n = sig.size();
  if (window_before + window_after + 1 > n)
    throw InsufficientData("moving average window exceeds signal length");
  SampledSignal out = sig;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - window_before);
    const Eigen::Index hi = std::min(n - 1, i + window_after);
    out.samples[i] = sig.samples.segment(lo, hi - lo + 1).mean();
  }
  return out;
}

bool detect(const SampledSignal& sig, double threshold) {
  return (sig.samples.array() > threshold).any();
}

Eigen::Index find_first_peak(const SampledSignal& sig) {
  const Eigen::Index n = sig.size();
  if (n < 3) throw NoPeak("signal too short to contain a peak");
  int prev_sign = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double diff = sig.samples[i] - sig.samples[i - 1];
    if (diff < 0.0) {
      if (prev_sign > 0) return i - 1;  // last sample before the drop
      prev_sign = -1;
    } else if (diff > 0.0) {
      prev_sign = 1;
    }
    // zero differences keep prev_sign
  }
  throw NoPeak("first difference never changes sign from positive to negative");
}

Eigen::Index find_preceding_local_min(const SampledSignal& sig, Eigen::Index peak_index) {
  if (peak_index < 0 || peak_index >= sig.size())
    throw DimensionMismatch("peak index out of range");
  // Invert and reverse the prefix, then reuse the peak finder so the scan
  // walks backward from the peak.
  SampledSignal prefix;
  prefix.dt = sig.dt;
  prefix.samples = -sig.samples.head(peak_index + 1).reverse();
  try {
    const Eigen::Index rev = find_first_peak(prefix);
    return peak_index - rev;
  } catch (const NoPeak&) {
    return 0;  // monotone rise: fall back to the first sample
  }
}

ReferencePoints reference_points(const SampledSignal& sig, Eigen::Index min_index,
                                 Eigen::Index peak_index) {
  if (min_index >= peak_index)
    throw DimensionMismatch("reference_points requires min_index < peak_index");
  const auto gap = static_cast<double>(peak_index - min_index);
  if (peak_index - min_index < 2)
    throw DegenerateEdge("rising edge too short for 10%/90% reference points");
  const auto round_half_up = [](double x) {
    return static_cast<Eigen::Index>(std::floor(x + 0.5));
  };
  const Eigen::Index low = min_index + round_half_up(0.1 * gap);
  const Eigen::Index high = min_index + round_half_up(0.9 * gap);
  if (low == high) throw DegenerateEdge("10% and 90% reference indices coincide");
  return {sig.time_at(low), sig.samples[low], sig.time_at(high), sig.samples[high]};
}

double received_energy(const SampledSignal& sig, double offset, Eigen::Index n_r) {
  if (n_r > sig.size()) throw InsufficientData("N_R exceeds signal length");
  if (n_r < 0) throw DimensionMismatch("N_R must be nonnegative");
  return (sig.samples.head(n_r).array() - offset).square().sum();
}

FeatureVector extract_features(const SampledSignal& sig, const ExtractionConfig& cfg,
                               double emission_time) {
  cfg.validate();
  const double offset = estimate_offset(sig, cfg.offset_samples);
  const double threshold = detection_threshold(offset, cfg.threshold_margin);
  const SampledSignal smoothed = smooth(sig, cfg.window_before, cfg.window_after);
  if (!detect(smoothed, threshold)) throw NoDetection("no sample above the detection threshold");

  const Eigen::Index peak = find_first_peak(smoothed);
  const Eigen::Index min_index = find_preceding_local_min(smoothed, peak);
  const ReferencePoints ref = reference_points(smoothed, min_index, peak);

  FeatureVector f;
  f.t_low = ref.t_low;
  f.c_low = ref.c_low;
  f.rise_time = ref.t_high - ref.t_low;
  f.delta_c = ref.c_high - ref.c_low;
  f.gradient = f.delta_c / f.rise_time;
  f.t_peak = smoothed.time_at(peak);
  f.c_peak = smoothed.samples[peak];
  f.peak_index = peak;
  f.sample_count_to_peak = peak + 1;
  f.received_energy = received_energy(smoothed, offset, f.sample_count_to_peak);
  f.emission_time = emission_time;
  return f;
}

}  // namespace mcdist
