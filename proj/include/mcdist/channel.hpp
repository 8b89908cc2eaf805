#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "mcdist/errors.hpp"

namespace mcdist {

// Uniformly sampled concentration-proxy time series (volts vs. seconds).
struct SampledSignal {
  Eigen::VectorXd samples;      // V
  double dt = 0.1;              // s
  double t0 = 0.0;              // s, time of first sample
  std::string trial_id;
  double emission_time = 0.0;   // s
  double distance = -1.0;       // cm; negative = unlabeled

  double time_at(Eigen::Index n) const { return t0 + static_cast<double>(n) * dt; }
  Eigen::Index size() const { return samples.size(); }
};

struct ChannelParams {
  double released_quantity = 1.0;        // Q, molecule count
  double diffusion_coeff = 0.1149980886; // D, cm^2/s
  double flow_velocity = 23.53;          // v, cm/s
  Eigen::Vector3d anisotropic_diffusion{0.1149980886, 0.1149980886, 0.1149980886}; // cm^2/s
  Eigen::Vector3d flow_vector{23.53, 0.0, 0.0};  // cm/s
  Eigen::Vector3d source_point{0.0, 0.0, 0.0};   // cm
  double released_mass = 1.0;            // m_t

  void validate() const;
};

struct SensorConfig {
  double sampling_rate = 10.0;    // Hz
  double record_duration = 100.0; // s
  double offset_level = 0.5;      // V, true A_o
  double noise_std = 0.0;         // V
  double gain = 0.5;              // V per concentration unit
  int quantizer_bits = 0;         // 0 disables quantization
  double full_scale_lo = 0.0;     // V
  double full_scale_hi = 5.0;     // V

  void validate() const;
};

enum class ChannelModel { Diffusion, Flow, Advection };

// C(t) = Q / (4 pi D t)^{3/2} * exp(-d^2 / (4 D t))
double diffusion_concentration(double quantity, double diffusion, double distance, double t);

// C(t) = Q d / sqrt(4 pi D t^3) * exp(-(v t - d)^2 / (4 D t))
double diffusion_flow_concentration(double quantity, double diffusion, double distance,
                                    double flow, double t);

// Triple-Gaussian product solution of the advection-diffusion equation.
double advection_concentration(const ChannelParams& params, const Eigen::Vector3d& point,
                               double t);

// Re = 2 |V_l - V_a| a / nu_a
double reynolds_number(double liquid_velocity, double air_velocity, double droplet_radius,
                       double kinematic_viscosity);

// Synthesizes one received trial: offset + gain * C(t_n) + Gaussian noise,
// optionally quantized. The emission time scales the effective released
// quantity linearly. Deterministic for a fixed seed.
SampledSignal simulate_received_signal(const ChannelParams& channel, const SensorConfig& sensor,
                                       ChannelModel model, double distance, double emission_time,
                                       std::uint64_t seed);

}  // namespace mcdist
