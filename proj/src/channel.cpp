#include "mcdist/channel.hpp"

#include <cmath>
#include <random>

namespace mcdist {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

void ChannelParams::validate() const {
  if (released_quantity < 0.0) throw ConfigError("released quantity Q must be >= 0");
  if (diffusion_coeff <= 0.0) throw ConfigError("diffusion coefficient D must be > 0");
  if ((anisotropic_diffusion.array() <= 0.0).any())
    throw ConfigError("anisotropic diffusion coefficients must be > 0");
  if (released_mass < 0.0) throw ConfigError("released mass m_t must be >= 0");
}

void SensorConfig::validate() const {
  if (sampling_rate <= 0.0) throw ConfigError("sampling rate must be > 0");
  if (record_duration <= 0.0) throw ConfigError("record duration must be > 0");
  if (noise_std < 0.0) throw ConfigError("noise std must be >= 0");
  if (quantizer_bits < 0 || quantizer_bits > 16)
    throw ConfigError("quantizer bits must be in {0, 1..16}");
  if (quantizer_bits > 0 && full_scale_hi <= full_scale_lo)
    throw ConfigError("quantizer full scale must be a nonempty range");
}

double diffusion_concentration(double quantity, double diffusion, double distance, double t) {
  if (t <= 0.0) throw DomainError("diffusion_concentration requires t > 0");
  if (diffusion <= 0.0) throw DomainError("diffusion_concentration requires D > 0");
  if (distance < 0.0) throw DomainError("diffusion_concentration requires d >= 0");
  const double denom = std::pow(4.0 * kPi * diffusion * t, 1.5);
  return quantity / denom * std::exp(-distance * distance / (4.0 * diffusion * t));
}

double diffusion_flow_concentration(double quantity, double diffusion, double distance,
                                    double flow, double t) {
  if (t <= 0.0) throw DomainError("diffusion_flow_concentration requires t > 0");
  if (diffusion <= 0.0) throw DomainError("diffusion_flow_concentration requires D > 0");
  if (distance <= 0.0) throw DomainError("diffusion_flow_concentration requires d > 0");
  const double drift = flow * t - distance;
  return quantity * distance / std::sqrt(4.0 * kPi * diffusion * t * t * t) *
         std::exp(-drift * drift / (4.0 * diffusion * t));
}

double advection_concentration(const ChannelParams& params, const Eigen::Vector3d& point,
                               double t) {
  if (t <= 0.0) throw DomainError("advection_concentration requires t > 0");
  const Eigen::Vector3d& diff = params.anisotropic_diffusion;
  if ((diff.array() <= 0.0).any())
    throw DomainError("advection_concentration requires positive diffusion coefficients");
  const Eigen::Vector3d center = params.source_point + params.flow_vector * t;
  const Eigen::Array3d delta = (point - center).array();
  const double exponent = -(delta.square() / (4.0 * diff.array() * t)).sum();
  const double denom = std::pow(4.0 * kPi * t, 1.5) * std::sqrt(diff.prod());
  return params.released_mass / denom * std::exp(exponent);
}

double reynolds_number(double liquid_velocity, double air_velocity, double droplet_radius,
                       double kinematic_viscosity) {
  if (kinematic_viscosity <= 0.0) throw DomainError("reynolds_number requires nu_a > 0");
  if (droplet_radius <= 0.0) throw DomainError("reynolds_number requires a > 0");
  return 2.0 * std::abs(liquid_velocity - air_velocity) * droplet_radius / kinematic_viscosity;
}

namespace {

double model_concentration(const ChannelParams& ch, ChannelModel model, double te_scale,
                           double distance, double t) {
  if (t <= 0.0) return 0.0;  // instantaneous release at t = 0, nothing before
  switch (model) {
    case ChannelModel::Diffusion:
      return diffusion_concentration(ch.released_quantity * te_scale, ch.diffusion_coeff,
                                     distance, t);
    case ChannelModel::Flow:
      return diffusion_flow_concentration(ch.released_quantity * te_scale, ch.diffusion_coeff,
                                          distance, ch.flow_velocity, t);
    case ChannelModel::Advection: {
      ChannelParams scaled = ch;
      scaled.released_mass *= te_scale;
      const Eigen::Vector3d point = ch.source_point + Eigen::Vector3d(distance, 0.0, 0.0);
      return advection_concentration(scaled, point, t);
    }
  }
  return 0.0;
}

double quantize(double x, const SensorConfig& s) {
  const double levels = static_cast<double>((1u << s.quantizer_bits) - 1u);
  const double step = (s.full_scale_hi - s.full_scale_lo) / levels;
  double k = std::round((x - s.full_scale_lo) / step);
  k = std::min(std::max(k, 0.0), levels);
  return s.full_scale_lo + k * step;
}

}  // namespace

SampledSignal simulate_received_signal(const ChannelParams& channel, const SensorConfig& sensor,
                                       ChannelModel model, double distance, double emission_time,
                                       std::uint64_t seed) {
  channel.validate();
  sensor.validate();
  if (distance <= 0.0) throw ConfigError("simulate_received_signal requires d > 0");
  if (emission_time <= 0.0) throw ConfigError("simulate_received_signal requires T_e > 0");

  const double dt = 1.0 / sensor.sampling_rate;
  const auto count = static_cast<Eigen::Index>(std::floor(sensor.record_duration / dt)) + 1;

  SampledSignal sig;
  sig.dt = dt;
  sig.t0 = 0.0;
  sig.emission_time = emission_time;
  sig.distance = distance;
  sig.samples.resize(count);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sensor.noise_std > 0.0 ? sensor.noise_std : 1.0);

  for (Eigen::Index n = 0; n < count; ++n) {
    const double t = sig.time_at(n);
    double v = sensor.offset_level +
               sensor.gain * model_concentration(channel, model, emission_time, distance, t);
    if (sensor.noise_std > 0.0) v += noise(rng);
    if (sensor.quantizer_bits > 0) v = quantize(v, sensor);
    sig.samples[n] = v;
  }
  return sig;
}

}  // namespace mcdist
