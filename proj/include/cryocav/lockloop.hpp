#pragma once

#include "cryocav/fabry_perot.hpp"
#include "cryocav/timeseries.hpp"

#include <complex>
#include <cstdint>
#include <optional>

namespace cryocav {

struct NotchFilter {
  double frequency_hz = 50.0;
  double quality = 10.0;

  bool operator==(const NotchFilter&) const = default;
};

/// Side-of-fringe servo: PI on the linearized transmission error, optional
/// notch, first-order actuator lag. The defaults put the unity-gain frequency
/// near 50 Hz with ~90 degrees of phase margin.
struct LockConfig {
  double kp = 0.1;
  double ki = 312.6; // 1/s
  double actuator_cutoff_hz = 500.0;
  std::optional<NotchFilter> notch;
  double sensor_noise_rms = 1e-4; // normalized transmission
  LockSide side = LockSide::BelowResonance;
  double sample_rate_hz = 1e5;

  void validate() const;
  double anti_windup_limit_m(const CavityGeometry& geom) const { return geom.wavelength_m / 8.0; }
};

/// PI x actuator lag x notch, in meters of actuation per meter of error.
std::complex<double> controller_response(const LockConfig& config, double f_hz);

/// Controller response including the one-sample loop delay. The sensor is
/// normalized by the lock slope, so this is the full loop gain.
std::complex<double> open_loop_gain(const LockConfig& config, double f_hz);

/// Closed-loop disturbance rejection 1 / (1 + L(f)).
std::complex<double> loop_sensitivity(const LockConfig& config, double f_hz);

/// Lowest frequency at which |L| falls through 1.
double unity_gain_frequency(const LockConfig& config);

/// 180 deg + arg L at the unity-gain frequency, in degrees.
double phase_margin_deg(const LockConfig& config);

struct LockResult {
  TimeSeries residual; // cavity length seen by the sensor
  TimeSeries actuator; // piezo correction
  LockPoint lock_point;
};

/// Runs the servo sample by sample against a cavity-length disturbance.
/// Throws InstabilityError when the residual leaves +-FSR/4.
LockResult simulate_lock(const TimeSeries& disturbance, const CavityGeometry& geom, const LockConfig& config,
                         std::uint64_t seed);

} // namespace cryocav
