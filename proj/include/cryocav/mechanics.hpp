#pragma once

#include "cryocav/timeseries.hpp"

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace cryocav {

/// Single-degree-of-freedom spring-mass-damper driven through its base.
struct OscillatorStage {
  double resonance_hz = 1.0;
  double damping_ratio = 0.0;
  std::string label;

  void validate() const;
};

/// Complex base-excitation response (1 + i 2 zeta r) / (1 - r^2 + i 2 zeta r),
/// r = f / f0.
std::complex<double> stage_response(const OscillatorStage& stage, double f_hz);

/// |stage_response|. Rolls off as f^-2 above f0 for zeta = 0 and as f^-1 once
/// 2 zeta r >> 1.
double transmissibility(const OscillatorStage& stage, double f_hz);

/// f0 = sqrt(n k / m) / (2 pi) for n identical springs carrying mass m.
OscillatorStage stage_from_spring(double spring_constant_n_per_m, int n_springs, double payload_kg,
                                  double damping_ratio, std::string label = "spring");

/// Exponentially decaying sinusoid re-excited at every kick.
struct KickMode {
  double frequency_hz;
  double amplitude_m;
  double decay_time_s;

  bool operator==(const KickMode&) const = default;
};

/// Continuous line (mains pickup and its harmonics).
struct Tone {
  double frequency_hz;
  double amplitude_m;

  bool operator==(const Tone&) const = default;
};

struct KickRecipe {
  double period_s = 1.0;
  std::vector<KickMode> modes;
  std::vector<Tone> tones;
  double broadband_floor = 0.0; // white displacement noise, m / sqrt(Hz)
  std::uint64_t seed = 1;

  void validate() const;
  double highest_frequency_hz() const;

  bool operator==(const KickRecipe&) const = default;
};

/// Cold-plate recipe calibrated to a ~2 nm rms, < 10 nm p-p cold plate.
KickRecipe default_cold_plate_recipe();

/// Kick onset times k * period inside [0, duration).
std::vector<double> kick_onsets(const KickRecipe& recipe, double duration_s);

/// Synthesizes a cold-plate displacement trace. Deterministic given the seed.
TimeSeries kick_train(const KickRecipe& recipe, double duration_s, double dt_s);

/// Base-excitation response of `stage` to the motion `input`, computed by
/// zero-padded FFT filtering. Undamped stages are rejected because their
/// ring-down never ends inside a finite buffer.
TimeSeries apply_stage(const TimeSeries& input, const OscillatorStage& stage);

/// Default passive chain: spring table and the two mirror stacks.
struct IsolationChain {
  OscillatorStage spring;
  OscillatorStage fiber_stack;
  OscillatorStage mirror_stack;
};

IsolationChain default_isolation_chain();

struct CavityNoise {
  TimeSeries table;  // spring-table motion
  TimeSeries length; // fiber-stack minus mirror-stack motion
  std::vector<std::string> warnings;
};

/// Propagates cold-plate motion through the spring table into both mirror
/// stacks and returns their differential motion (cavity length fluctuation).
CavityNoise cavity_noise(const TimeSeries& cold_plate, const OscillatorStage& spring_stage,
                         const OscillatorStage& fiber_stack, const OscillatorStage& mirror_stack);

} // namespace cryocav
