#pragma once

#include "cryocav/fabry_perot.hpp"
#include "cryocav/lockloop.hpp"
#include "cryocav/mechanics.hpp"
#include "cryocav/polariton.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace cryocav {

struct RunSection {
  std::uint64_t seed = 1;
  double duration_s = 10.0;
  double dt_s = 1e-5;
  bool operator==(const RunSection&) const = default;
};

struct CavitySection {
  double wavelength_nm = 780.0;
  double finesse = 110.0;
  int mode_number = 13;
  double peak_transmission = 1.0;
  bool operator==(const CavitySection&) const = default;

  CavityGeometry geometry() const;
};

struct SpringSection {
  double spring_constant_n_per_m = 1520.0;
  int springs = 4;
  double payload_kg = 0.51;
  double damping_ratio = 0.1;
  bool operator==(const SpringSection&) const = default;

  OscillatorStage stage() const;
};

struct StackSection {
  double resonance_hz = 0.0;
  double damping_ratio = 0.02;
  bool operator==(const StackSection&) const = default;
};

struct LockSection {
  double kp = 0.1;
  double ki = 312.6;
  double actuator_cutoff_hz = 500.0;
  std::optional<double> notch_hz;
  double notch_q = 10.0;
  double sensor_noise_rms = 1e-4;
  LockSide side = LockSide::BelowResonance;
  bool operator==(const LockSection&) const = default;

  LockConfig lock_config(double sample_rate_hz) const;
};

struct AnalysisSection {
  double bin_width_m = 10e-12;
  double spectrum_resolution_hz = 1.0;
  std::optional<double> pp_window_s;
  int bandwidth_points = 200;
  double bandwidth_min_hz = 1.0;
  double tail_threshold_m = 200e-12;
  bool operator==(const AnalysisSection&) const = default;
};

struct PolaritonSection {
  double exciton_energy_mev = 1725.0;
  double exciton_linewidth_mev = 6.1;
  double cavity_linewidth_mev = 6.3;
  double coupling_mev = 2.75;
  double intercept_mev = 1689.0;
  double slope_mev_per_volt = 0.8;
  double detuning_span_mev = 30.0;
  bool operator==(const PolaritonSection&) const = default;

  PolaritonModel model() const;
  DetuningCalibration calibration() const;
};

struct FitSection {
  int trials = 100;
  int sweep_points = 401;
  double sweep_span_linewidths = 6.0;
  double sweep_noise = 0.01;
  double crossing_noise_mev = 0.3;
  double voltage_min_v = 30.0;
  double voltage_max_v = 60.0;
  int voltage_count = 8;
  bool operator==(const FitSection&) const = default;
};

struct IoSection {
  std::optional<std::string> input;
  std::optional<std::string> sweep;
  std::optional<std::string> observations;
  bool operator==(const IoSection&) const = default;
};

/// Parsed run configuration. Sections missing from the text keep their
/// defaults; `sections` records which ones were written.
struct RunConfig {
  RunSection run;
  CavitySection cavity;
  SpringSection spring;
  StackSection fiber_stack{1500.0, 0.02};
  StackSection mirror_stack{190.0, 0.02};
  KickRecipe kicks = default_cold_plate_recipe();
  LockSection lock;
  AnalysisSection analysis;
  PolaritonSection polariton;
  FitSection fit;
  IoSection io;
  std::set<std::string> sections;

  bool has(std::string_view section) const { return sections.contains(std::string(section)); }
  bool operator==(const RunConfig&) const = default;
};

/// INI-style text: `[section]` headers, `key = value` lines, `#` comments.
/// Unknown keys, duplicates, bad values and missing required keys raise
/// ValidationError naming the key and line.
RunConfig parse_config(std::string_view text);

/// Present sections only, every key written with its resolved value.
std::string serialize_config(const RunConfig& config);

/// Every section, resolved. Used for output headers.
std::string serialize_resolved_config(const RunConfig& config);

/// FNV-1a 64 of serialize_resolved_config, as 16 hex digits.
std::string config_hash(const RunConfig& config);

} // namespace cryocav
