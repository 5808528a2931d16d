#pragma once

#include "cryocav/timeseries.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace cryocav {

/// Longitudinal geometry of a planar-concave Fabry-Perot cavity.
/// All lengths are in meters.
struct CavityGeometry {
  double wavelength_m = 780e-9;
  double finesse = 110.0;
  int mode_number = 13;
  double peak_transmission = 1.0;
  // Descriptive only; not used by any response function.
  std::optional<std::pair<double, double>> mirror_transmissions;

  /// G = 2F/pi.
  double slope_factor() const noexcept;
  /// L = q * lambda / 2.
  double resonance_length_m() const noexcept;
  double free_spectral_range_m() const noexcept { return 0.5 * wavelength_m; }
  double spatial_linewidth_m() const noexcept { return wavelength_m / (2.0 * finesse); }

  /// Throws ValidationError on an unphysical geometry.
  void validate() const;
};

enum class LockSide { BelowResonance, AboveResonance };

/// Operating point on the flank of a resonance. `offset_m` is measured from
/// the on-resonance length.
struct LockPoint {
  double offset_m = 0.0;
  double transmission = 0.0;
  double slope_per_m = 0.0;
};

/// Airy transmission T0 / (1 + (G sin phi)^2), phi = 2 pi (z - L) / lambda.
double transmission(double z_m, const CavityGeometry& geom);

/// dT/dz of `transmission`.
double transmission_slope(double z_m, const CavityGeometry& geom);

/// Cavity-length width of a resonance, lambda / (2F).
double finesse_to_spatial_linewidth(double finesse, double wavelength_m);

/// Resonant lengths L + m * lambda/2 inside [z_min, z_max], ascending.
std::vector<double> resonance_lengths(const CavityGeometry& geom, double z_min_m, double z_max_m);

/// Resonance wavelength of mode q for a given cavity length, lambda = 2L/q.
double resonance_wavelength(double length_m, int mode_number);

/// Flank point with the steepest slope. Solved in closed form: with
/// u = sin^2(phi), d^2T/dz^2 = 0 reduces to 2G^2 u^2 - (2 + 3G^2) u + 1 = 0.
LockPoint find_lock_point(const CavityGeometry& geom, LockSide side);

/// Fraction-of-T0 window in which the linear readout is trusted.
struct ValidityBand {
  double low = 0.4;
  double high = 0.95;
};

struct DisplacementConversion {
  TimeSeries displacement;
  std::vector<bool> out_of_band; // per sample
  std::size_t out_of_band_count = 0;
};

/// Linearized readout d = (T - T_lock) / slope. Samples outside the validity
/// band are flagged but still converted.
DisplacementConversion transmission_to_displacement(const TimeSeries& trace, const CavityGeometry& geom,
                                                    const LockPoint& lock, ValidityBand band = {});

/// Forward model: transmission seen at the lock point for a length trace.
TimeSeries displacement_to_transmission(const TimeSeries& trace, const CavityGeometry& geom,
                                        const LockPoint& lock);

struct SweepSample {
  double z_m;
  double transmission;
};

struct ResonanceFit {
  double peak_transmission = 0.0;
  double resonance_length_m = 0.0;
  double finesse = 0.0;
  double rms_residual = 0.0;
  int iterations = 0;

  double spatial_linewidth_m(double wavelength_m) const { return wavelength_m / (2.0 * finesse); }
};

/// Length sweep of `points` samples spanning `span_m` centered on the
/// resonance, with additive Gaussian noise of `noise_rms` (transmission units).
std::vector<SweepSample> synthesize_sweep(const CavityGeometry& geom, double span_m, int points, double noise_rms,
                                          std::uint64_t seed);

/// Fits T0, L and F of the Airy function to a length sweep around one
/// resonance. Throws ValidationError on unusable data and FitFailure (with the
/// best parameters {T0, L, F}) when the solver does not converge.
ResonanceFit fit_resonance(std::span<const SweepSample> samples, double wavelength_m);

} // namespace cryocav
