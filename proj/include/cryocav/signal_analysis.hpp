#pragma once

#include "cryocav/timeseries.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace cryocav {

/// Root-mean-square of the mean-subtracted samples. A static offset is not
/// vibration, so the mean is always removed.
double rms(std::span<const double> samples);
double rms(const TimeSeries& trace);

/// max - min over the whole trace, or the largest max - min over consecutive
/// windows of `window_s` (a trailing partial window is included).
double peak_to_peak(const TimeSeries& trace, std::optional<double> window_s = std::nullopt);

struct RmsBandwidthCurve {
  std::vector<double> bandwidths_hz;
  std::vector<double> rms_m;
};

/// Brick-wall integrated rms: sqrt of the one-sided power of the
/// mean-removed trace summed over all bins with f <= B.
RmsBandwidthCurve rms_vs_bandwidth(const TimeSeries& trace, std::span<const double> grid_hz);

/// `points` log-spaced frequencies from f_min to f_max inclusive.
std::vector<double> log_frequency_grid(double f_min_hz, double f_max_hz, std::size_t points);

struct AmplitudeSpectrum {
  double resolution_hz = 0.0;
  std::vector<double> frequencies_hz;
  std::vector<double> amplitudes_m;
};

/// Welch average of Hann-windowed, mean-removed segments of length
/// 1/resolution with 50% overlap. Calibrated so a sine of amplitude a that
/// falls on a bin reads a.
AmplitudeSpectrum amplitude_spectrum(const TimeSeries& trace, double resolution_hz = 1.0);

struct Histogram {
  double bin_width = 0.0;
  std::vector<double> centers; // multiples of bin_width
  std::vector<std::size_t> counts;

  /// Samples in bins whose center lies strictly beyond +-threshold.
  std::size_t count_beyond(double threshold) const;
};

/// Occurrence histogram of the mean-subtracted samples on a grid of bins
/// centered at integer multiples of `bin_width`.
Histogram occurrence_histogram(const TimeSeries& trace, double bin_width);

} // namespace cryocav
