#include "cryocav/signal_analysis.hpp"

#include "cryocav/errors.hpp"
#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace cryocav {

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

} // namespace

double rms(std::span<const double> samples) {
  require(!samples.empty(), "rms of an empty trace");
  const double m = mean_of(samples);
  double acc = 0.0;
  for (const double v : samples) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

double rms(const TimeSeries& trace) { return rms(trace.values()); }

double peak_to_peak(const TimeSeries& trace, std::optional<double> window_s) {
  const auto x = trace.values();
  require(!x.empty(), "peak_to_peak of an empty trace");
  if (!window_s) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *hi - *lo;
  }
  require(*window_s > 0.0, "peak_to_peak window must be positive");
  require(*window_s <= trace.duration() * (1.0 + 1e-12), "peak_to_peak window exceeds the trace duration");
  const auto w = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(*window_s / trace.dt())));
  double best = 0.0;
  for (std::size_t start = 0; start < x.size(); start += w) {
    const auto end = std::min(x.size(), start + w);
    const auto [lo, hi] = std::minmax_element(x.begin() + static_cast<std::ptrdiff_t>(start),
                                              x.begin() + static_cast<std::ptrdiff_t>(end));
    best = std::max(best, *hi - *lo);
  }
  return best;
}

RmsBandwidthCurve rms_vs_bandwidth(const TimeSeries& trace, std::span<const double> grid_hz) {
  const double nyquist = 0.5 * trace.sample_rate();
  for (std::size_t i = 0; i < grid_hz.size(); ++i) {
    require(grid_hz[i] > 0.0, "rms_vs_bandwidth: bandwidths must be positive");
    require(grid_hz[i] <= nyquist * (1.0 + 1e-12), "rms_vs_bandwidth: bandwidth beyond Nyquist");
    require(i == 0 || grid_hz[i] > grid_hz[i - 1], "rms_vs_bandwidth: grid must be ascending");
  }

  const std::size_t n = trace.size();
  detail::RealFft fft(n);
  const double m = mean_of(trace.values());
  auto buf = fft.real();
  std::transform(trace.values().begin(), trace.values().end(), buf.begin(), [m](double v) { return v - m; });
  fft.forward();

  // One-sided power per bin: sum_k P_k equals the time-domain mean square.
  const auto spec = fft.spectrum();
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  std::vector<double> cumulative(spec.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const bool unpaired = k == 0 || (n % 2 == 0 && k == n / 2);
    acc += (unpaired ? 1.0 : 2.0) * std::norm(spec[k]) / n2;
    cumulative[k] = acc;
  }

  const double df = trace.sample_rate() / static_cast<double>(n);
  RmsBandwidthCurve out;
  out.bandwidths_hz.assign(grid_hz.begin(), grid_hz.end());
  out.rms_m.reserve(grid_hz.size());
  for (const double b : grid_hz) {
    auto last = static_cast<std::size_t>(std::floor(b / df * (1.0 + 1e-12)));
    last = std::min(last, spec.size() - 1);
    out.rms_m.push_back(std::sqrt(cumulative[last]));
  }
  return out;
}

std::vector<double> log_frequency_grid(double f_min_hz, double f_max_hz, std::size_t points) {
  require(f_min_hz > 0.0 && f_max_hz > f_min_hz, "log grid needs 0 < f_min < f_max");
  require(points >= 2, "log grid needs at least 2 points");
  std::vector<double> out(points);
  const double a = std::log(f_min_hz), b = std::log(f_max_hz);
  for (std::size_t i = 0; i < points; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  out.front() = f_min_hz;
  out.back() = f_max_hz;
  return out;
}

AmplitudeSpectrum amplitude_spectrum(const TimeSeries& trace, double resolution_hz) {
  require(resolution_hz > 0.0, "amplitude_spectrum: resolution must be positive");
  const auto seg = static_cast<std::size_t>(std::llround(trace.sample_rate() / resolution_hz));
  require(seg >= 4, "amplitude_spectrum: resolution too coarse for the sample rate");
  require(trace.size() >= seg, "amplitude_spectrum: trace shorter than one segment");

  std::vector<double> window(seg);
  for (std::size_t i = 0; i < seg; ++i)
    window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(seg)));
  const double window_sum = std::accumulate(window.begin(), window.end(), 0.0);

  detail::RealFft fft(seg);
  std::vector<double> power(fft.bins(), 0.0);
  const std::size_t hop = std::max<std::size_t>(1, seg / 2);
  std::size_t segments = 0;
  const auto x = trace.values();
  for (std::size_t start = 0; start + seg <= x.size(); start += hop) {
    const auto part = x.subspan(start, seg);
    const double m = mean_of(part);
    auto buf = fft.real();
    for (std::size_t i = 0; i < seg; ++i) buf[i] = (part[i] - m) * window[i];
    fft.forward();
    const auto spec = fft.spectrum();
    for (std::size_t k = 0; k < spec.size(); ++k) power[k] += std::norm(spec[k]);
    ++segments;
  }

  AmplitudeSpectrum out;
  out.resolution_hz = trace.sample_rate() / static_cast<double>(seg);
  out.frequencies_hz.resize(power.size());
  out.amplitudes_m.resize(power.size());
  for (std::size_t k = 0; k < power.size(); ++k) {
    const double mag = std::sqrt(power[k] / static_cast<double>(segments));
    out.frequencies_hz[k] = static_cast<double>(k) * out.resolution_hz;
    out.amplitudes_m[k] = (k == 0 ? 1.0 : 2.0) * mag / window_sum;
  }
  return out;
}

std::size_t Histogram::count_beyond(double threshold) const {
  std::size_t total = 0;
  for (std::size_t i = 0; i < centers.size(); ++i)
    if (std::abs(centers[i]) > threshold) total += counts[i];
  return total;
}

Histogram occurrence_histogram(const TimeSeries& trace, double bin_width) {
  require(std::isfinite(bin_width) && bin_width > 0.0, "histogram bin width must be positive");
  const auto x = trace.values();
  const double m = mean_of(x);
  std::vector<long long> index(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) index[i] = std::llround((x[i] - m) / bin_width);
  const auto [lo, hi] = std::minmax_element(index.begin(), index.end());

  Histogram h;
  h.bin_width = bin_width;
  const auto bins = static_cast<std::size_t>(*hi - *lo + 1);
  h.counts.assign(bins, 0);
  h.centers.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) h.centers[b] = static_cast<double>(*lo + static_cast<long long>(b)) * bin_width;
  for (const auto i : index) ++h.counts[static_cast<std::size_t>(i - *lo)];
  return h;
}

} // namespace cryocav
