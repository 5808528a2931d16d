#include "cryocav/fabry_perot.hpp"

#include "cryocav/errors.hpp"
#include "cryocav/least_squares.hpp"
#include "random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace cryocav {

using std::numbers::pi;

double CavityGeometry::slope_factor() const noexcept { return 2.0 * finesse / pi; }

double CavityGeometry::resonance_length_m() const noexcept {
  return static_cast<double>(mode_number) * wavelength_m / 2.0;
}

void CavityGeometry::validate() const {
  require(std::isfinite(wavelength_m) && wavelength_m > 0.0, "cavity wavelength must be positive");
  require(std::isfinite(finesse) && finesse >= 1.0, "cavity finesse must be >= 1");
  require(mode_number >= 1, "cavity mode number must be a positive integer");
  require(std::isfinite(peak_transmission) && peak_transmission > 0.0 && peak_transmission <= 1.0,
          "peak transmission must lie in (0, 1]");
}

double transmission(double z_m, const CavityGeometry& geom) {
  const double g = geom.slope_factor();
  const double s = std::sin(2.0 * pi * (z_m - geom.resonance_length_m()) / geom.wavelength_m);
  return geom.peak_transmission / (1.0 + g * g * s * s);
}

double transmission_slope(double z_m, const CavityGeometry& geom) {
  const double g = geom.slope_factor();
  const double phi = 2.0 * pi * (z_m - geom.resonance_length_m()) / geom.wavelength_m;
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  const double denom = 1.0 + g * g * s * s;
  return -geom.peak_transmission * 4.0 * g * g * pi / geom.wavelength_m * s * c / (denom * denom);
}

double finesse_to_spatial_linewidth(double finesse, double wavelength_m) {
  require(std::isfinite(finesse) && finesse >= 1.0, "finesse must be >= 1");
  require(std::isfinite(wavelength_m) && wavelength_m > 0.0, "wavelength must be positive");
  return wavelength_m / (2.0 * finesse);
}

std::vector<double> resonance_lengths(const CavityGeometry& geom, double z_min_m, double z_max_m) {
  geom.validate();
  std::vector<double> out;
  if (!(z_max_m >= z_min_m)) return out;
  const double fsr = geom.free_spectral_range_m();
  const double l0 = geom.resonance_length_m();
  // Resonances are L + m * fsr; enumerate m from the integer index range.
  const auto m_lo = static_cast<long long>(std::ceil((z_min_m - l0) / fsr - 1e-12));
  const auto m_hi = static_cast<long long>(std::floor((z_max_m - l0) / fsr + 1e-12));
  for (long long m = m_lo; m <= m_hi; ++m) out.push_back(l0 + static_cast<double>(m) * fsr);
  return out;
}

double resonance_wavelength(double length_m, int mode_number) {
  require(length_m > 0.0 && mode_number >= 1, "resonance wavelength needs a positive length and mode number");
  return 2.0 * length_m / static_cast<double>(mode_number);
}

LockPoint find_lock_point(const CavityGeometry& geom, LockSide side) {
  geom.validate();
  const double g2 = geom.slope_factor() * geom.slope_factor();
  const double b = 2.0 + 3.0 * g2;
  // Smaller root of 2G^2 u^2 - b u + 1 = 0, written to avoid cancellation.
  const double u = 2.0 / (b + std::sqrt(b * b - 8.0 * g2));
  const double phi = std::asin(std::sqrt(u));
  const double magnitude = geom.wavelength_m * phi / (2.0 * pi);

  LockPoint lp;
  lp.offset_m = side == LockSide::BelowResonance ? -magnitude : magnitude;
  const double z = geom.resonance_length_m() + lp.offset_m;
  lp.transmission = transmission(z, geom);
  lp.slope_per_m = transmission_slope(z, geom);
  return lp;
}

DisplacementConversion transmission_to_displacement(const TimeSeries& trace, const CavityGeometry& geom,
                                                    const LockPoint& lock, ValidityBand band) {
  geom.validate();
  require(trace.unit() == Unit::Transmission, "conversion to displacement needs a transmission trace");
  require(std::isfinite(lock.slope_per_m) && lock.slope_per_m != 0.0, "lock point slope must be non-zero");
  require(band.low < band.high, "validity band must satisfy low < high");

  const auto in = trace.values();
  std::vector<double> out(in.size());
  std::vector<bool> flags(in.size(), false);
  std::size_t flagged = 0;
  const double lo = band.low * geom.peak_transmission;
  const double hi = band.high * geom.peak_transmission;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = (in[i] - lock.transmission) / lock.slope_per_m;
    if (in[i] < lo || in[i] > hi) {
      flags[i] = true;
      ++flagged;
    }
  }
  return {TimeSeries(trace.dt(), std::move(out), Unit::Meter), std::move(flags), flagged};
}

TimeSeries displacement_to_transmission(const TimeSeries& trace, const CavityGeometry& geom, const LockPoint& lock) {
  geom.validate();
  require(trace.unit() == Unit::Meter, "conversion to transmission needs a displacement trace");
  const double z0 = geom.resonance_length_m() + lock.offset_m;
  std::vector<double> out(trace.size());
  const auto in = trace.values();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = transmission(z0 + in[i], geom);
  return TimeSeries(trace.dt(), std::move(out), Unit::Transmission);
}

namespace {

// Full width at half maximum around the peak, by linear interpolation.
// Returns 0 when neither side drops below half maximum.
double half_max_width(std::span<const SweepSample> s, std::size_t peak, double baseline) {
  const double half = baseline + 0.5 * (s[peak].transmission - baseline);
  double left = 0.0, right = 0.0;
  bool have_left = false, have_right = false;
  for (std::size_t i = peak; i > 0; --i) {
    if (s[i - 1].transmission <= half) {
      const double t = (half - s[i - 1].transmission) / (s[i].transmission - s[i - 1].transmission);
      left = s[i - 1].z_m + t * (s[i].z_m - s[i - 1].z_m);
      have_left = true;
      break;
    }
  }
  for (std::size_t i = peak; i + 1 < s.size(); ++i) {
    if (s[i + 1].transmission <= half) {
      const double t = (s[i].transmission - half) / (s[i].transmission - s[i + 1].transmission);
      right = s[i].z_m + t * (s[i + 1].z_m - s[i].z_m);
      have_right = true;
      break;
    }
  }
  const double zp = s[peak].z_m;
  if (have_left && have_right) return right - left;
  if (have_left) return 2.0 * (zp - left);
  if (have_right) return 2.0 * (right - zp);
  return 0.0;
}

} // namespace

std::vector<SweepSample> synthesize_sweep(const CavityGeometry& geom, double span_m, int points, double noise_rms,
                                          std::uint64_t seed) {
  geom.validate();
  require(span_m > 0.0, "synthesize_sweep: span must be positive");
  require(points >= 2, "synthesize_sweep: need at least 2 points");
  require(noise_rms >= 0.0, "synthesize_sweep: noise must be >= 0");
  auto rng = detail::seeded_engine(seed, 4);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double center = geom.resonance_length_m();
  std::vector<SweepSample> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double z = center + span_m * (static_cast<double>(i) / (points - 1) - 0.5);
    double t = transmission(z, geom);
    if (noise_rms > 0.0) t += noise_rms * noise(rng);
    out[static_cast<std::size_t>(i)] = {z, t};
  }
  return out;
}

ResonanceFit fit_resonance(std::span<const SweepSample> samples, double wavelength_m) {
  require(wavelength_m > 0.0, "fit_resonance: wavelength must be positive");
  require(samples.size() >= 10, "fit_resonance: need at least 10 samples");
  for (std::size_t i = 1; i < samples.size(); ++i)
    require(samples[i].z_m > samples[i - 1].z_m, "fit_resonance: z must be strictly increasing");

  const auto [min_it, max_it] = std::minmax_element(
      samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.transmission < b.transmission; });
  require(max_it->transmission > min_it->transmission, "fit_resonance: constant transmission cannot be fitted");

  const auto peak = static_cast<std::size_t>(max_it - samples.begin());
  const double width = half_max_width(samples, peak, 0.0);
  require(width > 0.0, "fit_resonance: samples must span at least one full linewidth");

  // Work in nm relative to the peak sample for conditioning.
  const double z_ref = samples[peak].z_m;
  const double lambda_nm = wavelength_m * 1e9;
  std::vector<double> x(samples.size()), y(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    x[i] = (samples[i].z_m - z_ref) * 1e9;
    y[i] = samples[i].transmission;
  }

  Eigen::VectorXd p0(3);
  p0 << max_it->transmission, 0.0, std::max(1.0, wavelength_m / (2.0 * width));

  const auto n = static_cast<Eigen::Index>(samples.size());
  auto residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    const double g = 2.0 * p[2] / pi;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = std::sin(2.0 * pi * (x[i] - p[1]) / lambda_nm);
      r[i] = p[0] / (1.0 + g * g * s * s) - y[i];
    }
  };
  auto jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& j) {
    const double g = 2.0 * p[2] / pi;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double phi = 2.0 * pi * (x[i] - p[1]) / lambda_nm;
      const double s = std::sin(phi), c = std::cos(phi);
      const double d = 1.0 + g * g * s * s;
      j(i, 0) = 1.0 / d;
      j(i, 1) = p[0] * 4.0 * g * g * pi / lambda_nm * s * c / (d * d);
      j(i, 2) = -p[0] * 2.0 * g * s * s / (d * d) * (2.0 / pi);
    }
  };

  LeastSquaresOptions opts;
  opts.max_iterations = 500;
  const auto res = levenberg_marquardt(n, residual, jacobian, p0, opts);
  const double rms = std::sqrt(2.0 * res.cost / static_cast<double>(n));
  const double length = z_ref + res.parameters[1] * 1e-9;
  if (!res.converged || !(res.parameters[2] > 0.0))
    throw FitFailure("fit_resonance did not converge: " + res.reason,
                     {res.parameters[0], length, std::abs(res.parameters[2])}, rms);

  ResonanceFit fit;
  fit.peak_transmission = res.parameters[0];
  fit.resonance_length_m = length;
  fit.finesse = res.parameters[2];
  fit.rms_residual = rms;
  fit.iterations = res.iterations;
  return fit;
}

} // namespace cryocav
