#include "cryocav/lockloop.hpp"

#include "cryocav/errors.hpp"
#include "random.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

namespace cryocav {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// RBJ notch biquad, direct form I.
class Notch {
public:
  Notch(const NotchFilter& n, double fs) {
    const double w0 = two_pi * n.frequency_hz / fs;
    const double alpha = std::sin(w0) / (2.0 * n.quality);
    const double a0 = 1.0 + alpha;
    b0_ = 1.0 / a0;
    b1_ = -2.0 * std::cos(w0) / a0;
    b2_ = b0_;
    a1_ = b1_;
    a2_ = (1.0 - alpha) / a0;
  }

  double step(double x) {
    const double y = b0_ * x + b1_ * x1_ + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

private:
  double b0_, b1_, b2_, a1_, a2_;
  double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

std::string gains_text(const LockConfig& c) {
  std::ostringstream os;
  os << "kp=" << c.kp << " ki=" << c.ki << " cutoff_hz=" << c.actuator_cutoff_hz;
  return os.str();
}

} // namespace

void LockConfig::validate() const {
  require(std::isfinite(kp) && kp >= 0.0, "lock: kp must be >= 0");
  require(std::isfinite(ki) && ki >= 0.0, "lock: ki must be >= 0");
  require(std::isfinite(actuator_cutoff_hz) && actuator_cutoff_hz > 0.0, "lock: actuator_cutoff_hz must be > 0");
  require(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0, "lock: sample_rate_hz must be > 0");
  require(sample_rate_hz >= 10.0 * actuator_cutoff_hz, "lock: sample rate must be at least 10x the actuator cutoff");
  require(std::isfinite(sensor_noise_rms) && sensor_noise_rms >= 0.0, "lock: sensor_noise_rms must be >= 0");
  if (notch) {
    require(notch->frequency_hz > 0.0 && notch->frequency_hz < 0.5 * sample_rate_hz,
            "lock: notch frequency must lie in (0, Nyquist)");
    require(notch->quality > 0.0, "lock: notch quality must be > 0");
  }
}

std::complex<double> controller_response(const LockConfig& config, double f_hz) {
  config.validate();
  require(f_hz > 0.0 && f_hz < 0.5 * config.sample_rate_hz, "controller_response: frequency outside (0, Nyquist)");
  using namespace std::complex_literals;
  const double w = two_pi * f_hz;
  std::complex<double> c = config.kp + config.ki / (1i * w);
  c /= 1.0 + 1i * (f_hz / config.actuator_cutoff_hz);
  if (config.notch) {
    const double f0 = config.notch->frequency_hz;
    c *= (f0 * f0 - f_hz * f_hz) / (f0 * f0 - f_hz * f_hz + 1i * (f_hz * f0 / config.notch->quality));
  }
  return c;
}

std::complex<double> open_loop_gain(const LockConfig& config, double f_hz) {
  const double w = two_pi * f_hz / config.sample_rate_hz;
  return controller_response(config, f_hz) * std::polar(1.0, -w);
}

std::complex<double> loop_sensitivity(const LockConfig& config, double f_hz) {
  return 1.0 / (1.0 + open_loop_gain(config, f_hz));
}

double unity_gain_frequency(const LockConfig& config) {
  config.validate();
  require(config.kp > 0.0 || config.ki > 0.0, "unity_gain_frequency: loop has no gain");
  const double f_hi = 0.45 * config.sample_rate_hz;
  auto excess = [&](double log_f) { return std::log(std::abs(open_loop_gain(config, std::exp(log_f)))); };

  // Scan upward for the first sign change, then refine.
  const double lo = std::log(1e-3), hi = std::log(f_hi);
  const int steps = 2000;
  double a = lo, fa = excess(a);
  if (fa <= 0.0) throw NumericalError("unity_gain_frequency: loop gain below 1 at 1 mHz");
  for (int i = 1; i <= steps; ++i) {
    const double b = lo + (hi - lo) * i / steps;
    const double fb = excess(b);
    if (fb <= 0.0) {
      boost::math::tools::eps_tolerance<double> tol(50);
      std::uintmax_t iters = 100;
      const auto [r0, r1] = boost::math::tools::toms748_solve(excess, a, b, fa, fb, tol, iters);
      return std::exp(0.5 * (r0 + r1));
    }
    a = b;
    fa = fb;
  }
  throw NumericalError("unity_gain_frequency: loop gain never falls below 1 before Nyquist");
}

double phase_margin_deg(const LockConfig& config) {
  const double ugf = unity_gain_frequency(config);
  return 180.0 + std::arg(open_loop_gain(config, ugf)) * 180.0 / std::numbers::pi;
}

LockResult simulate_lock(const TimeSeries& disturbance, const CavityGeometry& geom, const LockConfig& config,
                         std::uint64_t seed) {
  config.validate();
  geom.validate();
  require(disturbance.unit() == Unit::Meter, "simulate_lock: disturbance must be a length trace");
  require(std::abs(disturbance.sample_rate() - config.sample_rate_hz) <= 1e-6 * config.sample_rate_hz,
          "simulate_lock: disturbance sample rate differs from the lock sample rate");

  const LockPoint lp = find_lock_point(geom, config.side);
  const double dt = disturbance.dt();
  const double limit = config.anti_windup_limit_m(geom);
  const double blowup = geom.free_spectral_range_m() / 4.0;
  const double alpha = 1.0 - std::exp(-two_pi * config.actuator_cutoff_hz * dt);
  const double z0 = geom.resonance_length_m() + lp.offset_m;

  auto rng = detail::seeded_engine(seed, 2);
  std::normal_distribution<double> noise(0.0, config.sensor_noise_rms > 0.0 ? config.sensor_noise_rms : 1.0);
  const bool noisy = config.sensor_noise_rms > 0.0;
  std::optional<Notch> notch;
  if (config.notch) notch.emplace(*config.notch, config.sample_rate_hz);

  const auto d = disturbance.values();
  std::vector<double> residual(d.size()), actuator(d.size());
  double act = 0.0, integ = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double r = d[i] - act;
    if (!(std::abs(r) <= blowup)) {
      std::ostringstream os;
      os << "lock lost at t=" << static_cast<double>(i) * dt << " s (residual " << r << " m) with " << gains_text(config);
      throw InstabilityError(os.str());
    }
    residual[i] = r;
    actuator[i] = act;

    double t = transmission(z0 + r, geom);
    if (noisy) t += noise(rng);
    double e = (t - lp.transmission) / lp.slope_per_m;
    if (notch) e = notch->step(e);

    // Conditional integration: hold the integrator while the command is
    // beyond the limit and the step would push it further out.
    const double next = integ + config.ki * dt * e;
    if (!(std::abs(config.kp * e + next) > limit && std::abs(next) > std::abs(integ))) integ = next;
    const double u = config.kp * e + integ;
    act += alpha * (u - act);
  }
  return {TimeSeries(dt, std::move(residual), Unit::Meter), TimeSeries(dt, std::move(actuator), Unit::Meter), lp};
}

} // namespace cryocav
