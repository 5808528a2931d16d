#include "cryocav/mechanics.hpp"

#include "cryocav/errors.hpp"
#include "fft.hpp"
#include "random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

namespace cryocav {

using std::numbers::pi;

void OscillatorStage::validate() const {
  require(std::isfinite(resonance_hz) && resonance_hz > 0.0,
          "stage '" + label + "': resonance frequency must be positive");
  require(std::isfinite(damping_ratio) && damping_ratio >= 0.0,
          "stage '" + label + "': damping ratio must be >= 0");
}

std::complex<double> stage_response(const OscillatorStage& stage, double f_hz) {
  const double r = f_hz / stage.resonance_hz;
  const std::complex<double> damping(0.0, 2.0 * stage.damping_ratio * r);
  return (1.0 + damping) / (1.0 - r * r + damping);
}

double transmissibility(const OscillatorStage& stage, double f_hz) {
  require(f_hz >= 0.0, "transmissibility: frequency must be >= 0");
  const double r = f_hz / stage.resonance_hz;
  const double d2 = 4.0 * stage.damping_ratio * stage.damping_ratio * r * r;
  const double m = 1.0 - r * r;
  return std::sqrt((1.0 + d2) / (m * m + d2));
}

OscillatorStage stage_from_spring(double spring_constant_n_per_m, int n_springs, double payload_kg,
                                  double damping_ratio, std::string label) {
  require(spring_constant_n_per_m > 0.0, "spring constant must be positive");
  require(n_springs > 0, "spring count must be positive");
  require(payload_kg > 0.0, "payload mass must be positive");
  require(damping_ratio >= 0.0, "damping ratio must be >= 0");
  const double k_total = spring_constant_n_per_m * static_cast<double>(n_springs);
  return {std::sqrt(k_total / payload_kg) / (2.0 * pi), damping_ratio, std::move(label)};
}

void KickRecipe::validate() const {
  require(std::isfinite(period_s) && period_s > 0.0, "kick period must be positive");
  for (const auto& m : modes) {
    require(m.frequency_hz > 0.0, "kick mode frequency must be positive");
    require(m.amplitude_m >= 0.0, "kick mode amplitude must be >= 0");
    require(m.decay_time_s > 0.0, "kick mode decay time must be positive");
  }
  for (const auto& t : tones) {
    require(t.frequency_hz > 0.0, "tone frequency must be positive");
    require(t.amplitude_m >= 0.0, "tone amplitude must be >= 0");
  }
  require(broadband_floor >= 0.0, "broadband floor must be >= 0");
}

double KickRecipe::highest_frequency_hz() const {
  double f = 0.0;
  for (const auto& m : modes) f = std::max(f, m.frequency_hz);
  for (const auto& t : tones) f = std::max(f, t.frequency_hz);
  return f;
}

KickRecipe default_cold_plate_recipe() {
  KickRecipe r;
  r.period_s = 1.0;
  // Ring-downs excited by every cryo-cooler pulse.
  r.modes = {
      {200.0, 0.5e-9, 0.10},
      {350.0, 0.3e-9, 0.10},
      {1500.0, 0.5e-9, 0.05},
      {10000.0, 0.1e-9, 0.05}, // inverter PWM carrier
  };
  // Steady lines: motion at the spring-stage resonance and mains harmonics.
  r.tones = {
      {18.0, 2.8e-9},
      {50.0, 0.3e-9},
      {100.0, 0.2e-9},
      {150.0, 0.15e-9},
      {200.0, 0.6e-9},
  };
  r.broadband_floor = 2e-13;
  r.seed = 1;
  return r;
}

std::vector<double> kick_onsets(const KickRecipe& recipe, double duration_s) {
  recipe.validate();
  std::vector<double> out;
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * recipe.period_s;
    if (t >= duration_s * (1.0 - 1e-12)) break;
    out.push_back(t);
  }
  return out;
}

namespace {

// Ring-downs are cut once the envelope is below this fraction of the start.
constexpr double kRingdownCutoff = 30.0; // decay times

} // namespace

TimeSeries kick_train(const KickRecipe& recipe, double duration_s, double dt_s) {
  recipe.validate();
  require(dt_s > 0.0, "kick_train: dt must be positive");
  require(duration_s >= recipe.period_s, "kick_train: duration must cover at least one kick period");
  const double f_max = recipe.highest_frequency_hz();
  require(f_max == 0.0 || dt_s <= 1.0 / (10.0 * f_max) * (1.0 + 1e-9),
          "kick_train: dt does not resolve the highest recipe frequency (need dt <= 1/(10 f_max))");

  const auto n = static_cast<std::size_t>(std::llround(duration_s / dt_s));
  std::vector<double> x(n, 0.0);
  auto rng = detail::seeded_engine(recipe.seed, 0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);

  for (const auto& tone : recipe.tones) {
    const double ph = phase(rng);
    const double w = 2.0 * pi * tone.frequency_hz;
    for (std::size_t i = 0; i < n; ++i) x[i] += tone.amplitude_m * std::sin(w * static_cast<double>(i) * dt_s + ph);
  }

  for (const double onset : kick_onsets(recipe, duration_s)) {
    const auto i0 = static_cast<std::size_t>(std::llround(onset / dt_s));
    for (const auto& mode : recipe.modes) {
      const double ph = phase(rng);
      const double w = 2.0 * pi * mode.frequency_hz;
      const auto span = static_cast<std::size_t>(std::ceil(kRingdownCutoff * mode.decay_time_s / dt_s));
      const std::size_t end = std::min(n, i0 + span);
      for (std::size_t i = i0; i < end; ++i) {
        const double t = static_cast<double>(i - i0) * dt_s;
        x[i] += mode.amplitude_m * std::exp(-t / mode.decay_time_s) * std::sin(w * t + ph);
      }
    }
  }

  if (recipe.broadband_floor > 0.0) {
    // One-sided density S over the band [0, fs/2] has variance S^2 fs / 2.
    std::normal_distribution<double> noise(0.0, recipe.broadband_floor * std::sqrt(0.5 / dt_s));
    for (auto& v : x) v += noise(rng);
  }
  return TimeSeries(dt_s, std::move(x), Unit::Meter);
}

TimeSeries apply_stage(const TimeSeries& input, const OscillatorStage& stage) {
  stage.validate();
  require(input.unit() == Unit::Meter, "apply_stage: input must be a displacement trace");
  require(stage.damping_ratio > 0.0, "apply_stage: stage '" + stage.label + "' is undamped");

  const std::size_t n = input.size();
  const std::size_t m = std::bit_ceil(2 * n);
  detail::RealFft fft(m);
  auto buf = fft.real();
  std::copy(input.values().begin(), input.values().end(), buf.begin());
  std::fill(buf.begin() + static_cast<std::ptrdiff_t>(n), buf.end(), 0.0);
  fft.forward();

  const double df = 1.0 / (static_cast<double>(m) * input.dt());
  const double norm = 1.0 / static_cast<double>(m);
  auto spec = fft.spectrum();
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= stage_response(stage, static_cast<double>(k) * df) * norm;
  fft.inverse();

  return TimeSeries(input.dt(), std::vector<double>(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(n)),
                    Unit::Meter);
}

IsolationChain default_isolation_chain() {
  IsolationChain c;
  c.spring = stage_from_spring(1520.0, 4, 0.51, 0.1, "spring table");
  c.fiber_stack = {1500.0, 0.02, "fiber stack"};
  c.mirror_stack = {190.0, 0.02, "mirror stack"};
  return c;
}

CavityNoise cavity_noise(const TimeSeries& cold_plate, const OscillatorStage& spring_stage,
                         const OscillatorStage& fiber_stack, const OscillatorStage& mirror_stack) {
  require(cold_plate.unit() == Unit::Meter, "cavity_noise: cold-plate trace must be a displacement");
  std::vector<std::string> warnings;
  for (const auto* s : {&fiber_stack, &mirror_stack}) {
    if (s->resonance_hz < 10.0 * spring_stage.resonance_hz)
      warnings.push_back("stage '" + s->label + "' resonance is within a decade of the spring stage");
  }

  TimeSeries table = apply_stage(cold_plate, spring_stage);
  const TimeSeries fiber = apply_stage(table, fiber_stack);
  TimeSeries mirror = apply_stage(table, mirror_stack);

  auto& diff = mirror.mutable_values();
  const auto f = fiber.values();
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = f[i] - diff[i];
  return {std::move(table), std::move(mirror), std::move(warnings)};
}

} // namespace cryocav
