// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.
#include "cryocav/config.hpp"
#include "cryocav/fabry_perot.hpp"
#include "cryocav/lockloop.hpp"
#include "cryocav/mechanics.hpp"
#include "cryocav/pipeline.hpp"
#include "cryocav/polariton.hpp"
#include "cryocav/signal_analysis.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace cryocav;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass;
  std::string detail;
};

bool within(double value, double target, double rel) { return std::abs(value / target - 1.0) <= rel; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Least-squares slope of log10|H| against log10 f over [f1, f2].
double fitted_log_slope(const OscillatorStage& s, double f1, double f2) {
  const int n = 101;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = std::log10(f1) + (std::log10(f2) - std::log10(f1)) * i / (n - 1);
    const double y = std::log10(transmissibility(s, std::pow(10.0, x)));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome criterion_1() {
  const double a = finesse_to_spatial_linewidth(110, 780e-9), b = finesse_to_spatial_linewidth(30, 780e-9),
               c = finesse_to_spatial_linewidth(1000, 780e-9);
  const bool ok = within(a, 3.545e-9, 0.005) && within(b, 13.0e-9, 0.005) && within(c, 0.390e-9, 0.005);
  return {ok, fmt("F=110: %.4f nm, F=30: %.3f nm, F=1000: %.4f nm", a * 1e9, b * 1e9, c * 1e9)};
}

Outcome criterion_2() {
  const auto s = stage_from_spring(1520, 4, 0.51, 0.1);
  const bool ok = std::abs(s.resonance_hz - 17.4) < 0.05 && within(s.resonance_hz, 18.0, 0.05);
  return {ok, fmt("f0 = %.3f Hz (%.1f%% from 18 Hz)", s.resonance_hz, 100 * (s.resonance_hz / 18.0 - 1))};
}

Outcome criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  const double undamped = fitted_log_slope({17.4, 0.0, "undamped"}, 174, 1740);
  const double damped = fitted_log_slope({17.4, 0.1, "damped"}, 17.4e3, 17.4e4);
  const bool ok = std::abs(undamped + 2.0) <= 0.05 && std::abs(damped + 1.0) <= 0.05 && elapsed(t0) < 1.0;
  return {ok, fmt("undamped %.4f /decade, damped asymptote %.4f /decade", undamped, damped)};
}

Outcome criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  const CavityGeometry g;
  const auto lp = find_lock_point(g, LockSide::BelowResonance);
  auto error = [&](double amplitude) {
    const std::size_t n = 1000000;
    const double dt = 1e-5;
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = amplitude * std::sin(2 * pi * 17.0 * i * dt);
    const TimeSeries disp(dt, d, Unit::Meter);
    const auto back = transmission_to_displacement(displacement_to_transmission(disp, g, lp), g, lp);
    double e = 0, r = 0;
    for (std::size_t i = 0; i < n; ++i) {
      e += std::pow(back.displacement[i] - d[i], 2);
      r += d[i] * d[i];
    }
    return std::sqrt(e / r);
  };
  const double e30 = error(30e-12);
  const double e20 = error(g.spatial_linewidth_m() / 20);
  const double seconds = elapsed(t0) / 2;
  const bool ok = e30 <= 0.05 && e20 <= 0.02 && seconds < 1.0;
  return {ok, fmt("30 pm: %.4f%%, dL/20: %.3f%% (%.2f s per 1e6 samples)", 100 * e30, 100 * e20, seconds)};
}

Outcome criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto recipe = default_cold_plate_recipe();
    recipe.seed = seed;
    const auto t = kick_train(recipe, 1.0, 1e-5);
    const double grid[] = {0.5 * t.sample_rate()};
    worst = std::max(worst, std::abs(rms_vs_bandwidth(t, grid).rms_m[0] / rms(t) - 1.0));
  }
  const double s = elapsed(t0);
  return {worst <= 1e-6 && s < 30.0, fmt("max relative deviation %.2e over 100 traces (%.1f s)", worst, s)};
}

Outcome criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  const CavityGeometry g;
  const double span = 6 * g.spatial_linewidth_m();
  const double clean = fit_resonance(synthesize_sweep(g, span, 401, 0.0, 1), g.wavelength_m).finesse;
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto s = synthesize_sweep(g, span, 401, 0.01, seed);
    worst = std::max(worst, std::abs(fit_resonance(s, g.wavelength_m).finesse / 110.0 - 1.0));
  }
  const double s = elapsed(t0);
  const bool ok = within(clean, 110.0, 0.001) && worst <= 0.02 && s < 30.0;
  return {ok, fmt("noiseless F = %.6f, worst of 100 noisy fits %.3f%% (%.2f s)", clean, 100 * worst, s)};
}

std::map<std::string, double> parse_summary(const std::string& text) {
  std::map<std::string, double> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find(" = ");
    if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
    out[line.substr(0, eq)] = std::strtod(line.c_str() + eq + 3, nullptr);
  }
  return out;
}

Outcome criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  std::ifstream in(CRYOCAV_DEFAULT_CONFIG);
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto config = parse_config(ss.str());
  RunOptions options;
  options.out_dir = std::filesystem::temp_directory_path() / "cryocav_acceptance_report";
  options.seed = 1;
  const auto r = run("report", config, options);
  if (r.exit_code != 0) return {false, "report failed: " + r.error};
  auto m = parse_summary(r.summary);
  const double s = elapsed(t0);
  const bool cold = within(m["cold_plate_rms_m"], 2.2e-9, 0.20) && m["cold_plate_pp_m"] <= 10e-9;
  const bool cavity = m["unlocked_rms_m"] >= 30e-12 && m["unlocked_rms_m"] <= 120e-12;
  const bool ratio = m["rms_ratio"] <= 0.8;
  const bool tails = m["locked_tail_count"] < m["unlocked_tail_count"];
  return {cold && cavity && ratio && tails && s < 120.0,
          fmt("cold plate %.2f nm rms / %.2f nm p-p; cavity %.1f pm rms / %.2f nm p-p; locked %.1f pm, ratio %.3f; "
              "samples beyond 200 pm %g -> %g (%.1f s)",
              m["cold_plate_rms_m"] * 1e9, m["cold_plate_pp_m"] * 1e9, m["unlocked_rms_m"] * 1e12,
              m["unlocked_pp_m"] * 1e9, m["locked_rms_m"] * 1e12, m["rms_ratio"], m["unlocked_tail_count"],
              m["locked_tail_count"], s)};
}

// Amplitude of the f component over the last whole `cycles` periods.
double amplitude_at(const TimeSeries& t, double f, int cycles) {
  const auto n = static_cast<std::size_t>(std::llround(cycles / f / t.dt()));
  std::complex<double> acc = 0;
  for (std::size_t i = t.size() - n; i < t.size(); ++i) acc += t[i] * std::polar(1.0, -2 * pi * f * i * t.dt());
  return 2.0 * std::abs(acc) / static_cast<double>(n);
}

TimeSeries sine(double f, double a, double seconds) {
  std::vector<double> x(static_cast<std::size_t>(seconds * 1e5));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = a * std::sin(2 * pi * f * i * 1e-5);
  return TimeSeries(1e-5, x, Unit::Meter);
}

Outcome criterion_8() {
  const auto t0 = std::chrono::steady_clock::now();
  LockConfig c;
  c.sensor_noise_rms = 0;
  const CavityGeometry g;
  const double a = 50e-12;
  const double low = amplitude_at(simulate_lock(sine(5.0, a, 2.0), g, c, 1).residual, 5.0, 5) / a;
  const double oracle = std::abs(1.0 / (1.0 + controller_response(c, 5.0)));
  const double ugf = unity_gain_frequency(c);
  const double high = amplitude_at(simulate_lock(sine(10 * ugf, a, 0.5), g, c, 1).residual, 10 * ugf, 50) / a;
  const double s = elapsed(t0);
  const bool ok = within(low, oracle, 0.10) && std::abs(high - 1.0) <= 0.10 && s < 10.0;
  return {ok, fmt("UGF %.1f Hz; 5 Hz residual %.4f vs 1/|1+L| %.4f; at %.0f Hz residual/open-loop %.3f", ugf, low,
                  oracle, 10 * ugf, high)};
}

Outcome criterion_9() {
  const PolaritonModel m{1725.0, 6.1, 6.3, 2.75, 0.0};
  const auto s = normal_mode_splitting(m, -20, 20);
  const double c = cooperativity(s.splitting_mev, 6.3, 6.1);
  double trace_err = 0, decouple_err = 0;
  for (double d = -30; d <= 30; d += 0.25) {
    PolaritonModel p = m;
    p.detuning_mev = d;
    const auto e = polariton_eigenenergies(p);
    const std::complex<double> tr(p.cavity_energy_mev() + p.exciton_energy_mev, -(6.3 + 6.1) / 2);
    trace_err = std::max(trace_err, std::abs(e.upper + e.lower - tr) / std::abs(tr));
    p.coupling_mev = 0;
    const auto z = polariton_eigenenergies(p);
    const std::complex<double> cav(p.cavity_energy_mev(), -3.15), exc(p.exciton_energy_mev, -3.05);
    const double dz = d >= 0 ? std::max(std::abs(z.upper - cav), std::abs(z.lower - exc))
                             : std::max(std::abs(z.upper - exc), std::abs(z.lower - cav));
    decouple_err = std::max(decouple_err, dz / std::abs(exc));
  }
  const bool ok = within(s.splitting_mev, 5.50, 0.002) && std::abs(c - 1.57) <= 0.01 && trace_err <= 1e-12 &&
                  decouple_err <= 1e-12;
  return {ok, fmt("S = %.4f meV at detuning %.2e meV, C = %.4f; trace err %.1e, g=0 err %.1e", s.splitting_mev,
                  s.detuning_mev, c, trace_err, decouple_err)};
}

Outcome criterion_10() {
  const auto t0 = std::chrono::steady_clock::now();
  const PolaritonModel m{1725.0, 6.1, 6.3, 2.75, 0.0};
  const DetuningCalibration cal{1689.0, 0.8};
  std::vector<double> volts;
  for (int i = 0; i < 8; ++i) volts.push_back(30.0 + 30.0 * i / 7);
  const int trials = 100;
  double g_mean = 0, s_mean = 0, g_sq = 0;
  int g_inside = 0, s_inside = 0;
  for (int seed = 1; seed <= trials; ++seed) {
    const auto obs = synthesize_crossing(m, cal, volts, 0.3, static_cast<std::uint64_t>(seed));
    const auto f = fit_avoided_crossing(obs, 6.3, 6.1, 1725.0);
    g_mean += f.coupling_mev / trials;
    g_sq += f.coupling_mev * f.coupling_mev / trials;
    s_mean += f.calibration.slope_mev_per_volt / trials;
    g_inside += within(f.coupling_mev, 2.75, 0.05);
    s_inside += within(f.calibration.slope_mev_per_volt, 0.8, 0.05);
  }
  const double g_sd = std::sqrt(std::max(0.0, g_sq - g_mean * g_mean));
  const double s = elapsed(t0);
  // Every seed has to land inside the band, as for the finesse fit.
  const bool ok = g_inside == trials && s_inside == trials && s < 60.0;
  return {ok, fmt("%d/100 g and %d/100 slope fits within 5%%; per-trial g sd %.1f%%; mean g %.4f meV (%.2f%%), "
                  "mean slope %.4f meV/V (%.2f%%)",
                  g_inside, s_inside, 100 * g_sd / 2.75, g_mean, 100 * (g_mean / 2.75 - 1), s_mean,
                  100 * (s_mean / 0.8 - 1))};
}

} // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 spatial linewidth", criterion_1},   {"2 spring stage", criterion_2},
      {"3 transmissibility rolloff", criterion_3}, {"4 inversion round trip", criterion_4},
      {"5 Parseval", criterion_5},            {"6 finesse fit", criterion_6},
      {"7 pipeline corridors", criterion_7},  {"8 lock oracle", criterion_8},
      {"9 polariton numbers", criterion_9},   {"10 crossing fit", criterion_10},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s  criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
