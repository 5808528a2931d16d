#include "cryocav/pipeline.hpp"

#include "cryocav/csv_io.hpp"
#include "cryocav/errors.hpp"
#include "cryocav/fabry_perot.hpp"
#include "cryocav/lockloop.hpp"
#include "cryocav/mechanics.hpp"
#include "cryocav/polariton.hpp"
#include "cryocav/signal_analysis.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>

namespace cryocav {

namespace {

constexpr std::array<std::string_view, 7> names = {"synth", "convert", "lock", "analyze", "fit-finesse", "fit-polariton",
                                                   "report"};

std::string num(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

class Summary {
public:
  void add(std::string key, double v) { entries_.emplace_back(std::move(key), num(v)); }
  void add(std::string key, std::string v) { entries_.emplace_back(std::move(key), std::move(v)); }
  void add(std::string key, std::size_t v) { entries_.emplace_back(std::move(key), std::to_string(v)); }
  void warn(std::string w) { warnings_.push_back(std::move(w)); }

  std::string render() const {
    std::string out;
    for (const auto& w : warnings_) out += "# warning: " + w + "\n";
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
  }

private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::string> warnings_;
};

struct Context {
  const RunConfig& config;
  const RunOptions& options;
  Provenance provenance;
  Summary summary;
  std::vector<std::filesystem::path> files;

  std::filesystem::path out(const std::string& name) {
    files.push_back(options.out_dir / name);
    return files.back();
  }
  std::filesystem::path in(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : options.base_dir / path;
  }
  void need(std::string_view section, std::string_view command) const {
    if (!config.has(section))
      throw ValidationError("command '" + std::string(command) + "' needs a [" + std::string(section) + "] section");
  }
  void trace(const TimeSeries& t, const std::string& name) { write_timeseries(t, out(name), provenance); }
};

// Runs body(i) for i in [0, n) on up to `workers` threads. Each index owns its
// own output slot, so the result does not depend on scheduling.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) { return seed * 1000003ULL + trial; }

KickRecipe recipe(const RunConfig& c) {
  KickRecipe r = c.kicks;
  r.seed = c.run.seed;
  return r;
}

struct Synthesized {
  TimeSeries cold_plate;
  CavityNoise noise;
};

Synthesized synthesize(Context& ctx) {
  const auto& c = ctx.config;
  auto cold = kick_train(recipe(c), c.run.duration_s, c.run.dt_s);
  const OscillatorStage fiber{c.fiber_stack.resonance_hz, c.fiber_stack.damping_ratio, "fiber_stack"};
  const OscillatorStage mirror{c.mirror_stack.resonance_hz, c.mirror_stack.damping_ratio, "mirror_stack"};
  auto noise = cavity_noise(cold, c.spring.stage(), fiber, mirror);
  for (const auto& w : noise.warnings) ctx.summary.warn(w);
  return {std::move(cold), std::move(noise)};
}

struct Metrics {
  double rms;
  double pp;
  std::size_t tails;
};

// Writes the curve, spectrum and histogram CSVs for one displacement trace.
Metrics analyze_trace(Context& ctx, const TimeSeries& t, const std::string& prefix) {
  const auto& a = ctx.config.analysis;
  const double nyquist = 0.5 * t.sample_rate();
  require(a.bandwidth_min_hz < nyquist, "[analysis] bandwidth_min_hz must lie below Nyquist");
  const auto grid = log_frequency_grid(a.bandwidth_min_hz, nyquist, static_cast<std::size_t>(a.bandwidth_points));
  const auto curve = rms_vs_bandwidth(t, grid);
  const Column curve_cols[] = {{"bandwidth_hz", curve.bandwidths_hz}, {"rms_m", curve.rms_m}};
  write_table(ctx.out(prefix + "rms_vs_bandwidth.csv"), ctx.provenance, curve_cols);

  const auto spec = amplitude_spectrum(t, a.spectrum_resolution_hz);
  const Column spec_cols[] = {{"frequency_hz", spec.frequencies_hz}, {"amplitude_m", spec.amplitudes_m}};
  write_table(ctx.out(prefix + "spectrum.csv"), ctx.provenance, spec_cols);

  const auto hist = occurrence_histogram(t, a.bin_width_m);
  std::vector<double> counts(hist.counts.begin(), hist.counts.end());
  const Column hist_cols[] = {{"center_m", hist.centers}, {"count", counts}};
  write_table(ctx.out(prefix + "histogram.csv"), ctx.provenance, hist_cols);

  Metrics m{rms(t), peak_to_peak(t), hist.count_beyond(a.tail_threshold_m)};
  ctx.summary.add(prefix + "rms_m", m.rms);
  ctx.summary.add(prefix + "pp_m", m.pp);
  if (a.pp_window_s) ctx.summary.add(prefix + "pp_windowed_m", peak_to_peak(t, a.pp_window_s));
  ctx.summary.add(prefix + "tail_count", m.tails);
  return m;
}

void cmd_synth(Context& ctx) {
  const auto s = synthesize(ctx);
  ctx.trace(s.cold_plate, "cold_plate.csv");
  ctx.trace(s.noise.table, "spring_table.csv");
  ctx.trace(s.noise.length, "cavity_length.csv");
  ctx.summary.add("spring_resonance_hz", ctx.config.spring.stage().resonance_hz);
  ctx.summary.add("cold_plate_rms_m", rms(s.cold_plate));
  ctx.summary.add("cold_plate_pp_m", peak_to_peak(s.cold_plate));
  ctx.summary.add("cavity_rms_m", rms(s.noise.length));
  ctx.summary.add("cavity_pp_m", peak_to_peak(s.noise.length));
}

void cmd_convert(Context& ctx) {
  ctx.need("cavity", "convert");
  if (!ctx.config.io.input) throw ValidationError("command 'convert' needs [io] input");
  const auto geom = ctx.config.cavity.geometry();
  const auto lp = find_lock_point(geom, ctx.config.lock.side);
  const auto trace = read_timeseries(ctx.in(*ctx.config.io.input));
  ctx.summary.add("lock_offset_m", lp.offset_m);
  ctx.summary.add("lock_transmission", lp.transmission);
  ctx.summary.add("lock_slope_per_m", lp.slope_per_m);
  if (trace.unit() == Unit::Transmission) {
    const auto conv = transmission_to_displacement(trace, geom, lp);
    ctx.trace(conv.displacement, "displacement.csv");
    ctx.summary.add("out_of_band_samples", conv.out_of_band_count);
    if (conv.out_of_band_count)
      ctx.summary.warn(std::to_string(conv.out_of_band_count) + " samples outside the linear readout band");
    ctx.summary.add("displacement_rms_m", rms(conv.displacement));
  } else {
    const auto t = displacement_to_transmission(trace, geom, lp);
    ctx.trace(t, "transmission.csv");
    ctx.summary.add("transmission_mean", std::accumulate(t.values().begin(), t.values().end(), 0.0) / t.size());
  }
}

struct LockRun {
  TimeSeries disturbance;
  LockResult result;
};

LockRun lock_stage(Context& ctx, std::optional<TimeSeries> disturbance) {
  const auto& c = ctx.config;
  const auto geom = c.cavity.geometry();
  if (!disturbance) disturbance = synthesize(ctx).noise.length;
  const auto lc = c.lock.lock_config(disturbance->sample_rate());
  auto result = simulate_lock(*disturbance, geom, lc, c.run.seed);
  ctx.summary.add("spatial_linewidth_m", geom.spatial_linewidth_m());
  ctx.summary.add("lock_transmission", result.lock_point.transmission);
  ctx.summary.add("lock_slope_per_m", result.lock_point.slope_per_m);
  if (lc.kp > 0.0 || lc.ki > 0.0) {
    ctx.summary.add("unity_gain_hz", unity_gain_frequency(lc));
    ctx.summary.add("phase_margin_deg", phase_margin_deg(lc));
  }
  return {std::move(*disturbance), std::move(result)};
}

void cmd_lock(Context& ctx) {
  ctx.need("cavity", "lock");
  std::optional<TimeSeries> input;
  if (ctx.config.io.input) {
    input = read_timeseries(ctx.in(*ctx.config.io.input));
    if (input->unit() != Unit::Meter) throw ValidationError("command 'lock' needs a length trace (unit meter)");
  }
  const auto run = lock_stage(ctx, std::move(input));
  if (!ctx.config.io.input) ctx.trace(run.disturbance, "cavity_length.csv");
  ctx.trace(run.result.residual, "locked_residual.csv");
  ctx.trace(run.result.actuator, "actuator.csv");
  const double u = rms(run.disturbance), l = rms(run.result.residual);
  ctx.summary.add("unlocked_rms_m", u);
  ctx.summary.add("locked_rms_m", l);
  ctx.summary.add("rms_ratio", l / u);
}

void cmd_analyze(Context& ctx) {
  if (!ctx.config.io.input) throw ValidationError("command 'analyze' needs [io] input");
  auto trace = read_timeseries(ctx.in(*ctx.config.io.input));
  if (trace.unit() == Unit::Transmission) {
    ctx.need("cavity", "analyze (transmission input)");
    const auto geom = ctx.config.cavity.geometry();
    auto conv = transmission_to_displacement(trace, geom, find_lock_point(geom, ctx.config.lock.side));
    ctx.summary.add("out_of_band_samples", conv.out_of_band_count);
    trace = std::move(conv.displacement);
  }
  ctx.summary.add("samples", trace.size());
  ctx.summary.add("duration_s", trace.duration());
  analyze_trace(ctx, trace, "");
}

void cmd_fit_finesse(Context& ctx) {
  ctx.need("cavity", "fit-finesse");
  const auto& c = ctx.config;
  const auto geom = c.cavity.geometry();
  if (c.io.sweep) {
    const auto samples = read_sweep(ctx.in(*c.io.sweep));
    const auto fit = fit_resonance(samples, geom.wavelength_m);
    ctx.summary.add("finesse", fit.finesse);
    ctx.summary.add("peak_transmission", fit.peak_transmission);
    ctx.summary.add("resonance_length_m", fit.resonance_length_m);
    ctx.summary.add("spatial_linewidth_m", fit.spatial_linewidth_m(geom.wavelength_m));
    ctx.summary.add("rms_residual", fit.rms_residual);
    ctx.summary.add("iterations", static_cast<std::size_t>(fit.iterations));
    return;
  }

  const double span = c.fit.sweep_span_linewidths * geom.spatial_linewidth_m();
  const auto clean = synthesize_sweep(geom, span, c.fit.sweep_points, 0.0, c.run.seed);
  write_sweep(clean, ctx.out("sweep_noiseless.csv"), ctx.provenance);
  ctx.summary.add("true_finesse", geom.finesse);
  ctx.summary.add("noiseless_finesse", fit_resonance(clean, geom.wavelength_m).finesse);

  const auto trials = static_cast<std::size_t>(c.fit.trials);
  std::vector<double> finesse(trials);
  parallel_for(trials, ctx.options.parallel, [&](std::size_t i) {
    const auto s = synthesize_sweep(geom, span, c.fit.sweep_points, c.fit.sweep_noise, trial_seed(c.run.seed, i));
    finesse[i] = fit_resonance(s, geom.wavelength_m).finesse;
  });
  double mean = 0.0, worst = 0.0;
  for (const double f : finesse) {
    mean += f / static_cast<double>(trials);
    worst = std::max(worst, std::abs(f / geom.finesse - 1.0));
  }
  double var = 0.0;
  for (const double f : finesse) var += (f - mean) * (f - mean) / static_cast<double>(trials);
  const Column cols[] = {{"finesse", finesse}};
  write_table(ctx.out("finesse_trials.csv"), ctx.provenance, cols);
  ctx.summary.add("trials", trials);
  ctx.summary.add("sweep_noise", c.fit.sweep_noise);
  ctx.summary.add("finesse_mean", mean);
  ctx.summary.add("finesse_std", std::sqrt(var));
  ctx.summary.add("finesse_max_rel_error", worst);
}

void report_crossing(Context& ctx, const CrossingFit& fit, const PolaritonSection& p) {
  PolaritonModel m = p.model();
  m.coupling_mev = fit.coupling_mev;
  const auto s = normal_mode_splitting(m, -p.detuning_span_mev, p.detuning_span_mev);
  ctx.summary.add("coupling_mev", fit.coupling_mev);
  ctx.summary.add("intercept_mev", fit.calibration.intercept_mev);
  ctx.summary.add("slope_mev_per_volt", fit.calibration.slope_mev_per_volt);
  ctx.summary.add("rms_residual_mev", fit.rms_residual_mev);
  ctx.summary.add("splitting_mev", s.splitting_mev);
  ctx.summary.add("cooperativity", cooperativity(s.splitting_mev, p.cavity_linewidth_mev, p.exciton_linewidth_mev));
  for (const auto& w : fit.warnings) ctx.summary.warn(w);
}

void cmd_fit_polariton(Context& ctx) {
  const auto& c = ctx.config;
  const auto& p = c.polariton;
  const auto model = p.model();
  if (c.io.observations) {
    const auto obs = read_observations(ctx.in(*c.io.observations));
    const auto fit = fit_avoided_crossing(obs, p.cavity_linewidth_mev, p.exciton_linewidth_mev, p.exciton_energy_mev);
    report_crossing(ctx, fit, p);
    return;
  }

  const auto s = normal_mode_splitting(model, -p.detuning_span_mev, p.detuning_span_mev);
  ctx.summary.add("model_splitting_mev", s.splitting_mev);
  ctx.summary.add("model_splitting_detuning_mev", s.detuning_mev);
  ctx.summary.add("model_cooperativity", cooperativity(s.splitting_mev, p.cavity_linewidth_mev, p.exciton_linewidth_mev));

  std::vector<double> volts(static_cast<std::size_t>(c.fit.voltage_count));
  for (std::size_t i = 0; i < volts.size(); ++i)
    volts[i] = c.fit.voltage_min_v + (c.fit.voltage_max_v - c.fit.voltage_min_v) * static_cast<double>(i) /
                                         static_cast<double>(volts.size() - 1);
  write_observations(synthesize_crossing(model, p.calibration(), volts, c.fit.crossing_noise_mev, c.run.seed),
                     ctx.out("observations.csv"), ctx.provenance);

  const auto trials = static_cast<std::size_t>(c.fit.trials);
  std::vector<double> g(trials), slope(trials), intercept(trials);
  parallel_for(trials, ctx.options.parallel, [&](std::size_t i) {
    const auto obs = synthesize_crossing(model, p.calibration(), volts, c.fit.crossing_noise_mev, trial_seed(c.run.seed, i));
    const auto fit = fit_avoided_crossing(obs, p.cavity_linewidth_mev, p.exciton_linewidth_mev, p.exciton_energy_mev);
    g[i] = fit.coupling_mev;
    slope[i] = fit.calibration.slope_mev_per_volt;
    intercept[i] = fit.calibration.intercept_mev;
  });
  auto stats = [&](const std::vector<double>& v, double truth, const std::string& key) {
    double mean = 0.0, worst = 0.0, var = 0.0;
    for (const double x : v) mean += x / static_cast<double>(v.size());
    for (const double x : v) {
      var += (x - mean) * (x - mean) / static_cast<double>(v.size());
      worst = std::max(worst, std::abs(x / truth - 1.0));
    }
    ctx.summary.add(key + "_mean", mean);
    ctx.summary.add(key + "_std", std::sqrt(var));
    ctx.summary.add(key + "_mean_rel_error", std::abs(mean / truth - 1.0));
    ctx.summary.add(key + "_max_rel_error", worst);
  };
  const Column cols[] = {{"coupling_mev", g}, {"intercept_mev", intercept}, {"slope_mev_per_volt", slope}};
  write_table(ctx.out("crossing_trials.csv"), ctx.provenance, cols);
  ctx.summary.add("trials", trials);
  stats(g, p.coupling_mev, "coupling");
  stats(slope, p.slope_mev_per_volt, "slope");
}

void cmd_report(Context& ctx) {
  ctx.need("cavity", "report");
  const auto s = synthesize(ctx);
  ctx.summary.add("spring_resonance_hz", ctx.config.spring.stage().resonance_hz);
  ctx.summary.add("cold_plate_rms_m", rms(s.cold_plate));
  ctx.summary.add("cold_plate_pp_m", peak_to_peak(s.cold_plate));
  const auto run = lock_stage(ctx, s.noise.length);
  ctx.trace(run.disturbance, "cavity_length.csv");
  ctx.trace(run.result.residual, "locked_residual.csv");
  const auto u = analyze_trace(ctx, run.disturbance, "unlocked_");
  const auto l = analyze_trace(ctx, run.result.residual, "locked_");
  ctx.summary.add("rms_ratio", l.rms / u.rms);
  ctx.summary.add("reduction_percent", 100.0 * (1.0 - l.rms / u.rms));
}

} // namespace

std::span<const std::string_view> command_names() { return names; }

std::string usage_text() {
  std::string u = "usage: cryocav <command> [--config FILE] [--seed N] [--out DIR] [--parallel N]\ncommands:";
  for (const auto n : names) u += " " + std::string(n);
  return u + "\n";
}

RunOutcome run(std::string_view command, RunConfig config, const RunOptions& options) {
  RunOutcome outcome;
  if (std::find(names.begin(), names.end(), command) == names.end()) {
    outcome.exit_code = 1;
    outcome.error = "error: usage: unknown command '" + std::string(command) + "'";
    outcome.summary = usage_text();
    return outcome;
  }
  if (options.seed) config.run.seed = *options.seed;

  Context ctx{config, options, {std::string(command), config_hash(config), config.run.seed}, {}, {}};
  try {
    if (command == "synth") cmd_synth(ctx);
    else if (command == "convert") cmd_convert(ctx);
    else if (command == "lock") cmd_lock(ctx);
    else if (command == "analyze") cmd_analyze(ctx);
    else if (command == "fit-finesse") cmd_fit_finesse(ctx);
    else if (command == "fit-polariton") cmd_fit_polariton(ctx);
    else cmd_report(ctx);

    std::string echo;
    std::istringstream resolved(serialize_resolved_config(config));
    for (std::string line; std::getline(resolved, line);)
      if (!line.empty()) echo += "# " + line + "\n";
    outcome.summary = ctx.summary.render();
    write_text(ctx.out("summary.txt"), ctx.provenance, echo + outcome.summary);
  } catch (const FitFailure& e) {
    outcome.exit_code = 2;
    outcome.error = std::string("error: fit: ") + e.what();
  } catch (const NumericalError& e) {
    outcome.exit_code = 2;
    outcome.error = std::string("error: numerical: ") + e.what();
  } catch (const ValidationError& e) {
    outcome.exit_code = 1;
    outcome.error = std::string("error: validation: ") + e.what();
  } catch (const IoError& e) {
    outcome.exit_code = 1;
    outcome.error = std::string("error: io: ") + e.what();
  } catch (const std::exception& e) {
    outcome.exit_code = 1;
    outcome.error = std::string("error: internal: ") + e.what();
  }
  outcome.files = std::move(ctx.files);
  return outcome;
}

} // namespace cryocav
