#include "cryocav/cryocav.h"

#include "cryocav/config.hpp"
#include "cryocav/csv_io.hpp"
#include "cryocav/errors.hpp"
#include "cryocav/fabry_perot.hpp"
#include "cryocav/lockloop.hpp"
#include "cryocav/mechanics.hpp"
#include "cryocav/pipeline.hpp"
#include "cryocav/polariton.hpp"
#include "cryocav/signal_analysis.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

struct cryocav_config {
  cryocav::RunConfig value;
};

struct cryocav_trace {
  cryocav::TimeSeries value;
};

namespace {

thread_local std::string last_error;

template <class F>
cryocav_status guarded(F&& f) noexcept {
  try {
    f();
    last_error.clear();
    return CRYOCAV_OK;
  } catch (const cryocav::ValidationError& e) {
    last_error = e.what();
    return CRYOCAV_ERR_VALIDATION;
  } catch (const cryocav::NumericalError& e) {
    last_error = e.what();
    return CRYOCAV_ERR_NUMERICAL;
  } catch (const cryocav::IoError& e) {
    last_error = e.what();
    return CRYOCAV_ERR_IO;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CRYOCAV_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return CRYOCAV_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw cryocav::ValidationError(std::string(what) + " is null");
}

char* dup(const std::string& s) {
  auto* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

cryocav::CavityGeometry geometry(const cryocav_cavity* c) {
  need(c, "cavity");
  cryocav::CavityGeometry g;
  g.wavelength_m = c->wavelength_m;
  g.finesse = c->finesse;
  g.mode_number = c->mode_number;
  g.peak_transmission = c->peak_transmission;
  g.validate();
  return g;
}

cryocav::LockSide side(cryocav_lock_side s) {
  if (s == CRYOCAV_BELOW_RESONANCE) return cryocav::LockSide::BelowResonance;
  if (s == CRYOCAV_ABOVE_RESONANCE) return cryocav::LockSide::AboveResonance;
  throw cryocav::ValidationError("unknown lock side");
}

cryocav::LockConfig lock_config(const cryocav_lock_config* c) {
  need(c, "lock config");
  cryocav::LockConfig l;
  l.kp = c->kp;
  l.ki = c->ki;
  l.actuator_cutoff_hz = c->actuator_cutoff_hz;
  if (c->notch_hz > 0.0) l.notch = cryocav::NotchFilter{c->notch_hz, c->notch_q};
  l.sensor_noise_rms = c->sensor_noise_rms;
  l.side = side(c->side);
  l.sample_rate_hz = c->sample_rate_hz;
  return l;
}

cryocav::PolaritonModel model(const cryocav_polariton* p) {
  need(p, "polariton model");
  return {p->exciton_energy_mev, p->exciton_linewidth_mev, p->cavity_linewidth_mev, p->coupling_mev, p->detuning_mev};
}

cryocav::OscillatorStage stage(const cryocav_stage* s) {
  need(s, "stage");
  cryocav::OscillatorStage o{s->resonance_hz, s->damping_ratio, "stage"};
  o.validate();
  return o;
}

cryocav_trace* wrap(cryocav::TimeSeries t) { return new cryocav_trace{std::move(t)}; }

} // namespace

extern "C" {

const char* cryocav_version(void) {
  static const std::string v = cryocav::version_string();
  return v.c_str();
}

const char* cryocav_last_error(void) { return last_error.c_str(); }

void cryocav_string_free(char* s) { std::free(s); }

cryocav_status cryocav_config_parse(const char* text, cryocav_config** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new cryocav_config{cryocav::parse_config(text)};
  });
}

cryocav_status cryocav_config_load(const char* path, cryocav_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw cryocav::IoError(std::string("cannot open config ") + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    *out = new cryocav_config{cryocav::parse_config(ss.str())};
  });
}

cryocav_status cryocav_config_default(cryocav_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new cryocav_config{};
  });
}

void cryocav_config_free(cryocav_config* config) { delete config; }

cryocav_status cryocav_config_serialize(const cryocav_config* config, char** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    *out = dup(cryocav::serialize_config(config->value));
  });
}

cryocav_status cryocav_config_hash(const cryocav_config* config, char out[17]) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    const auto h = cryocav::config_hash(config->value);
    std::memcpy(out, h.c_str(), 17);
  });
}

cryocav_status cryocav_run(const char* command, const cryocav_config* config, const cryocav_run_options* options,
                           cryocav_run_result* result) {
  return guarded([&] {
    need(command, "command");
    need(result, "result");
    result->summary = nullptr;
    result->error = nullptr;
    cryocav::RunOptions opts;
    if (options) {
      if (options->out_dir) opts.out_dir = options->out_dir;
      if (options->base_dir) opts.base_dir = options->base_dir;
      if (options->has_seed) opts.seed = options->seed;
      opts.parallel = options->parallel == 0 ? 1 : options->parallel;
    }
    const auto outcome = cryocav::run(command, config ? config->value : cryocav::RunConfig{}, opts);
    result->exit_code = outcome.exit_code;
    result->summary = dup(outcome.summary);
    result->error = dup(outcome.error);
  });
}

const char* cryocav_usage(void) {
  static const std::string u = cryocav::usage_text();
  return u.c_str();
}

cryocav_status cryocav_trace_create(double dt_s, const double* values, size_t count, cryocav_unit unit,
                                    cryocav_trace** out) {
  return guarded([&] {
    need(values, "values");
    need(out, "out");
    if (unit != CRYOCAV_UNIT_METER && unit != CRYOCAV_UNIT_TRANSMISSION) throw cryocav::ValidationError("unknown unit");
    *out = wrap(cryocav::TimeSeries(dt_s, std::vector<double>(values, values + count),
                                    unit == CRYOCAV_UNIT_METER ? cryocav::Unit::Meter : cryocav::Unit::Transmission));
  });
}

void cryocav_trace_free(cryocav_trace* trace) { delete trace; }
size_t cryocav_trace_size(const cryocav_trace* trace) { return trace ? trace->value.size() : 0; }
double cryocav_trace_dt(const cryocav_trace* trace) { return trace ? trace->value.dt() : 0.0; }
cryocav_unit cryocav_trace_unit(const cryocav_trace* trace) {
  return trace && trace->value.unit() == cryocav::Unit::Transmission ? CRYOCAV_UNIT_TRANSMISSION : CRYOCAV_UNIT_METER;
}
const double* cryocav_trace_values(const cryocav_trace* trace) { return trace ? trace->value.values().data() : nullptr; }

cryocav_status cryocav_trace_read(const char* path, cryocav_trace** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap(cryocav::read_timeseries(path));
  });
}

cryocav_status cryocav_trace_write(const cryocav_trace* trace, const char* path) {
  return guarded([&] {
    need(trace, "trace");
    need(path, "path");
    cryocav::write_timeseries(trace->value, path, {"capi", "none", 0});
  });
}

void cryocav_cavity_default(cryocav_cavity* out) {
  if (!out) return;
  const cryocav::CavityGeometry g;
  *out = {g.wavelength_m, g.finesse, g.mode_number, g.peak_transmission};
}

cryocav_status cryocav_spatial_linewidth(double finesse, double wavelength_m, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = cryocav::finesse_to_spatial_linewidth(finesse, wavelength_m);
  });
}

cryocav_status cryocav_transmission(const cryocav_cavity* cavity, double z_m, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = cryocav::transmission(z_m, geometry(cavity));
  });
}

cryocav_status cryocav_find_lock_point(const cryocav_cavity* cavity, cryocav_lock_side s, cryocav_lock_point* out) {
  return guarded([&] {
    need(out, "out");
    const auto lp = cryocav::find_lock_point(geometry(cavity), side(s));
    *out = {lp.offset_m, lp.transmission, lp.slope_per_m};
  });
}

cryocav_status cryocav_fit_resonance(const double* z_m, const double* transmission, size_t count, double wavelength_m,
                                     cryocav_resonance_fit* out) {
  return guarded([&] {
    need(z_m, "z_m");
    need(transmission, "transmission");
    need(out, "out");
    std::vector<cryocav::SweepSample> samples(count);
    for (size_t i = 0; i < count; ++i) samples[i] = {z_m[i], transmission[i]};
    const auto f = cryocav::fit_resonance(samples, wavelength_m);
    *out = {f.peak_transmission, f.resonance_length_m, f.finesse, f.rms_residual, f.iterations};
  });
}

cryocav_status cryocav_stage_from_spring(double k, int springs, double payload_kg, double damping_ratio,
                                         cryocav_stage* out) {
  return guarded([&] {
    need(out, "out");
    const auto s = cryocav::stage_from_spring(k, springs, payload_kg, damping_ratio);
    *out = {s.resonance_hz, s.damping_ratio};
  });
}

cryocav_status cryocav_transmissibility(const cryocav_stage* s, double f_hz, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = cryocav::transmissibility(stage(s), f_hz);
  });
}

cryocav_status cryocav_default_cold_plate(uint64_t seed, double duration_s, double dt_s, cryocav_trace** out) {
  return guarded([&] {
    need(out, "out");
    auto recipe = cryocav::default_cold_plate_recipe();
    recipe.seed = seed;
    *out = wrap(cryocav::kick_train(recipe, duration_s, dt_s));
  });
}

cryocav_status cryocav_apply_stage(const cryocav_trace* input, const cryocav_stage* s, cryocav_trace** out) {
  return guarded([&] {
    need(input, "input");
    need(out, "out");
    *out = wrap(cryocav::apply_stage(input->value, stage(s)));
  });
}

cryocav_status cryocav_rms(const cryocav_trace* trace, double* out) {
  return guarded([&] {
    need(trace, "trace");
    need(out, "out");
    *out = cryocav::rms(trace->value);
  });
}

cryocav_status cryocav_peak_to_peak(const cryocav_trace* trace, double window_s, double* out) {
  return guarded([&] {
    need(trace, "trace");
    need(out, "out");
    *out = window_s > 0.0 ? cryocav::peak_to_peak(trace->value, window_s) : cryocav::peak_to_peak(trace->value);
  });
}

void cryocav_lock_config_default(cryocav_lock_config* out) {
  if (!out) return;
  const cryocav::LockConfig c;
  *out = {c.kp, c.ki, c.actuator_cutoff_hz, 0.0, 10.0, c.sensor_noise_rms, CRYOCAV_BELOW_RESONANCE, c.sample_rate_hz};
}

cryocav_status cryocav_unity_gain_frequency(const cryocav_lock_config* config, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = cryocav::unity_gain_frequency(lock_config(config));
  });
}

cryocav_status cryocav_simulate_lock(const cryocav_trace* disturbance, const cryocav_cavity* cavity,
                                     const cryocav_lock_config* config, uint64_t seed, cryocav_trace** residual,
                                     cryocav_trace** actuator) {
  return guarded([&] {
    need(disturbance, "disturbance");
    need(residual, "residual");
    auto r = cryocav::simulate_lock(disturbance->value, geometry(cavity), lock_config(config), seed);
    *residual = wrap(std::move(r.residual));
    if (actuator) *actuator = wrap(std::move(r.actuator));
  });
}

cryocav_status cryocav_polariton_eigenenergies(const cryocav_polariton* p, double out[4]) {
  return guarded([&] {
    need(out, "out");
    const auto e = cryocav::polariton_eigenenergies(model(p));
    out[0] = e.upper.real();
    out[1] = e.upper.imag();
    out[2] = e.lower.real();
    out[3] = e.lower.imag();
  });
}

cryocav_status cryocav_normal_mode_splitting(const cryocav_polariton* p, double dmin, double dmax, double* splitting,
                                             double* detuning) {
  return guarded([&] {
    need(splitting, "splitting");
    const auto s = cryocav::normal_mode_splitting(model(p), dmin, dmax);
    *splitting = s.splitting_mev;
    if (detuning) *detuning = s.detuning_mev;
  });
}

cryocav_status cryocav_cooperativity(double splitting_mev, double kappa_mev, double gamma_mev, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = cryocav::cooperativity(splitting_mev, kappa_mev, gamma_mev);
  });
}

} // extern "C"
