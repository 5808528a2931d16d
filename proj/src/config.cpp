#include "cryocav/config.hpp"

#include "cryocav/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

namespace cryocav {

CavityGeometry CavitySection::geometry() const {
  CavityGeometry g;
  g.wavelength_m = wavelength_nm * 1e-9;
  g.finesse = finesse;
  g.mode_number = mode_number;
  g.peak_transmission = peak_transmission;
  return g;
}

OscillatorStage SpringSection::stage() const {
  return stage_from_spring(spring_constant_n_per_m, springs, payload_kg, damping_ratio, "spring");
}

LockConfig LockSection::lock_config(double sample_rate_hz) const {
  LockConfig c;
  c.kp = kp;
  c.ki = ki;
  c.actuator_cutoff_hz = actuator_cutoff_hz;
  if (notch_hz) c.notch = NotchFilter{*notch_hz, notch_q};
  c.sensor_noise_rms = sensor_noise_rms;
  c.side = side;
  c.sample_rate_hz = sample_rate_hz;
  return c;
}

PolaritonModel PolaritonSection::model() const {
  return {exciton_energy_mev, exciton_linewidth_mev, cavity_linewidth_mev, coupling_mev, 0.0};
}

DetuningCalibration PolaritonSection::calibration() const { return {intercept_mev, slope_mev_per_volt}; }

namespace {

// Thrown by value parsers; turned into a ValidationError with line and key.
struct BadValue {
  std::string why;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const auto start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

double to_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) throw BadValue{"cannot parse '" + std::string(s) + "' as a number"};
  return v;
}

template <class Int>
Int to_integer(std::string_view s) {
  Int v{};
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw BadValue{"cannot parse '" + std::string(s) + "' as an integer"};
  return v;
}

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

template <class Int>
std::string fmt_int(Int v) {
  return std::to_string(v);
}

using Check = std::function<void(double)>;

Check positive() {
  return [](double v) {
    if (!(v > 0.0)) throw BadValue{"must be > 0"};
  };
}
Check non_negative() {
  return [](double v) {
    if (!(v >= 0.0)) throw BadValue{"must be >= 0"};
  };
}
Check any() {
  return [](double) {};
}
Check unit_interval() {
  return [](double v) {
    if (!(v > 0.0 && v <= 1.0)) throw BadValue{"must lie in (0, 1]"};
  };
}

struct Field {
  std::string key;
  bool required = false;
  bool repeated = false;
  std::function<void(std::string_view)> set;
  std::function<std::vector<std::string>()> get; // empty: omitted
};

Field real(std::string key, double& ref, Check check, bool required = false) {
  return {std::move(key), required, false,
          [&ref, check](std::string_view v) {
            const double x = to_double(v);
            check(x);
            ref = x;
          },
          [&ref] { return std::vector<std::string>{fmt(ref)}; }};
}

Field optional_real(std::string key, std::optional<double>& ref, Check check) {
  return {std::move(key), false, false,
          [&ref, check](std::string_view v) {
            const double x = to_double(v);
            check(x);
            ref = x;
          },
          [&ref] { return ref ? std::vector<std::string>{fmt(*ref)} : std::vector<std::string>{}; }};
}

Field integer(std::string key, int& ref, int min_value, bool required = false) {
  return {std::move(key), required, false,
          [&ref, min_value](std::string_view v) {
            const int x = to_integer<int>(v);
            if (x < min_value) throw BadValue{"must be >= " + std::to_string(min_value)};
            ref = x;
          },
          [&ref] { return std::vector<std::string>{fmt_int(ref)}; }};
}

Field text(std::string key, std::optional<std::string>& ref) {
  return {std::move(key), false, false,
          [&ref](std::string_view v) {
            if (v.empty()) throw BadValue{"must not be empty"};
            ref = std::string(v);
          },
          [&ref] { return ref ? std::vector<std::string>{*ref} : std::vector<std::string>{}; }};
}

struct Section {
  std::string name;
  std::vector<Field> fields;
};

// Kick lists are replaced wholesale the first time they appear in a file.
struct KickListState {
  bool modes_set = false;
  bool tones_set = false;
};

std::vector<Section> schema(RunConfig& c, KickListState& kicks) {
  std::vector<Section> s;
  s.push_back({"run",
               {{"seed", false, false, [&c](std::string_view v) { c.run.seed = to_integer<std::uint64_t>(v); },
                 [&c] { return std::vector<std::string>{fmt_int(c.run.seed)}; }},
                real("duration_s", c.run.duration_s, positive()), real("dt_s", c.run.dt_s, positive())}});
  s.push_back({"cavity",
               {real("wavelength_nm", c.cavity.wavelength_nm, positive(), true),
                real("finesse", c.cavity.finesse, [](double v) {
                  if (!(v > 0.5)) throw BadValue{"must be > 0.5"};
                }, true),
                integer("mode_number", c.cavity.mode_number, 1, true),
                real("peak_transmission", c.cavity.peak_transmission, unit_interval())}});
  s.push_back({"spring",
               {real("spring_constant_n_per_m", c.spring.spring_constant_n_per_m, positive()),
                integer("springs", c.spring.springs, 1), real("payload_kg", c.spring.payload_kg, positive()),
                real("damping_ratio", c.spring.damping_ratio, non_negative())}});
  for (auto* stack : {&c.fiber_stack, &c.mirror_stack}) {
    s.push_back({stack == &c.fiber_stack ? "fiber_stack" : "mirror_stack",
                 {real("resonance_hz", stack->resonance_hz, positive()),
                  real("damping_ratio", stack->damping_ratio, non_negative())}});
  }

  auto& k = c.kicks;
  Field mode{"mode", false, true,
             [&k, &kicks](std::string_view v) {
               if (!kicks.modes_set) k.modes.clear();
               kicks.modes_set = true;
               if (v == "none") return;
               const auto w = words(v);
               if (w.size() != 3) throw BadValue{"expected 'frequency_hz amplitude_m decay_time_s'"};
               KickMode m{to_double(w[0]), to_double(w[1]), to_double(w[2])};
               if (!(m.frequency_hz > 0.0 && m.amplitude_m >= 0.0 && m.decay_time_s > 0.0))
                 throw BadValue{"frequency and decay time must be > 0, amplitude >= 0"};
               k.modes.push_back(m);
             },
             [&k] {
               std::vector<std::string> out;
               for (const auto& m : k.modes) out.push_back(fmt(m.frequency_hz) + " " + fmt(m.amplitude_m) + " " + fmt(m.decay_time_s));
               if (out.empty()) out.emplace_back("none");
               return out;
             }};
  Field tone{"tone", false, true,
             [&k, &kicks](std::string_view v) {
               if (!kicks.tones_set) k.tones.clear();
               kicks.tones_set = true;
               if (v == "none") return;
               const auto w = words(v);
               if (w.size() != 2) throw BadValue{"expected 'frequency_hz amplitude_m'"};
               Tone t{to_double(w[0]), to_double(w[1])};
               if (!(t.frequency_hz > 0.0 && t.amplitude_m >= 0.0)) throw BadValue{"frequency must be > 0, amplitude >= 0"};
               k.tones.push_back(t);
             },
             [&k] {
               std::vector<std::string> out;
               for (const auto& t : k.tones) out.push_back(fmt(t.frequency_hz) + " " + fmt(t.amplitude_m));
               if (out.empty()) out.emplace_back("none");
               return out;
             }};
  s.push_back({"kicks",
               {real("period_s", k.period_s, positive()), real("broadband_floor", k.broadband_floor, non_negative()),
                std::move(mode), std::move(tone)}});

  auto& l = c.lock;
  s.push_back({"lock",
               {real("kp", l.kp, non_negative()), real("ki", l.ki, non_negative()),
                real("actuator_cutoff_hz", l.actuator_cutoff_hz, positive()),
                optional_real("notch_hz", l.notch_hz, positive()), real("notch_q", l.notch_q, positive()),
                real("sensor_noise_rms", l.sensor_noise_rms, non_negative()),
                {"side", false, false,
                 [&l](std::string_view v) {
                   if (v == "below")
                     l.side = LockSide::BelowResonance;
                   else if (v == "above")
                     l.side = LockSide::AboveResonance;
                   else
                     throw BadValue{"expected 'below' or 'above'"};
                 },
                 [&l] { return std::vector<std::string>{l.side == LockSide::BelowResonance ? "below" : "above"}; }}}});

  auto& a = c.analysis;
  s.push_back({"analysis",
               {real("bin_width_m", a.bin_width_m, positive()),
                real("spectrum_resolution_hz", a.spectrum_resolution_hz, positive()),
                optional_real("pp_window_s", a.pp_window_s, positive()), integer("bandwidth_points", a.bandwidth_points, 2),
                real("bandwidth_min_hz", a.bandwidth_min_hz, positive()),
                real("tail_threshold_m", a.tail_threshold_m, positive())}});

  auto& p = c.polariton;
  s.push_back({"polariton",
               {real("exciton_energy_mev", p.exciton_energy_mev, any()),
                real("exciton_linewidth_mev", p.exciton_linewidth_mev, positive()),
                real("cavity_linewidth_mev", p.cavity_linewidth_mev, positive()),
                real("coupling_mev", p.coupling_mev, non_negative()), real("intercept_mev", p.intercept_mev, any()),
                real("slope_mev_per_volt", p.slope_mev_per_volt, [](double v) {
                  if (v == 0.0) throw BadValue{"must be non-zero"};
                }),
                real("detuning_span_mev", p.detuning_span_mev, positive())}});

  auto& f = c.fit;
  s.push_back({"fit",
               {integer("trials", f.trials, 1), integer("sweep_points", f.sweep_points, 10),
                real("sweep_span_linewidths", f.sweep_span_linewidths, positive()),
                real("sweep_noise", f.sweep_noise, non_negative()),
                real("crossing_noise_mev", f.crossing_noise_mev, non_negative()),
                real("voltage_min_v", f.voltage_min_v, any()), real("voltage_max_v", f.voltage_max_v, any()),
                integer("voltage_count", f.voltage_count, 3)}});

  s.push_back({"io", {text("input", c.io.input), text("sweep", c.io.sweep), text("observations", c.io.observations)}});
  return s;
}

[[noreturn]] void fail_at(int line, const std::string& message) {
  throw ValidationError("config line " + std::to_string(line) + ": " + message);
}

void cross_check(const RunConfig& c) {
  if (c.run.dt_s >= c.run.duration_s) throw ValidationError("config: [run] dt_s must be smaller than duration_s");
  if (c.fit.voltage_max_v <= c.fit.voltage_min_v)
    throw ValidationError("config: [fit] voltage_max_v must exceed voltage_min_v");
}

std::string write(RunConfig c, bool everything) {
  KickListState state;
  const auto sections = schema(c, state);
  std::ostringstream os;
  bool first = true;
  for (const auto& sec : sections) {
    if (!everything && !c.has(sec.name)) continue;
    if (!first) os << '\n';
    first = false;
    os << '[' << sec.name << "]\n";
    for (const auto& field : sec.fields)
      for (const auto& v : field.get()) os << field.key << " = " << v << '\n';
  }
  return os.str();
}

} // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  KickListState kicks;
  auto sections = schema(c, kicks);

  Section* current = nullptr;
  std::map<std::string, int> seen_keys; // key -> line, current section
  std::map<std::string, int> section_lines;
  auto finish_section = [&](int at_line) {
    if (!current) return;
    for (const auto& f : current->fields)
      if (f.required && !seen_keys.contains(f.key))
        fail_at(at_line, "missing required key '" + f.key + "' in [" + current->name + "]");
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail_at(line_no, "malformed section header '" + std::string(line) + "'");
      finish_section(line_no);
      const std::string name(trim(line.substr(1, line.size() - 2)));
      current = nullptr;
      for (auto& s : sections)
        if (s.name == name) current = &s;
      if (!current) fail_at(line_no, "unknown section [" + name + "]");
      if (section_lines.contains(name))
        fail_at(line_no, "duplicate section [" + name + "] (first at line " + std::to_string(section_lines[name]) + ")");
      section_lines[name] = line_no;
      c.sections.insert(name);
      seen_keys.clear();
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail_at(line_no, "expected 'key = value', got '" + std::string(line) + "'");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (!current) fail_at(line_no, "key '" + key + "' appears before any [section]");

    Field* field = nullptr;
    for (auto& f : current->fields)
      if (f.key == key) field = &f;
    if (!field) fail_at(line_no, "unknown key '" + key + "' in [" + current->name + "]");
    if (!field->repeated && seen_keys.contains(key))
      fail_at(line_no, "duplicate key '" + key + "' (first at line " + std::to_string(seen_keys[key]) + ")");
    seen_keys.emplace(key, line_no);
    if (value.empty()) fail_at(line_no, "key '" + key + "' has no value");
    try {
      field->set(value);
    } catch (const BadValue& e) {
      fail_at(line_no, "key '" + key + "': " + e.why);
    }
  }
  finish_section(line_no);

  try {
    c.kicks.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("config [kicks]: ") + e.what());
  }
  cross_check(c);
  return c;
}

std::string serialize_config(const RunConfig& config) { return write(config, false); }

std::string serialize_resolved_config(const RunConfig& config) { return write(config, true); }

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : serialize_resolved_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace cryocav
