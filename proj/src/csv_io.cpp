#include "cryocav/csv_io.hpp"

#include "cryocav/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#ifndef CRYOCAV_VERSION
#define CRYOCAV_VERSION "0.0.0"
#endif

namespace cryocav {

namespace {

void append(std::string& out, double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, p);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void dump(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Line-by-line reader that keeps 1-based line numbers for error messages.
class Lines {
public:
  Lines(std::string text, std::filesystem::path path) : text_(std::move(text)), path_(std::move(path)) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const auto nl = text_.find('\n', pos_);
    const auto end = nl == std::string::npos ? text_.size() : nl;
    line = std::string_view(text_).substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++number_;
    return true;
  }

  int number() const { return number_; }

  [[noreturn]] void fail(const std::string& message) const {
    throw IoError(path_.string() + ":" + std::to_string(number_) + ": " + message);
  }

private:
  std::string text_;
  std::filesystem::path path_;
  std::size_t pos_ = 0;
  int number_ = 0;
};

double field(Lines& lines, std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || p != end || !std::isfinite(v))
    lines.fail("cannot parse '" + std::string(s) + "' as a number");
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Skips comments, returns the first data-bearing line which must equal
// `header`. Comment lines are handed to `on_comment`.
template <class F>
void expect_header(Lines& lines, std::string_view header, F on_comment) {
  std::string_view line;
  while (lines.next(line)) {
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      on_comment(trim(t.substr(1)));
      continue;
    }
    if (t != header) lines.fail("expected header '" + std::string(header) + "', got '" + std::string(t) + "'");
    return;
  }
  lines.fail("missing header '" + std::string(header) + "'");
}

} // namespace

std::string version_string() { return CRYOCAV_VERSION; }

std::string Provenance::header() const {
  std::string h = "# cryocav " + version_string() + "\n";
  h += "# command: " + command + "\n";
  h += "# config_hash: " + config_hash + "\n";
  h += "# seed: " + std::to_string(seed) + "\n";
  return h;
}

void write_timeseries(const TimeSeries& trace, const std::filesystem::path& path, const Provenance& provenance) {
  std::string out = provenance.header();
  out += "# unit: ";
  out += unit_name(trace.unit());
  out += "\n# dt_s: ";
  append(out, trace.dt());
  out += "\ntime_s,value\n";
  out.reserve(out.size() + trace.size() * 40);
  const auto v = trace.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    append(out, static_cast<double>(i) * trace.dt());
    out += ',';
    append(out, v[i]);
    out += '\n';
  }
  dump(path, out);
}

TimeSeries read_timeseries(const std::filesystem::path& path) {
  Lines lines(slurp(path), path);
  std::optional<Unit> unit;
  std::optional<double> declared_dt;
  expect_header(lines, "time_s,value", [&](std::string_view c) {
    if (c.starts_with("unit:")) {
      try {
        unit = parse_unit(trim(c.substr(5)));
      } catch (const ValidationError& e) {
        lines.fail(e.what());
      }
    } else if (c.starts_with("dt_s:")) {
      declared_dt = field(lines, c.substr(5));
      if (!(*declared_dt > 0.0)) lines.fail("dt_s must be positive");
    }
  });
  if (!unit) lines.fail("missing '# unit: meter|transmission' comment before the header");

  std::vector<double> times, values;
  std::string_view line;
  while (lines.next(line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cols = split(t);
    if (cols.size() != 2) lines.fail("expected 2 columns, got " + std::to_string(cols.size()));
    times.push_back(field(lines, cols[0]));
    values.push_back(field(lines, cols[1]));

    const std::size_t i = times.size() - 1;
    if (i == 1 && !declared_dt) {
      if (!(times[1] > times[0])) lines.fail("time must increase");
      declared_dt = times[1] - times[0];
    }
    if (i >= 1) {
      const double expected = times[0] + static_cast<double>(i) * *declared_dt;
      if (std::abs(times[i] - expected) > 1e-6 * *declared_dt)
        lines.fail("non-uniform sampling: t = " + std::to_string(times[i]) + " s, expected " + std::to_string(expected) + " s");
    }
  }
  if (values.size() < 2) throw IoError(path.string() + ": need at least 2 samples");
  return TimeSeries(*declared_dt, std::move(values), *unit);
}

void write_table(const std::filesystem::path& path, const Provenance& provenance, std::span<const Column> columns) {
  require(!columns.empty(), "write_table: no columns");
  std::string out = provenance.header();
  for (std::size_t c = 0; c < columns.size(); ++c) {
    require(columns[c].values.size() == columns[0].values.size(), "write_table: ragged columns");
    if (c) out += ',';
    out += columns[c].name;
  }
  out += '\n';
  for (std::size_t r = 0; r < columns[0].values.size(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      append(out, columns[c].values[r]);
    }
    out += '\n';
  }
  dump(path, out);
}

std::vector<SweepSample> read_sweep(const std::filesystem::path& path) {
  Lines lines(slurp(path), path);
  expect_header(lines, "z_m,transmission", [](std::string_view) {});
  std::vector<SweepSample> out;
  std::string_view line;
  while (lines.next(line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cols = split(t);
    if (cols.size() != 2) lines.fail("expected 2 columns, got " + std::to_string(cols.size()));
    out.push_back({field(lines, cols[0]), field(lines, cols[1])});
  }
  return out;
}

void write_sweep(std::span<const SweepSample> samples, const std::filesystem::path& path, const Provenance& provenance) {
  std::vector<double> z, t;
  for (const auto& s : samples) {
    z.push_back(s.z_m);
    t.push_back(s.transmission);
  }
  const Column cols[] = {{"z_m", z}, {"transmission", t}};
  write_table(path, provenance, cols);
}

std::vector<PeakObservation> read_observations(const std::filesystem::path& path) {
  Lines lines(slurp(path), path);
  expect_header(lines, "voltage_v,energy_mev,branch", [](std::string_view) {});
  std::vector<PeakObservation> out;
  std::string_view line;
  while (lines.next(line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cols = split(t);
    if (cols.size() != 3) lines.fail("expected 3 columns, got " + std::to_string(cols.size()));
    PeakObservation o{field(lines, cols[0]), field(lines, cols[1]), Branch::Upper};
    try {
      o.branch = parse_branch(trim(cols[2]));
    } catch (const ValidationError& e) {
      lines.fail(e.what());
    }
    out.push_back(o);
  }
  return out;
}

void write_observations(std::span<const PeakObservation> observations, const std::filesystem::path& path,
                        const Provenance& provenance) {
  std::string out = provenance.header();
  out += "voltage_v,energy_mev,branch\n";
  for (const auto& o : observations) {
    append(out, o.voltage_v);
    out += ',';
    append(out, o.energy_mev);
    out += ',';
    out += branch_name(o.branch);
    out += '\n';
  }
  dump(path, out);
}

void write_text(const std::filesystem::path& path, const Provenance& provenance, const std::string& body) {
  dump(path, provenance.header() + body);
}

} // namespace cryocav
