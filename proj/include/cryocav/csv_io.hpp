#pragma once

#include "cryocav/fabry_perot.hpp"
#include "cryocav/polariton.hpp"
#include "cryocav/timeseries.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cryocav {

/// Written as comment lines at the top of every output file.
struct Provenance {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;

  std::string header() const; // "# ..." lines, newline-terminated
};

std::string version_string();

/// `# unit:` and `# dt_s:` comments, then `time_s,value` rows. Values are
/// written in shortest round-trip form, so reading back is bit-exact.
void write_timeseries(const TimeSeries& trace, const std::filesystem::path& path, const Provenance& provenance);

/// Requires a unit comment, the `time_s,value` header and uniform time steps
/// (1 ppm of dt). Errors name the offending line.
TimeSeries read_timeseries(const std::filesystem::path& path);

struct Column {
  std::string name;
  std::span<const double> values;
};

/// Equal-length numeric columns under a provenance header.
void write_table(const std::filesystem::path& path, const Provenance& provenance, std::span<const Column> columns);

/// `z_m,transmission` rows.
std::vector<SweepSample> read_sweep(const std::filesystem::path& path);
void write_sweep(std::span<const SweepSample> samples, const std::filesystem::path& path, const Provenance& provenance);

/// `voltage_v,energy_mev,branch` rows, branch being upper or lower.
std::vector<PeakObservation> read_observations(const std::filesystem::path& path);
void write_observations(std::span<const PeakObservation> observations, const std::filesystem::path& path,
                        const Provenance& provenance);

/// Writes text with the provenance header in front.
void write_text(const std::filesystem::path& path, const Provenance& provenance, const std::string& body);

} // namespace cryocav
