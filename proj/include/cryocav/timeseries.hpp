#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace cryocav {

enum class Unit { Meter, Transmission };

std::string_view unit_name(Unit unit) noexcept;
Unit parse_unit(std::string_view text);

/// Uniformly sampled trace. Displacements are in meters, transmissions are
/// normalized to the incident power.
class TimeSeries {
public:
  TimeSeries(double dt_s, std::vector<double> values, Unit unit);

  double dt() const noexcept { return dt_; }
  double sample_rate() const noexcept { return 1.0 / dt_; }
  double duration() const noexcept { return dt_ * static_cast<double>(values_.size()); }
  std::size_t size() const noexcept { return values_.size(); }
  Unit unit() const noexcept { return unit_; }

  std::span<const double> values() const noexcept { return values_; }
  std::vector<double>& mutable_values() noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  bool operator==(const TimeSeries&) const = default;

private:
  double dt_;
  std::vector<double> values_;
  Unit unit_;
};

} // namespace cryocav
