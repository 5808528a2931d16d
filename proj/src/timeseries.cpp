#include "cryocav/timeseries.hpp"

#include "cryocav/errors.hpp"

#include <cmath>
#include <string>

namespace cryocav {

std::string_view unit_name(Unit unit) noexcept {
  return unit == Unit::Meter ? "meter" : "transmission";
}

Unit parse_unit(std::string_view text) {
  if (text == "meter") return Unit::Meter;
  if (text == "transmission") return Unit::Transmission;
  throw ValidationError("unknown unit '" + std::string(text) + "' (expected meter|transmission)");
}

TimeSeries::TimeSeries(double dt_s, std::vector<double> values, Unit unit)
    : dt_(dt_s), values_(std::move(values)), unit_(unit) {
  require(std::isfinite(dt_) && dt_ > 0.0, "time series sample interval must be positive");
  require(values_.size() >= 2, "time series needs at least 2 samples");
}

} // namespace cryocav
