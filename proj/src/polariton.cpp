#include "cryocav/polariton.hpp"

#include "cryocav/errors.hpp"
#include "cryocav/least_squares.hpp"
#include "random.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>

namespace cryocav {

namespace {

using cplx = std::complex<double>;

struct Eigen2 {
  cplx mean;
  cplx root; // principal sqrt(h^2 + g^2), Re >= 0
  cplx h;
};

Eigen2 solve(double cavity_mev, double exciton_mev, double kappa, double gamma, double g) {
  const cplx a(cavity_mev, -0.5 * kappa);
  const cplx b(exciton_mev, -0.5 * gamma);
  const cplx h = 0.5 * (a - b);
  return {0.5 * (a + b), std::sqrt(h * h + g * g), h};
}

} // namespace

void PolaritonModel::validate() const {
  require(std::isfinite(exciton_energy_mev), "polariton: exciton energy must be finite");
  require(std::isfinite(detuning_mev), "polariton: detuning must be finite");
  require(exciton_linewidth_mev > 0.0, "polariton: exciton linewidth must be > 0");
  require(cavity_linewidth_mev > 0.0, "polariton: cavity linewidth must be > 0");
  require(std::isfinite(coupling_mev) && coupling_mev >= 0.0, "polariton: coupling must be >= 0");
}

PolaritonEnergies polariton_eigenenergies(const PolaritonModel& m) {
  m.validate();
  const auto s = solve(m.cavity_energy_mev(), m.exciton_energy_mev, m.cavity_linewidth_mev, m.exciton_linewidth_mev,
                       m.coupling_mev);
  return {s.mean + s.root, s.mean - s.root};
}

double branch_separation(const PolaritonModel& model) {
  const auto e = polariton_eigenenergies(model);
  return e.upper.real() - e.lower.real();
}

SplittingMinimum normal_mode_splitting(const PolaritonModel& model, double detuning_min_mev,
                                       double detuning_max_mev) {
  model.validate();
  require(detuning_min_mev < 0.0 && detuning_max_mev > 0.0, "normal_mode_splitting: range must bracket zero detuning");
  PolaritonModel probe = model;
  auto sep = [&](double d) {
    probe.detuning_mev = d;
    return branch_separation(probe);
  };
  const auto [at, value] =
      boost::math::tools::brent_find_minima(sep, detuning_min_mev, detuning_max_mev, std::numeric_limits<double>::digits / 2);
  const double edge = 1e-6 * (detuning_max_mev - detuning_min_mev);
  if (at - detuning_min_mev < edge || detuning_max_mev - at < edge)
    throw NumericalError("normal_mode_splitting: minimum lies on the range boundary");
  return {value, at};
}

double cooperativity(double splitting_mev, double kappa_mev, double gamma_mev) {
  require(std::isfinite(splitting_mev) && splitting_mev >= 0.0, "cooperativity: splitting must be >= 0");
  require(kappa_mev > 0.0 && gamma_mev > 0.0, "cooperativity: linewidths must be > 0");
  return 2.0 * splitting_mev * splitting_mev / (kappa_mev * gamma_mev);
}

HopfieldFractions photonic_fractions(double detuning_mev, double coupling_mev) {
  require(coupling_mev >= 0.0, "photonic_fractions: coupling must be >= 0");
  const double norm = std::hypot(detuning_mev, 2.0 * coupling_mev);
  if (norm == 0.0) return {0.5, 0.5};
  const double x = detuning_mev / norm;
  return {0.5 * (1.0 + x), 0.5 * (1.0 - x)};
}

void DetuningCalibration::validate() const {
  require(std::isfinite(intercept_mev), "calibration: intercept must be finite");
  require(std::isfinite(slope_mev_per_volt) && slope_mev_per_volt != 0.0, "calibration: slope must be non-zero");
}

TransmissionMap synthesize_transmission_map(const PolaritonModel& model, const DetuningCalibration& calibration,
                                            std::span<const double> voltages_v, std::span<const double> energies_mev) {
  model.validate();
  calibration.validate();
  auto ascending = [](std::span<const double> g) {
    return !g.empty() && std::adjacent_find(g.begin(), g.end(), std::greater_equal<>()) == g.end();
  };
  require(ascending(voltages_v), "transmission map: voltage grid must be non-empty and strictly ascending");
  require(ascending(energies_mev), "transmission map: energy grid must be non-empty and strictly ascending");

  TransmissionMap map;
  map.voltages_v.assign(voltages_v.begin(), voltages_v.end());
  map.energies_mev.assign(energies_mev.begin(), energies_mev.end());
  map.values.assign(voltages_v.size() * energies_mev.size(), 0.0);

  PolaritonModel at = model;
  for (std::size_t i = 0; i < voltages_v.size(); ++i) {
    at.detuning_mev = calibration.cavity_energy_mev(voltages_v[i]) - model.exciton_energy_mev;
    const auto e = polariton_eigenenergies(at);
    const auto w = photonic_fractions(at.detuning_mev, at.coupling_mev);
    const double hu = -e.upper.imag(), hl = -e.lower.imag(); // half widths
    for (std::size_t j = 0; j < energies_mev.size(); ++j) {
      const double du = energies_mev[j] - e.upper.real(), dl = energies_mev[j] - e.lower.real();
      map.values[i * energies_mev.size() + j] =
          w.upper_photonic * hu * hu / (du * du + hu * hu) + w.lower_photonic * hl * hl / (dl * dl + hl * hl);
    }
  }
  return map;
}

std::string_view branch_name(Branch b) noexcept { return b == Branch::Upper ? "upper" : "lower"; }

Branch parse_branch(std::string_view text) {
  if (text == "upper" || text == "UP" || text == "+") return Branch::Upper;
  if (text == "lower" || text == "LP" || text == "-") return Branch::Lower;
  throw ValidationError("unknown branch label '" + std::string(text) + "' (expected upper or lower)");
}

std::vector<PeakObservation> synthesize_crossing(const PolaritonModel& model, const DetuningCalibration& calibration,
                                                 std::span<const double> voltages_v, double noise_mev,
                                                 std::uint64_t seed) {
  model.validate();
  calibration.validate();
  require(noise_mev >= 0.0, "synthesize_crossing: noise must be >= 0");
  auto rng = detail::seeded_engine(seed, 3);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<PeakObservation> out;
  out.reserve(2 * voltages_v.size());
  PolaritonModel at = model;
  for (const double v : voltages_v) {
    at.detuning_mev = calibration.cavity_energy_mev(v) - model.exciton_energy_mev;
    const auto e = polariton_eigenenergies(at);
    out.push_back({v, e.upper.real() + noise_mev * noise(rng), Branch::Upper});
    out.push_back({v, e.lower.real() + noise_mev * noise(rng), Branch::Lower});
  }
  return out;
}

CrossingFit fit_avoided_crossing(std::span<const PeakObservation> obs, double kappa_mev, double gamma_mev,
                                 double exciton_energy_mev) {
  require(obs.size() >= 6, "fit_avoided_crossing: need at least 6 observations");
  require(kappa_mev > 0.0 && gamma_mev > 0.0, "fit_avoided_crossing: linewidths must be > 0");
  require(std::isfinite(exciton_energy_mev), "fit_avoided_crossing: exciton energy must be finite");
  for (const auto& o : obs)
    require(std::isfinite(o.voltage_v) && std::isfinite(o.energy_mev), "fit_avoided_crossing: non-finite observation");

  // Initial guess. Re(E+) + Re(E-) = E_C + E_X wherever both branches are seen,
  // which gives the calibration line; the narrowest gap gives g.
  std::map<double, std::pair<std::optional<double>, std::optional<double>>> by_voltage;
  for (const auto& o : obs) {
    auto& slot = by_voltage[o.voltage_v];
    (o.branch == Branch::Upper ? slot.first : slot.second) = o.energy_mev;
  }
  std::vector<double> pv, pe;
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& [v, pair] : by_voltage) {
    if (!pair.first || !pair.second) continue;
    pv.push_back(v);
    pe.push_back(*pair.first + *pair.second - exciton_energy_mev);
    min_gap = std::min(min_gap, *pair.first - *pair.second);
  }
  require(pv.size() >= 2, "fit_avoided_crossing: need at least two voltages with both branches observed");

  double vbar = 0.0;
  for (const double v : pv) vbar += v;
  vbar /= static_cast<double>(pv.size());
  double sxx = 0.0, sxy = 0.0, ebar = 0.0;
  for (const double e : pe) ebar += e;
  ebar /= static_cast<double>(pe.size());
  for (std::size_t i = 0; i < pv.size(); ++i) {
    sxx += (pv[i] - vbar) * (pv[i] - vbar);
    sxy += (pv[i] - vbar) * (pe[i] - ebar);
  }
  require(sxx > 0.0, "fit_avoided_crossing: paired observations need distinct voltages");
  const double slope0 = sxy / sxx;
  require(slope0 != 0.0, "fit_avoided_crossing: cavity energy does not move with voltage");

  // Parameters: g, E_C at the mean voltage, slope. Centering decorrelates the
  // last two.
  const auto n = static_cast<Eigen::Index>(obs.size());
  auto residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& o = obs[static_cast<std::size_t>(i)];
      const auto s = solve(p[1] + p[2] * (o.voltage_v - vbar), exciton_energy_mev, kappa_mev, gamma_mev, p[0]);
      const cplx e = o.branch == Branch::Upper ? s.mean + s.root : s.mean - s.root;
      r[i] = e.real() - o.energy_mev;
    }
  };
  auto jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& o = obs[static_cast<std::size_t>(i)];
      const auto s = solve(p[1] + p[2] * (o.voltage_v - vbar), exciton_energy_mev, kappa_mev, gamma_mev, p[0]);
      const double sign = o.branch == Branch::Upper ? 1.0 : -1.0;
      // d root / d E_C = h / (2 root), d root / d g = g / root
      const cplx inv = s.root == cplx(0.0) ? cplx(0.0) : 1.0 / s.root;
      const double d_ec = 0.5 + sign * (0.5 * s.h * inv).real();
      j(i, 0) = sign * (p[0] * inv).real();
      j(i, 1) = d_ec;
      j(i, 2) = d_ec * (o.voltage_v - vbar);
    }
  };

  Eigen::VectorXd p0(3);
  p0 << std::max(0.5 * min_gap, 1e-3), ebar, slope0;
  LeastSquaresOptions opts;
  opts.max_iterations = 500;
  const auto fit = levenberg_marquardt(n, residual, jacobian, p0, opts);

  const double g = std::abs(fit.parameters[0]);
  const double slope = fit.parameters[2];
  const double intercept = fit.parameters[1] - slope * vbar;
  const double rms = std::sqrt(2.0 * fit.cost / static_cast<double>(n));
  if (!fit.converged)
    throw FitFailure("avoided-crossing fit did not converge: " + fit.reason, {g, intercept, slope}, rms);

  CrossingFit out;
  out.coupling_mev = g;
  out.calibration = {intercept, slope};
  out.rms_residual_mev = rms;
  out.iterations = fit.iterations;

  bool below = false, above = false;
  for (const auto& o : obs) {
    const double d = out.calibration.cavity_energy_mev(o.voltage_v) - exciton_energy_mev;
    below = below || d < 0.0;
    above = above || d > 0.0;
  }
  if (!(below && above))
    out.warnings.emplace_back("observations cover one detuning side only; g and the calibration are poorly constrained");
  return out;
}

} // namespace cryocav
