#include "cryocav/errors.hpp"
#include "cryocav/polariton.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

using namespace cryocav;
using cplx = std::complex<double>;

namespace {

// Roots of lambda^2 - tr lambda + det = 0 for the 2x2 matrix, written out
// from the characteristic polynomial rather than the h/mean form.
std::pair<cplx, cplx> quadratic_oracle(const PolaritonModel& m) {
  const cplx a(m.cavity_energy_mev(), -m.cavity_linewidth_mev / 2);
  const cplx d(m.exciton_energy_mev, -m.exciton_linewidth_mev / 2);
  const cplx tr = a + d, det = a * d - m.coupling_mev * m.coupling_mev;
  const cplx disc = std::sqrt(tr * tr - 4.0 * det);
  cplx r1 = (tr + disc) / 2.0, r2 = (tr - disc) / 2.0;
  if (r1.real() < r2.real()) std::swap(r1, r2);
  return {r1, r2};
}

PolaritonModel paper() { return {1725.0, 6.1, 6.3, 2.75, 0.0}; }

double close(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

} // namespace

TEST_SUITE("polariton") {

TEST_CASE("eigenvalues agree with the characteristic polynomial") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    PolaritonModel m{1600 + 200 * u(rng), 0.1 + 10 * u(rng), 0.1 + 10 * u(rng), 8 * u(rng), -40 + 80 * u(rng)};
    const auto e = polariton_eigenenergies(m);
    const auto [up, lo] = quadratic_oracle(m);
    REQUIRE(close(e.upper, up) < 1e-12);
    REQUIRE(close(e.lower, lo) < 1e-12);
    const cplx trace = cplx(m.cavity_energy_mev() + m.exciton_energy_mev,
                            -(m.cavity_linewidth_mev + m.exciton_linewidth_mev) / 2);
    REQUIRE(close(e.upper + e.lower, trace) < 1e-12);
    REQUIRE(e.upper.real() >= e.lower.real());
  }
}

TEST_CASE("decoupled limit returns the bare modes") {
  PolaritonModel m = paper();
  m.coupling_mev = 0;
  m.detuning_mev = 4.0;
  const auto e = polariton_eigenenergies(m);
  CHECK(close(e.upper, cplx(1729.0, -3.15)) < 1e-12);
  CHECK(close(e.lower, cplx(1725.0, -3.05)) < 1e-12);
}

TEST_CASE("symmetric resonance splits by exactly 2g") {
  PolaritonModel m{1725.0, 5.0, 5.0, 2.75, 0.0};
  CHECK(branch_separation(m) == doctest::Approx(5.5).epsilon(1e-14));
}

TEST_CASE("far-detuned branches approach the bare energies") {
  for (const double sign : {-1.0, 1.0}) {
    PolaritonModel m = paper();
    m.detuning_mev = sign * 10 * m.coupling_mev;
    const auto e = polariton_eigenenergies(m);
    const double bound = 1.1 * m.coupling_mev * m.coupling_mev / std::abs(m.detuning_mev);
    const double ec = m.cavity_energy_mev(), ex = m.exciton_energy_mev;
    CHECK(std::abs(e.upper.real() - std::max(ec, ex)) <= bound);
    CHECK(std::abs(e.lower.real() - std::min(ec, ex)) <= bound);
  }
}

TEST_CASE("normal-mode splitting") {
  const auto s = normal_mode_splitting(paper(), -20, 20);
  CHECK(s.splitting_mev == doctest::Approx(5.50).epsilon(0.002));
  CHECK(std::abs(s.detuning_mev) < 0.2);

  PolaritonModel sym{1725.0, 6.0, 6.0, 2.0, 0.0};
  const auto t = normal_mode_splitting(sym, -10, 7);
  CHECK(t.splitting_mev == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(std::abs(t.detuning_mev) < 1e-4);
  for (double d = 0.5; d < 20; d += 1.7) {
    PolaritonModel a = sym, b = sym;
    a.detuning_mev = d;
    b.detuning_mev = -d;
    CHECK(std::abs(branch_separation(a) - branch_separation(b)) < 1e-9);
  }
}

TEST_CASE("normal-mode splitting range checks") {
  CHECK_THROWS_AS(normal_mode_splitting(paper(), 1, 10), ValidationError);
  CHECK_THROWS_AS(normal_mode_splitting(paper(), -10, -1), ValidationError);
  // The separation is even in detuning, so its minimum is at zero; a range
  // ending just past zero leaves it on the boundary.
  CHECK_THROWS_AS(normal_mode_splitting(paper(), -5, 1e-9), NumericalError);
}

TEST_CASE("cooperativity") {
  CHECK(cooperativity(5.5, 6.3, 6.1) == doctest::Approx(1.574).epsilon(0.001));
  CHECK(cooperativity(0.0, 6.3, 6.1) == 0.0);
  CHECK(cooperativity(1, 1, 1) == 2.0);
  CHECK_THROWS_AS(cooperativity(1, 0, 1), ValidationError);
  CHECK_THROWS_AS(cooperativity(-1, 1, 1), ValidationError);
}

TEST_CASE("Hopfield fractions") {
  for (double d = -30; d <= 30; d += 0.7) {
    const auto h = photonic_fractions(d, 2.75);
    CHECK(h.upper_photonic >= 0.0);
    CHECK(h.upper_photonic <= 1.0);
    CHECK(h.upper_photonic + h.lower_photonic == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(photonic_fractions(0, 2.75).upper_photonic == 0.5);
  CHECK(photonic_fractions(0, 0).upper_photonic == 0.5);
  CHECK(photonic_fractions(-100, 2.75).lower_photonic > 0.99);
}

TEST_CASE("transmission map line shapes") {
  const auto m = paper();
  const DetuningCalibration cal{1689.0, 0.8};
  std::vector<double> energies;
  for (double e = 1650; e <= 1780; e += 0.01) energies.push_back(e);
  const double volts[] = {-20.0, 45.0};
  const auto map = synthesize_transmission_map(m, cal, volts, energies);
  REQUIRE(map.values.size() == 2 * energies.size());

  // Far red detuned: one dominant peak, at the bare cavity.
  std::size_t arg = 0;
  for (std::size_t j = 0; j < energies.size(); ++j)
    if (map.at(0, j) > map.at(0, arg)) arg = j;
  CHECK(energies[arg] == doctest::Approx(cal.cavity_energy_mev(-20)).epsilon(1e-4));
  CHECK(map.at(0, arg) > 0.95);

  // Resonance: two peaks of equal weight.
  auto peak_near = [&](double e0) {
    double best = 0;
    for (std::size_t j = 0; j < energies.size(); ++j)
      if (std::abs(energies[j] - e0) < 2.0) best = std::max(best, map.at(1, j));
    return best;
  };
  CHECK(peak_near(1725 + 2.75) == doctest::Approx(peak_near(1725 - 2.75)).epsilon(0.02));
}

TEST_CASE("peaks picked from the map retrace the branches") {
  // Lines narrower than the splitting, so each branch has its own apex.
  const PolaritonModel m{1725.0, 1.0, 1.0, 2.75, 0.0};
  const DetuningCalibration cal{1689.0, 0.8};
  const double step = 0.002;
  std::vector<double> energies;
  for (double e = 1700; e <= 1750; e += step) energies.push_back(e);
  std::vector<double> volts;
  for (double v = 36; v <= 54; v += 2.0) volts.push_back(v);
  const auto map = synthesize_transmission_map(m, cal, volts, energies);
  for (std::size_t i = 0; i < volts.size(); ++i) {
    PolaritonModel at = m;
    at.detuning_mev = cal.cavity_energy_mev(volts[i]) - m.exciton_energy_mev;
    const auto e = polariton_eigenenergies(at);
    for (const auto branch : {e.upper, e.lower}) {
      // Local maximum within half a linewidth, refined by a parabola.
      std::size_t best = 0;
      for (std::size_t j = 1; j + 1 < energies.size(); ++j)
        if (std::abs(energies[j] - branch.real()) < 0.5 && map.at(i, j) > map.at(i, best)) best = j;
      const double y0 = map.at(i, best - 1), y1 = map.at(i, best), y2 = map.at(i, best + 1);
      REQUIRE(y1 >= y0);
      REQUIRE(y1 >= y2);
      const double peak = energies[best] + step * 0.5 * (y0 - y2) / (y0 - 2 * y1 + y2);
      CHECK(std::abs(peak - branch.real()) <= 0.02 * (-2 * branch.imag()));
    }
  }
}

TEST_CASE("transmission map input checks") {
  const double good[] = {1.0, 2.0};
  const double bad[] = {2.0, 1.0};
  CHECK_THROWS_AS(synthesize_transmission_map(paper(), {}, bad, good), ValidationError);
  CHECK_THROWS_AS(synthesize_transmission_map(paper(), {}, good, std::span<const double>{}), ValidationError);
  CHECK_THROWS_AS(synthesize_transmission_map(paper(), {1689, 0.0}, good, good), ValidationError);
}

TEST_CASE("crossing fit recovers noiseless parameters") {
  const auto m = paper();
  const DetuningCalibration cal{1689.0, 0.8};
  const double volts[] = {30, 34, 38, 42, 46, 50, 54, 58};
  const auto obs = synthesize_crossing(m, cal, volts, 0.0, 1);
  const auto fit = fit_avoided_crossing(obs, 6.3, 6.1, 1725.0);
  CHECK(fit.coupling_mev == doctest::Approx(2.75).epsilon(1e-8));
  CHECK(fit.calibration.slope_mev_per_volt == doctest::Approx(0.8).epsilon(1e-8));
  CHECK(fit.calibration.intercept_mev == doctest::Approx(1689.0).epsilon(1e-10));
  CHECK(fit.rms_residual_mev < 1e-8);
  CHECK(fit.warnings.empty());
}

TEST_CASE("crossing fit is a fixed point of its own forward model") {
  const double volts[] = {30, 34, 38, 42, 46, 50, 54, 58};
  const auto noisy = synthesize_crossing(paper(), {1689.0, 0.8}, volts, 0.3, 9);
  const auto first = fit_avoided_crossing(noisy, 6.3, 6.1, 1725.0);
  PolaritonModel refit = paper();
  refit.coupling_mev = first.coupling_mev;
  const auto clean = synthesize_crossing(refit, first.calibration, volts, 0.0, 1);
  const auto second = fit_avoided_crossing(clean, 6.3, 6.1, 1725.0);
  CHECK(second.coupling_mev == doctest::Approx(first.coupling_mev).epsilon(1e-8));
  CHECK(second.calibration.slope_mev_per_volt == doctest::Approx(first.calibration.slope_mev_per_volt).epsilon(1e-8));
}

TEST_CASE("one-sided data are flagged") {
  const double volts[] = {50, 53, 56, 59, 62, 65};
  const auto obs = synthesize_crossing(paper(), {1689.0, 0.8}, volts, 0.0, 1);
  const auto fit = fit_avoided_crossing(obs, 6.3, 6.1, 1725.0);
  CHECK(fit.warnings.size() == 1);
}

TEST_CASE("crossing fit input checks") {
  const double volts[] = {40, 50};
  const auto few = synthesize_crossing(paper(), {1689.0, 0.8}, volts, 0.0, 1);
  CHECK_THROWS_AS(fit_avoided_crossing(few, 6.3, 6.1, 1725.0), ValidationError);
  std::vector<PeakObservation> lower_only;
  for (double v = 30; v < 60; v += 4) lower_only.push_back({v, 1700.0 + v * 0.1, Branch::Lower});
  CHECK_THROWS_AS(fit_avoided_crossing(lower_only, 6.3, 6.1, 1725.0), ValidationError);
  CHECK(parse_branch("upper") == Branch::Upper);
  CHECK(parse_branch("lower") == Branch::Lower);
  CHECK_THROWS_AS(parse_branch("middle"), ValidationError);
}

}
