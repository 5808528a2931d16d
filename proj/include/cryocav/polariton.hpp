#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cryocav {

/// Exciton coupled to one cavity mode. Energies and widths in meV, widths are
/// FWHM.
struct PolaritonModel {
  double exciton_energy_mev = 1725.0;
  double exciton_linewidth_mev = 6.1;
  double cavity_linewidth_mev = 6.3;
  double coupling_mev = 2.75;
  double detuning_mev = 0.0; // E_C - E_X

  double cavity_energy_mev() const noexcept { return exciton_energy_mev + detuning_mev; }
  void validate() const;
};

struct PolaritonEnergies {
  std::complex<double> upper; // larger real part
  std::complex<double> lower;
};

/// Eigenvalues of [[E_C - i kappa/2, g], [g, E_X - i Gamma/2]].
PolaritonEnergies polariton_eigenenergies(const PolaritonModel& model);

/// Re(E+) - Re(E-) at the model's detuning.
double branch_separation(const PolaritonModel& model);

struct SplittingMinimum {
  double splitting_mev;
  double detuning_mev;
};

/// Minimum of the branch separation over detuning in [min, max]. The range
/// must contain 0 and the minimum must be interior.
SplittingMinimum normal_mode_splitting(const PolaritonModel& model, double detuning_min_mev,
                                       double detuning_max_mev);

/// 2 S^2 / (kappa Gamma).
double cooperativity(double splitting_mev, double kappa_mev, double gamma_mev);

struct HopfieldFractions {
  double upper_photonic;
  double lower_photonic;
};

/// Photonic weight of each branch, 1/2 (1 +- delta / sqrt(delta^2 + 4 g^2)).
HopfieldFractions photonic_fractions(double detuning_mev, double coupling_mev);

/// Cavity energy as an affine function of piezo voltage.
struct DetuningCalibration {
  double intercept_mev = 1689.0;
  double slope_mev_per_volt = 0.8;

  double cavity_energy_mev(double voltage_v) const noexcept { return intercept_mev + slope_mev_per_volt * voltage_v; }
  void validate() const;
};

struct TransmissionMap {
  std::vector<double> voltages_v;
  std::vector<double> energies_mev;
  std::vector<double> values; // row-major, one row per voltage

  double at(std::size_t voltage_index, std::size_t energy_index) const {
    return values[voltage_index * energies_mev.size() + energy_index];
  }
};

/// Two unit-height Lorentzians per voltage at Re(E+-) with FWHM -2 Im(E+-),
/// scaled by the photonic fractions. The model's own detuning is ignored.
TransmissionMap synthesize_transmission_map(const PolaritonModel& model, const DetuningCalibration& calibration,
                                            std::span<const double> voltages_v, std::span<const double> energies_mev);

enum class Branch { Upper, Lower };

std::string_view branch_name(Branch b) noexcept;
Branch parse_branch(std::string_view text);

struct PeakObservation {
  double voltage_v;
  double energy_mev;
  Branch branch;
};

/// Re(E+-) at each voltage, both branches, with optional Gaussian noise.
std::vector<PeakObservation> synthesize_crossing(const PolaritonModel& model, const DetuningCalibration& calibration,
                                                 std::span<const double> voltages_v, double noise_mev,
                                                 std::uint64_t seed);

struct CrossingFit {
  double coupling_mev = 0.0;
  DetuningCalibration calibration;
  double rms_residual_mev = 0.0;
  int iterations = 0;
  std::vector<std::string> warnings;
};

/// Least-squares fit of g and the voltage calibration to peak positions with
/// kappa, Gamma and E_X held fixed. Needs >= 6 observations and at least two
/// voltages where both branches were seen. Throws FitFailure with the best
/// {g, intercept, slope} when the solver does not converge.
CrossingFit fit_avoided_crossing(std::span<const PeakObservation> observations, double kappa_mev, double gamma_mev,
                                 double exciton_energy_mev);

} // namespace cryocav
