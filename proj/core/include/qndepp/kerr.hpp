#pragma once

// One QND parity-check detector: the cross-Kerr coefficient of an N-type
// molecule coupled to a storage and a readout resonator, the steady-state
// reflection of the readout resonator for a given storage occupation, and
// the probe phase accumulated across two cascaded readout resonators.

#include <array>
#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qndepp/hilbert.hpp"

namespace qndepp::kerr {

/// Circuit parameters in angular units (rad/s) and rates in 1/s.
struct KerrSystemParams {
  double g1 = 0.0;
  double g2 = 0.0;
  double omega_c = 0.0;
  double delta1 = 0.0;  // carried for completeness; no formula here uses it
  double delta2 = 0.0;
  double kappa1 = 0.0;  // storage resonator decay
  double kappa2 = 0.0;  // readout resonator decay

  /// g1/2pi = g2/2pi = 300 MHz, Omega_c/2pi = delta2/2pi = 1.5 GHz,
  /// kappa1^-1 = 20 us, kappa2^-1 = 10 ns.
  static KerrSystemParams reference();
};

/// chi = -g1^2 g2^2 / (delta2 Omega_c^2). Throws if delta2 or Omega_c is zero.
double chi_from_params(const KerrSystemParams& p);

struct RegimeViolation {
  std::string condition;  // e.g. "|g1/Omega_c|^2 << 1"
  double ratio = 0.0;     // measured quantity
  double threshold = 0.0; // largest acceptable value (or smallest, for the kappa2 check)
};

/// Checks the adiabatic-elimination and fast-readout conditions with explicit
/// gates: |g1/Omega_c|^2 <= 0.1, |g2|/|delta2| <= 0.25 and
/// kappa2 >= 10 |chi| max_n (reported as kappa2 / (|chi| max_n) >= 10).
/// Returns the violated conditions only.
std::vector<RegimeViolation> validate_regime(const KerrSystemParams& p, int max_n);

/// r(n) = (i chi n - kappa2/2) / (i chi n + kappa2/2). Unit modulus.
std::complex<double> reflection(int n, double chi, double kappa2);

/// Reduces an angle to (-pi, pi].
double canonical_phase(double theta);

/// arg[r(n1) r(n2)] reduced to (-pi, pi].
double cascade_phase(int n1, int n2, double chi, double kappa2);

/// Phase level names of the two-resonator detector:
/// (0,0) -> theta0, (1,0)/(0,1) -> theta1, (1,1) -> theta2, (2,0)/(0,2) -> theta3.
enum class PhaseLevel { theta0 = 0, theta1 = 1, theta2 = 2, theta3 = 3 };

inline constexpr std::array<PhaseLevel, 4> kAllLevels = {
    PhaseLevel::theta0, PhaseLevel::theta1, PhaseLevel::theta2, PhaseLevel::theta3};

std::string to_string(PhaseLevel level);
/// Throws for n1 + n2 > 2 or negative occupations.
PhaseLevel level_of(int n1, int n2);

class PhaseShiftTable {
 public:
  PhaseShiftTable(double chi, double kappa2, int max_total);

  double chi() const { return chi_; }
  double kappa2() const { return kappa2_; }
  int max_total() const { return max_total_; }

  /// Signed canonical phase for the occupation pair; throws if not tabulated.
  double theta(int n1, int n2) const;
  /// Phase of a named level (requires max_total >= the level's photon count).
  double theta(PhaseLevel level) const;

  /// Every (n1, n2) with n1 + n2 <= max_total, ordered lexicographically.
  const std::map<std::pair<int, int>, double>& entries() const { return entries_; }

  /// Distinct phases after merging entries that agree within `tol` (mod 2pi).
  std::vector<double> distinct_phases(double tol = 1e-12) const;

 private:
  double chi_;
  double kappa2_;
  int max_total_;
  std::map<std::pair<int, int>, double> entries_;
};

PhaseShiftTable build_phase_table(const KerrSystemParams& p, int max_total);

/// Which polarization of each of the detector's two input modes is counted
/// by the storage resonator of that mode.
class PolarizationEncoding {
 public:
  /// occupation[mode][polarization] in {0, 1}; each mode must be bijective.
  explicit PolarizationEncoding(std::array<std::array<int, 2>, 2> occupation);

  /// Mode 1: H -> 1, V -> 0. Mode 2: H -> 0, V -> 1.
  static PolarizationEncoding standard();
  PolarizationEncoding swapped() const;

  int occupation(int mode, Polarization p) const;
  /// The polarization that mode `mode` counts (maps to occupation 1).
  Polarization counted(int mode) const;

 private:
  std::array<std::array<int, 2>, 2> occupation_;
};

PhaseLevel detector_level(Polarization pol1, Polarization pol2, const PolarizationEncoding& enc);
double detector_phase_for_polarizations(Polarization pol1, Polarization pol2,
                                        const PolarizationEncoding& enc,
                                        const PhaseShiftTable& table);

}  // namespace qndepp::kerr
