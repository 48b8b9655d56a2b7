#include "qndepp/kerr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qndepp::kerr {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

KerrSystemParams KerrSystemParams::reference() {
  KerrSystemParams p;
  p.g1 = kTwoPi * 300e6;
  p.g2 = kTwoPi * 300e6;
  p.omega_c = kTwoPi * 1.5e9;
  p.delta1 = 0.0;
  p.delta2 = kTwoPi * 1.5e9;
  p.kappa1 = 1.0 / 20e-6;
  p.kappa2 = 1.0 / 10e-9;
  return p;
}

double chi_from_params(const KerrSystemParams& p) {
  if (p.omega_c == 0.0) throw std::invalid_argument("chi_from_params: Omega_c must be nonzero");
  if (p.delta2 == 0.0) throw std::invalid_argument("chi_from_params: delta2 must be nonzero");
  return -(p.g1 * p.g1) * (p.g2 * p.g2) / (p.delta2 * p.omega_c * p.omega_c);
}

std::vector<RegimeViolation> validate_regime(const KerrSystemParams& p, int max_n) {
  std::vector<RegimeViolation> out;

  const double pump = p.omega_c == 0.0 ? INFINITY : std::pow(p.g1 / p.omega_c, 2);
  if (!(pump <= 0.1)) out.push_back({"|g1/Omega_c|^2 << 1", pump, 0.1});

  const double detuning = p.delta2 == 0.0 ? INFINITY : std::abs(p.g2) / std::abs(p.delta2);
  if (!(detuning <= 0.25)) out.push_back({"|g2| << |delta2|", detuning, 0.25});

  // chi itself is undefined when the divisors vanish; the first two checks
  // already flag that case.
  if (p.omega_c != 0.0 && p.delta2 != 0.0) {
    const double load = std::abs(chi_from_params(p)) * std::max(max_n, 0);
    const double ratio = load == 0.0 ? INFINITY : p.kappa2 / load;
    if (!(ratio >= 10.0)) out.push_back({"kappa2 >> chi <n>", ratio, 10.0});
  }
  return out;
}

std::complex<double> reflection(int n, double chi, double kappa2) {
  if (kappa2 <= 0.0) throw std::invalid_argument("reflection: kappa2 must be positive");
  const std::complex<double> ichin{0.0, chi * n};
  return (ichin - kappa2 / 2.0) / (ichin + kappa2 / 2.0);
}

double canonical_phase(double theta) {
  double t = std::remainder(theta, kTwoPi);  // [-pi, pi]
  if (t <= -std::numbers::pi) t += kTwoPi;
  return t;
}

double cascade_phase(int n1, int n2, double chi, double kappa2) {
  return canonical_phase(std::arg(reflection(n1, chi, kappa2) * reflection(n2, chi, kappa2)));
}

std::string to_string(PhaseLevel level) {
  return "theta" + std::to_string(static_cast<int>(level));
}

PhaseLevel level_of(int n1, int n2) {
  if (n1 < 0 || n2 < 0 || n1 + n2 > 2) {
    throw std::invalid_argument("level_of: occupations outside the two-photon table");
  }
  if (n1 + n2 == 0) return PhaseLevel::theta0;
  if (n1 + n2 == 1) return PhaseLevel::theta1;
  return n1 == 1 ? PhaseLevel::theta2 : PhaseLevel::theta3;
}

PhaseShiftTable::PhaseShiftTable(double chi, double kappa2, int max_total)
    : chi_(chi), kappa2_(kappa2), max_total_(max_total) {
  if (max_total < 0) throw std::invalid_argument("PhaseShiftTable: negative max_total");
  for (int n1 = 0; n1 <= max_total; ++n1) {
    for (int n2 = 0; n1 + n2 <= max_total; ++n2) {
      entries_[{n1, n2}] = cascade_phase(n1, n2, chi, kappa2);
    }
  }
}

double PhaseShiftTable::theta(int n1, int n2) const {
  const auto it = entries_.find({n1, n2});
  if (it == entries_.end()) throw std::out_of_range("PhaseShiftTable: occupation pair not tabulated");
  return it->second;
}

double PhaseShiftTable::theta(PhaseLevel level) const {
  switch (level) {
    case PhaseLevel::theta0: return theta(0, 0);
    case PhaseLevel::theta1: return theta(1, 0);
    case PhaseLevel::theta2: return theta(1, 1);
    case PhaseLevel::theta3: return theta(2, 0);
  }
  throw std::invalid_argument("PhaseShiftTable: bad level");
}

std::vector<double> PhaseShiftTable::distinct_phases(double tol) const {
  std::vector<double> out;
  for (const auto& [key, th] : entries_) {
    bool seen = false;
    for (double d : out) {
      if (std::abs(canonical_phase(th - d)) <= tol) {
        seen = true;
        break;
      }
    }
    if (!seen) out.push_back(th);
  }
  return out;
}

PhaseShiftTable build_phase_table(const KerrSystemParams& p, int max_total) {
  return PhaseShiftTable(chi_from_params(p), p.kappa2, max_total);
}

PolarizationEncoding::PolarizationEncoding(std::array<std::array<int, 2>, 2> occupation)
    : occupation_(occupation) {
  for (const auto& mode : occupation_) {
    const bool bijective = (mode[0] == 0 && mode[1] == 1) || (mode[0] == 1 && mode[1] == 0);
    if (!bijective) throw std::invalid_argument("PolarizationEncoding: each mode must map {H,V} onto {0,1}");
  }
}

PolarizationEncoding PolarizationEncoding::standard() {
  return PolarizationEncoding({{{1, 0}, {0, 1}}});
}

PolarizationEncoding PolarizationEncoding::swapped() const {
  auto occ = occupation_;
  for (auto& mode : occ) std::swap(mode[0], mode[1]);
  return PolarizationEncoding(occ);
}

int PolarizationEncoding::occupation(int mode, Polarization p) const {
  if (mode != 1 && mode != 2) throw std::invalid_argument("PolarizationEncoding: mode must be 1 or 2");
  return occupation_[static_cast<std::size_t>(mode - 1)][static_cast<std::size_t>(p)];
}

Polarization PolarizationEncoding::counted(int mode) const {
  return occupation(mode, Polarization::H) == 1 ? Polarization::H : Polarization::V;
}

PhaseLevel detector_level(Polarization pol1, Polarization pol2, const PolarizationEncoding& enc) {
  return level_of(enc.occupation(1, pol1), enc.occupation(2, pol2));
}

double detector_phase_for_polarizations(Polarization pol1, Polarization pol2,
                                        const PolarizationEncoding& enc,
                                        const PhaseShiftTable& table) {
  return table.theta(enc.occupation(1, pol1), enc.occupation(2, pol2));
}

}  // namespace qndepp::kerr
