#pragma once

// Closed forms and small independent implementations that the tests compare
// the library against. Nothing here calls into qndepp.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <string>
#include <vector>

namespace oracle {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// chi/2pi from cyclic frequencies (Hz): -g1^2 g2^2 / (delta2 Omega_c^2).
inline double chi_cyclic(double g1, double g2, double omega_c, double delta2) {
  return -(g1 * g1) * (g2 * g2) / (delta2 * omega_c * omega_c);
}

inline double wrap(double theta) {
  double t = std::remainder(theta, kTwoPi);
  if (t <= -std::numbers::pi) t += kTwoPi;
  return t;
}

/// r(n) = -conj(D)/D with D = kappa/2 + i chi n, so arg r(n) = pi - 2 atan(2 chi n / kappa)
/// and two cascaded resonators give -2 [atan(2 chi n1/kappa) + atan(2 chi n2/kappa)].
inline double cascade_phase(int n1, int n2, double chi, double kappa2) {
  return wrap(-2.0 * (std::atan(2.0 * chi * n1 / kappa2) + std::atan(2.0 * chi * n2 / kappa2)));
}

/// Unit-variance Gaussian density.
inline double normal_pdf(double x, double mean) {
  const double z = x - mean;
  return std::exp(-0.5 * z * z) / std::sqrt(kTwoPi);
}

/// Composite Simpson rule on [a, b] with n (even) intervals.
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// Probability that a unit-variance Gaussian centred at 0 lands beyond x_d/2,
/// by quadrature.
inline double tail_by_quadrature(double x_d) {
  const double half = std::abs(x_d) / 2.0;
  return simpson([](double x) { return normal_pdf(x, 0.0); }, half, half + 40.0);
}

inline double f_ideal(double f) { return f * f / (f * f + (1 - f) * (1 - f)); }
inline double success(double f) { return f * f + (1 - f) * (1 - f); }

/// Pure-loss survival of a number state: every photon leaks independently at
/// rate kappa, so <n|rho(t)|n> = prod_i exp(-kappa n_i t).
inline double loss_survival(const std::vector<int>& occupations, double kappa, double t) {
  int n = 0;
  for (int o : occupations) n += o;
  return std::exp(-kappa * n * t);
}

// --- Four-qubit polarization kets, c1 d1 c2 d2, index bit 3 = c1 ------------

using Ket4 = std::array<std::complex<double>, 16>;

/// Equal-weight superposition of terms like "HHVV" (c1 d1 c2 d2), normalized.
inline Ket4 ket4(const std::vector<std::string>& terms) {
  Ket4 k{};
  for (const auto& t : terms) {
    std::size_t idx = 0;
    for (char ch : t) idx = idx * 2 + (ch == 'V' ? 1 : 0);
    k[idx] += 1.0;
  }
  double n = 0;
  for (auto a : k) n += std::norm(a);
  for (auto& a : k) a /= std::sqrt(n);
  return k;
}

// --- Sparse Fock algebra for the eight polarization-spatial modes ---------------

/// Mode order c1H c1V c2H c2V d1H d1V d2H d2V.
using Occupation = std::array<int, 8>;
using FockState = std::map<Occupation, double>;

inline int mode_index(const std::string& name) {
  static const std::map<std::string, int> idx{{"c1H", 0}, {"c1V", 1}, {"c2H", 2}, {"c2V", 3},
                                              {"d1H", 4}, {"d1V", 5}, {"d2H", 6}, {"d2V", 7}};
  return idx.at(name);
}

inline FockState create(const FockState& psi, int mode) {
  FockState out;
  for (const auto& [occ, amp] : psi) {
    Occupation o = occ;
    o[mode] += 1;
    out[o] += amp * std::sqrt(static_cast<double>(o[mode]));
  }
  return out;
}

/// Sum over (alice, bob) of a_alice+ a_bob+ |psi>.
inline FockState pair_op(const FockState& psi, bool bit_flip) {
  const std::vector<std::array<const char*, 2>> ideal{
      {"c1H", "d1H"}, {"c1V", "d1V"}, {"c2H", "d2H"}, {"c2V", "d2V"}};
  const std::vector<std::array<const char*, 2>> flipped{
      {"c1V", "d1H"}, {"c1H", "d1V"}, {"c2V", "d2H"}, {"c2H", "d2V"}};
  FockState out;
  for (const auto& t : bit_flip ? flipped : ideal) {
    for (const auto& [occ, amp] : create(create(psi, mode_index(t[0])), mode_index(t[1]))) out[occ] += amp;
  }
  return out;
}

/// Storage occupations seen by Alice's detector (c side) and Bob's (d side)
/// under the encoding mode 1 counts H, mode 2 counts V.
inline std::array<int, 2> alice_counts(const Occupation& o) { return {o[0], o[3]}; }
inline std::array<int, 2> bob_counts(const Occupation& o) { return {o[4], o[7]}; }

/// Detector level from the two counted occupations: total 0 -> 0, (1,0)/(0,1) -> 1,
/// (1,1) -> 2, (2,0)/(0,2) -> 3.
inline int level(const std::array<int, 2>& n) {
  const int total = n[0] + n[1];
  if (total == 0) return 0;
  if (total == 1) return 1;
  return n[0] == 1 ? 2 : 3;
}

/// Weight of each (alice level, bob level) group, normalized.
inline std::map<std::pair<int, int>, double> level_weights(const FockState& psi) {
  std::map<std::pair<int, int>, double> w;
  double total = 0;
  for (const auto& [occ, amp] : psi) {
    w[{level(alice_counts(occ)), level(bob_counts(occ))}] += amp * amp;
    total += amp * amp;
  }
  for (auto& [k, v] : w) v /= total;
  return w;
}

}  // namespace oracle
