// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qndepp/homodyne.hpp"
#include "qndepp/kerr.hpp"
#include "qndepp/lindblad.hpp"
#include "qndepp/pdc.hpp"
#include "qndepp/protocol.hpp"

using namespace qndepp;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates one criterion's checks; the first failure is kept for the report.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && pass_) {
      pass_ = false;
      failure_ = what;
    }
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  Outcome result() const { return {pass_, pass_ ? notes_ : failure_}; }

 private:
  bool pass_ = true;
  std::string failure_;
  std::string notes_;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}
std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

const kerr::PhaseShiftTable& table() {
  static const auto t = kerr::build_phase_table(kerr::KerrSystemParams::reference(), 2);
  return t;
}
const kerr::PolarizationEncoding kEnc = kerr::PolarizationEncoding::standard();

Outcome chi_reproduction() {
  Check c;
  const double chi = kerr::chi_from_params(kerr::KerrSystemParams::reference()) / kTwoPi;
  const double rel = std::abs(std::abs(chi) - 2.4e6) / 2.4e6;
  const double closed = oracle::chi_cyclic(300e6, 300e6, 1.5e9, 1.5e9);
  c.expect(rel <= 1e-9, fmt("|chi|/2pi = %.12g Hz", std::abs(chi)));
  c.expect(std::abs(chi - closed) <= 1e-9 * std::abs(closed), "chi disagrees with the closed form");
  c.note(fmt("|chi|/2pi = %.9g MHz, rel err %.1e", std::abs(chi) / 1e6, rel));
  return c.result();
}

Outcome phase_table() {
  Check c;
  const std::array<double, 4> rounded{0.0, 0.6, 1.2, 1.1};
  std::string values;
  for (auto level : kerr::kAllLevels) {
    const int k = static_cast<int>(level);
    const double th = table().theta(level);
    c.expect(std::abs(std::abs(th) - rounded[k]) <= 0.05, fmt("|theta%.0f| = %.6f off the rounded value", k, std::abs(th)));
    values += fmt(k ? ", %.6f" : "%.6f", std::abs(th));
  }
  for (const auto& [n, th] : table().entries()) {
    c.expect(std::abs(th - oracle::cascade_phase(n.first, n.second, table().chi(), table().kappa2())) < 1e-13,
             "phase table disagrees with the arctangent form");
  }
  const double add = table().theta(kerr::PhaseLevel::theta2) - 2.0 * table().theta(kerr::PhaseLevel::theta1);
  c.expect(std::abs(add) <= 1e-14, fmt("theta2 - 2 theta1 = %.3e", add));
  c.note("|theta| = {" + values + "}" + fmt(", theta2 - 2 theta1 = %.1e", add));
  return c.result();
}

Outcome alpha_threshold() {
  Check c;
  const std::array<double, 4> rounded{0.0, 0.6, 1.2, 1.1};
  const auto rounded_mode = homodyne::min_alpha(rounded, homodyne::SeparationThreshold{4.5});
  std::vector<double> exact_phases;
  for (auto level : kerr::kAllLevels) exact_phases.push_back(table().theta(level));
  const auto exact = homodyne::min_alpha(exact_phases, homodyne::ErrorTarget{0.01});
  c.expect(std::abs(rounded_mode.alpha - 24.7) <= 0.2, fmt("rounded-phase alpha = %.4f", rounded_mode.alpha));
  c.expect(exact.alpha > rounded_mode.alpha, fmt("exact alpha %.4f does not exceed rounded-phase %.4f", exact.alpha, rounded_mode.alpha));
  c.note(fmt("rounded-phase alpha = %.4f, exact-mode alpha = %.4f", rounded_mode.alpha, exact.alpha));
  return c.result();
}

Outcome error_law() {
  Check c;
  const double xd = 4.653;
  const double p = homodyne::error_probability(xd);
  c.expect(std::abs(p - 0.010) <= 5e-4, fmt("P_err(4.653) = %.6f", p));
  c.expect(std::abs(p - oracle::tail_by_quadrature(xd)) < 1e-11, "error law disagrees with quadrature");

  // Two probe phases whose peaks sit X_d apart at alpha = 24.7.
  const double alpha = 24.7;
  const double theta_b = std::acos(1.0 - xd / (2.0 * alpha));
  const homodyne::PhaseBinSet bins({{"a", 0.0}, {"b", theta_b}});
  const std::uint64_t n = 1'000'000;
  Rng rng = make_stream(20240611, 0);
  std::uint64_t wrong = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto probe = homodyne::ProbeState::make(alpha, i % 2 ? theta_b : 0.0);
    if (!homodyne::sample_and_classify(probe, bins, rng).correct) ++wrong;
  }
  const double rate = static_cast<double>(wrong) / static_cast<double>(n);
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
  const double z = (rate - p) / sigma;
  c.expect(std::abs(z) <= 3.0, fmt("MC error rate %.6f, z = %.2f", rate, z));
  c.note(fmt("P_err(4.653) = %.6f; MC over 1e6 trials %.6f", p, rate) + fmt(" (z = %.2f)", z));
  return c.result();
}

Outcome purification() {
  Check c;
  double worst_exact = 0.0;
  double worst_z = 0.0;
  for (int i = 0; i <= 8; ++i) {
    const double f = 0.55 + 0.05 * i;
    const auto r = protocol::run_round(f, table(), kEnc, protocol::RuleSet::ideal_phase);
    const double ef = std::abs(r.kept_fidelity - oracle::f_ideal(f));
    const double es = std::abs(r.success_probability - oracle::success(f));
    worst_exact = std::max({worst_exact, ef, es});
    c.expect(ef <= 1e-10 && es <= 1e-10, fmt("exact round off at f = %.2f (err %.2e)", f, std::max(ef, es)));

    protocol::MonteCarloConfig cfg;
    cfg.trials = 100000;
    cfg.seed = 20240611 + static_cast<std::uint64_t>(i);
    const auto mc = protocol::monte_carlo_round(f, table(), kEnc, protocol::RuleSet::ideal_phase, cfg);
    const double zf = (mc.kept_fidelity - oracle::f_ideal(f)) / mc.kept_fidelity_stderr;
    const double zs = (mc.success_probability - oracle::success(f)) / mc.success_stderr;
    worst_z = std::max({worst_z, std::abs(zf), std::abs(zs)});
    c.expect(std::abs(zf) <= 3.0 && std::abs(zs) <= 3.0, fmt("MC at f = %.2f: z = %.2f", f, std::abs(zf) > std::abs(zs) ? zf : zs));
  }
  c.note(fmt("9 f values; max exact error %.1e, max MC |z| %.2f", worst_exact, worst_z));
  return c.result();
}

Outcome branch_structure() {
  Check c;
  struct Expected {
    int alice, bob;
    double p;
    std::vector<std::string> terms;
  };
  const std::map<std::string, std::vector<Expected>> expansions{
      {"PhiPhi", {{1, 1, 0.5, {"HHHH", "VVVV"}}, {2, 2, 0.25, {"HHVV"}}, {0, 0, 0.25, {"VVHH"}}}},
      {"PhiPsi", {{2, 1, 0.25, {"HHVH"}}, {0, 1, 0.25, {"VVHV"}}, {1, 2, 0.25, {"HHHV"}}, {1, 0, 0.25, {"VVVH"}}}},
      {"PsiPhi", {{0, 1, 0.25, {"VHHH"}}, {2, 1, 0.25, {"HVVV"}}, {1, 2, 0.25, {"VHVV"}}, {1, 0, 0.25, {"HVHH"}}}},
      {"PsiPsi", {{1, 1, 0.5, {"VHVH", "HVHV"}}, {0, 2, 0.25, {"VHHV"}}, {2, 0, 0.25, {"HVVH"}}}},
  };
  double worst = 0.0;
  int groups = 0;
  for (const auto& comp : protocol::two_pair_components(0.8)) {
    const auto& exp = expansions.at(comp.name);
    const auto branches = protocol::qnd_branches(comp.state, table(), kEnc, protocol::RuleSet::weak_kerr);
    c.expect(branches.size() == exp.size(), comp.name + ": wrong number of phase groups");
    for (const auto& e : exp) {
      bool found = false;
      for (const auto& b : branches) {
        if (static_cast<int>(b.level_alice) != e.alice || static_cast<int>(b.level_bob) != e.bob) continue;
        found = true;
        const auto k = oracle::ket4(e.terms);
        Complex s = 0;
        for (int i = 0; i < 16; ++i) s += std::conj(k[i]) * b.post_state.amplitudes()(i);
        const double dev = std::abs(std::abs(s) / b.post_state.norm() - 1.0);
        worst = std::max(worst, dev);
        c.expect(dev <= 1e-10, comp.name + ": post-state overlap off");
        c.expect(std::abs(b.probability - e.p) <= 1e-12, comp.name + ": group probability off");
        ++groups;
      }
      c.expect(found, comp.name + ": missing phase group");
    }
  }
  const double kept = protocol::pdc_two_pair_round(1, table(), kEnc).kept_weight;
  c.expect(kept == 0.0, fmt("PDC one-error kept weight = %.3e", kept));
  c.note(fmt("%.0f groups, max |1 - overlap| %.1e", groups, worst) + fmt("; PDC one-error kept weight %.1f", kept));
  return c.result();
}

Outcome dissipation() {
  Check c;
  const double k1 = 1.0 / 20e-6;
  const double k2 = 1.0 / 10e-9;
  const auto f10 = lindblad::storage_fidelity(lindblad::FockLabel{{1, 0}}, k1, k2, 8.0);
  const auto f11 = lindblad::storage_fidelity(lindblad::FockLabel{{1, 1}}, k1, k2, 8.0);
  c.expect(std::abs(f10.fidelity - 0.99601) <= 1e-4, fmt("F|1,0> = %.6f", f10.fidelity));
  c.expect(std::abs(f11.fidelity - 0.99203) <= 1e-4, fmt("F|1,1> = %.6f", f11.fidelity));
  const double o10 = oracle::loss_survival({1, 0}, k1, f10.tau);
  const double o11 = oracle::loss_survival({1, 1}, k1, f11.tau);
  c.expect(std::abs(f10.fidelity - o10) <= 1e-4 && std::abs(f11.fidelity - o11) <= 1e-4,
           "storage fidelity disagrees with the pure-loss oracle");

  lindblad::DissipationSweepConfig s1;
  s1.axis = lindblad::SweepAxis::kappa1_inv;
  s1.values = {1e-6, 2e-6, 5e-6, 10e-6, 20e-6, 50e-6, 100e-6};
  const auto r1 = lindblad::sweep(s1);
  lindblad::DissipationSweepConfig s2;
  s2.axis = lindblad::SweepAxis::kappa2_inv;
  s2.values = {2e-9, 5e-9, 10e-9, 20e-9, 50e-9, 100e-9};
  const auto r2 = lindblad::sweep(s2);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t i = 1; i < s1.values.size(); ++i) {
      c.expect(r1[s * s1.values.size() + i].fidelity > r1[s * s1.values.size() + i - 1].fidelity,
               "fidelity not increasing in 1/kappa1");
    }
    for (std::size_t i = 1; i < s2.values.size(); ++i) {
      c.expect(r2[s * s2.values.size() + i].fidelity < r2[s * s2.values.size() + i - 1].fidelity,
               "fidelity not decreasing in 1/kappa2");
    }
  }
  c.note(fmt("F|1,0> = %.6f, F|1,1> = %.6f", f10.fidelity, f11.fidelity) +
         fmt("; oracle %.6f, %.6f; sweeps monotone", o10, o11));
  return c.result();
}

CMatrix random_density(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  CMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

Outcome properties() {
  Check c;
  std::mt19937_64 rng(7);

  // Density-matrix invariants under partial trace, local unitaries and loss.
  const HilbertSpace space({{"a", 2}, {"b", 3}, {"c", 2}});
  for (int t = 0; t < 100; ++t) {
    const DensityMatrix rho(space, random_density(space.dimension(), rng));
    for (const auto& keep : std::vector<std::vector<std::string>>{{"a"}, {"b"}, {"a", "c"}}) {
      c.expect(partial_trace(rho, keep).is_physical(), "partial trace left the physical set");
    }
    c.expect(apply(pauli_x("a"), apply(pauli_z("c"), rho)).is_physical(), "local unitary left the physical set");
  }
  const auto loss = lindblad::LindbladModel::storage_loss(1.0);
  for (int t = 0; t < 10; ++t) {
    const DensityMatrix rho(loss.space(), random_density(loss.space().dimension(), rng));
    c.expect(lindblad::evolve(rho, loss, 1.0, 0.01).rho.is_physical(1e-10, 1e-12, 1e-9), "evolution left the physical set");
  }

  // Branch-probability conservation.
  std::normal_distribution<double> g;
  for (int t = 0; t < 100; ++t) {
    CVector v(16);
    for (int i = 0; i < 16; ++i) v(i) = Complex(g(rng), g(rng));
    const PureState psi(protocol::two_pair_space(), v / v.norm());
    for (auto rules : {protocol::RuleSet::weak_kerr, protocol::RuleSet::ideal_phase}) {
      double total = 0;
      for (const auto& b : protocol::qnd_branches(psi, table(), kEnc, rules)) total += b.probability;
      c.expect(std::abs(total - 1.0) <= 1e-12, "branch probabilities do not sum to one");
    }
  }
  for (int e = 0; e <= 2; ++e) {
    double total = 0;
    for (const auto& b : protocol::pdc_two_pair_round(e, table(), kEnc).branches) total += b.probability;
    c.expect(std::abs(total - 1.0) <= 1e-12, "PDC branch probabilities do not sum to one");
  }

  // Error law strictly decreasing in separation.
  double prev = homodyne::error_probability(0.0);
  for (int i = 1; i <= 1000; ++i) {
    const double p = homodyne::error_probability(0.01 * i);
    c.expect(p < prev, "error probability not decreasing");
    prev = p;
  }

  // RK4 global error scales as dt^4.
  const auto psi = lindblad::fock_state(loss.space(), lindblad::FockLabel{{1, 1}});
  std::vector<double> err;
  for (double dt : {0.05, 0.025, 0.0125}) {
    const double f = fidelity(lindblad::evolve(DensityMatrix::from_pure(psi), loss, 2.0, dt).rho, psi);
    err.push_back(std::abs(f - std::exp(-4.0)));
  }
  const double order1 = std::log2(err[0] / err[1]);
  const double order2 = std::log2(err[1] / err[2]);
  c.expect(std::abs(order1 - 4.0) <= 0.15 && std::abs(order2 - 4.0) <= 0.15,
           fmt("RK4 observed order %.3f, %.3f", order1, order2));
  c.note(fmt("invariants, conservation and monotonicity hold; RK4 order %.3f, %.3f", order1, order2));
  return c.result();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"chi reproduction", chi_reproduction},
      {"phase table", phase_table},
      {"alpha threshold", alpha_threshold},
      {"error-probability law", error_law},
      {"purification fidelity", purification},
      {"branch structure", branch_structure},
      {"dissipation fidelities", dissipation},
      {"property suites", properties},
  };
  int failures = 0;
  int index = 1;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", index++, name.c_str(), o.detail.c_str(), secs);
    if (!o.pass) ++failures;
  }
  std::fflush(stdout);
  return failures ? 1 : 0;
}
