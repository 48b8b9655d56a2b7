#pragma once

// Bit-flip entanglement purification with two parity-check QND detectors.
//
// Two copies of the bit-flip mixture
//     rho_cd = f |Phi><Phi| + (1 - f) |Psi><Psi|,
//     |Phi> = (|HH> + |VV>)/sqrt2,  |Psi> = (|HV> + |VH>)/sqrt2,
// are held as pairs c1d1 and c2d2 (Alice holds c1, c2; Bob holds d1, d2).
// Each party's detector sees one photon of each pair and imprints a probe
// phase theta_k set by the counted occupations (see kerr::PolarizationEncoding).
// Branches are grouped by the pair of phase levels Alice and Bob read out,
// decided (keep / correct / discard), and the kept pair c1d1 is recovered by
// measuring c2 and d2 in the diagonal basis and applying sigma_z to c1 when
// the two outcomes differ.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qndepp/hilbert.hpp"
#include "qndepp/homodyne.hpp"
#include "qndepp/kerr.hpp"
#include "qndepp/random.hpp"

namespace qndepp::protocol {

/// weak_kerr: the four phase levels are read out as distinct values.
/// ideal_phase: theta2 = theta0 + 2pi, so the two levels are one readout.
enum class RuleSet { weak_kerr, ideal_phase };

enum class SourceKind { ideal_source, pdc_single, pdc_two_pair };

/// keep_after_bitflip: sigma_x on one photon of each party (c1,d1 or c2,d2).
/// keep_after_bitflip_on_kept_pair: sigma_x on Alice's photon of a single
/// polarization-spatial pair.
enum class Action { keep_as_is, keep_after_bitflip, keep_after_bitflip_on_kept_pair, discard };

std::string to_string(RuleSet r);
std::string to_string(Action a);
std::string to_string(SourceKind s);
RuleSet rule_set_from_string(const std::string& s);

struct Correction {
  std::string op;    // "sigma_x" or "sigma_z"
  std::string mode;  // factor label, or "c" for Alice's photon of a PDC pair

  bool operator==(const Correction&) const = default;
};

struct Decision {
  Action action = Action::discard;
  std::vector<Correction> corrections;

  bool keeps() const { return action != Action::discard; }
};

struct ProtocolBranch {
  SourceKind source = SourceKind::ideal_source;
  std::string input_component;  // "PhiPhi", "PhiPsi", ... or "pairs=2,errors=1"
  double component_weight = 1.0;
  kerr::PhaseLevel level_alice = kerr::PhaseLevel::theta0;
  kerr::PhaseLevel level_bob = kerr::PhaseLevel::theta0;
  double theta_alice = 0.0;
  double theta_bob = 0.0;
  double probability = 0.0;  // conditional on the input component
  PureState post_state;      // projected and renormalized
  Decision decision;
  double final_fidelity = 0.0;  // NaN where not defined (discarded, or no single-pair output)

  bool matched() const { return level_alice == level_bob; }
};

struct MixedPairSpec {
  double f = 1.0;

  /// Requires f in (0.5, 1].
  static MixedPairSpec make(double f);
};

/// The weight f of a two-qubit bit-flip mixture f|Phi><Phi| + (1-f)|Psi><Psi|
/// on any two qubit labels. Throws if rho is not of that form within `tol`.
double bit_flip_weight(const DensityMatrix& rho, double tol = 1e-9);

struct RoundResult {
  double input_fidelity = 0.0;
  double kept_fidelity = 0.0;
  double success_probability = 0.0;
  std::vector<ProtocolBranch> branch_ledger;
  RuleSet rule_set = RuleSet::ideal_phase;
  std::optional<DensityMatrix> kept_state;  // c1d1, unit trace; empty if nothing kept
};

// --- States -----------------------------------------------------------------

/// (|H>_a|H>_b + |V>_a|V>_b)/sqrt2
PureState bell_phi(const std::string& a, const std::string& b);
/// (|H>_a|V>_b + |V>_a|H>_b)/sqrt2
PureState bell_psi(const std::string& a, const std::string& b);

/// Qubit space c1, d1, c2, d2.
HilbertSpace two_pair_space();

DensityMatrix make_mixed_pair(const MixedPairSpec& spec);

struct InputComponent {
  std::string name;
  double weight = 0.0;
  PureState state;
};

/// The four product components of rho (x) rho with weights f^2, f(1-f),
/// (1-f)f, (1-f)^2. Accepts any f in [0, 1]; zero-weight components are kept.
std::vector<InputComponent> two_pair_components(double f);

// --- Detection and decisions -------------------------------------------------

/// Phase levels read out by (Alice, Bob) for one computational basis index of
/// the two-pair qubit space or the polarization-spatial Fock space.
std::pair<kerr::PhaseLevel, kerr::PhaseLevel> detector_levels(const HilbertSpace& space,
                                                              std::size_t index,
                                                              const kerr::PolarizationEncoding& enc);

/// Splits a state into (Alice, Bob) phase groups. Under ideal_phase, theta2
/// readouts are merged into theta0 before grouping. Probabilities come from
/// squared norms of the projected components. Branches are returned ordered
/// by (level_alice, level_bob); their decision field is left as discard.
std::vector<ProtocolBranch> qnd_branches(const PureState& state, const kerr::PhaseShiftTable& table,
                                         const kerr::PolarizationEncoding& enc,
                                         RuleSet rules = RuleSet::weak_kerr);

/// Keep/correct/discard rule for one readout pair. Readouts the source cannot
/// produce (theta3 from the ideal source) are discarded; levels outside
/// theta0..theta3 throw.
Decision decide(const ProtocolBranch& branch, RuleSet rules);
Decision decide(SourceKind source, const std::string& input_component, kerr::PhaseLevel alice,
                kerr::PhaseLevel bob, RuleSet rules);

/// Applies a decision's corrections to a post-selection state.
PureState apply_corrections(const PureState& state, const std::vector<Correction>& corrections);

// --- Finishing a round ---------------------------------------------------------

/// Diagonal-basis measurement of c2 and d2, sigma_z on c1 for unequal
/// outcomes, and trace over c2 d2. Exact: the outcome-averaged c1d1 state.
DensityMatrix finish_pair(const PureState& corrected_two_pair);
/// Sampled: the c1d1 state for one random measurement outcome.
DensityMatrix finish_pair(const PureState& corrected_two_pair, Rng& rng);

/// Aggregates decided ideal-source branches (weights = component_weight x
/// probability) into a round result. Fills final_fidelity per branch.
RoundResult finish_round(std::vector<ProtocolBranch> ledger, RuleSet rules);

/// f^2 / (f^2 + (1 - f)^2), f in [0, 1].
double f_ideal(double f);

/// Exact enumeration of one ideal-source round for the bit-flip mixture with
/// weight f (any f in [0, 1]).
RoundResult run_round(double f, const kerr::PhaseShiftTable& table,
                      const kerr::PolarizationEncoding& enc, RuleSet rules);

/// Homodyne readout of the probe phase. Without alpha the phase is read
/// perfectly. level_phases overrides the phase each level carries (for
/// instance rounded values); otherwise the table's phases are used.
struct ReadoutModel {
  std::optional<double> alpha;
  std::optional<std::array<double, 4>> level_phases;
};

/// One bin per level, in level order. Under ideal_phase the theta2 bin
/// carries theta0's phase, so classification never reports theta2.
homodyne::PhaseBinSet readout_bins(const kerr::PhaseShiftTable& table, RuleSet rules,
                                   const std::optional<std::array<double, 4>>& level_phases = {});

/// Exact enumeration with homodyne readout: every true branch is spread over
/// readout pairs by the per-side confusion matrix, and the decision taken on
/// the readout is applied to the true state.
struct ReadoutPrediction {
  double kept_fidelity = 0.0;
  double success_probability = 0.0;
};
ReadoutPrediction predict_with_readout(double f, const kerr::PhaseShiftTable& table,
                                       const kerr::PolarizationEncoding& enc, RuleSet rules,
                                       const ReadoutModel& readout);

/// Fidelities f_0, f_1, ..., f_rounds obtained by feeding each round's kept
/// c1d1 state back in as the next input mixture.
std::vector<double> iterate_rounds(double f0, int rounds, const kerr::PhaseShiftTable& table,
                                   const kerr::PolarizationEncoding& enc, RuleSet rules);

// --- Monte Carlo ----------------------------------------------------------------

struct MonteCarloConfig {
  std::uint64_t trials = 0;
  ReadoutModel readout;
  std::uint64_t seed = 0;
  unsigned shards = 8;          // fixed shard count keeps results thread-independent
};

struct MonteCarloResult {
  std::uint64_t trials = 0;
  std::uint64_t kept = 0;
  double kept_fidelity = 0.0;         // mean over kept trials
  double kept_fidelity_stderr = 0.0;
  double success_probability = 0.0;
  double success_stderr = 0.0;        // binomial
};

/// Samples the input component, the true branch, both homodyne readouts
/// (through homodyne::sample_and_classify when alpha is finite), the
/// decision and the diagonal measurement, trial by trial.
MonteCarloResult monte_carlo_round(double f, const kerr::PhaseShiftTable& table,
                                   const kerr::PolarizationEncoding& enc, RuleSet rules,
                                   const MonteCarloConfig& config);

}  // namespace qndepp::protocol
