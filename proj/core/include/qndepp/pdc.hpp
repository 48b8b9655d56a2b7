#pragma once

// Polarization-spatial entangled source with double-pair emission.
//
// Eight Fock modes c1H c1V c2H c2V d1H d1V d2H d2V (cutoff 3, so two photons
// in one mode are exact). A pair is created by
//     P = c1H+ d1H+ + c1V+ d1V+ + c2H+ d2H+ + c2V+ d2V+
// and a bit-flipped pair by
//     E = c1V+ d1H+ + c1H+ d1V+ + c2V+ d2H+ + c2H+ d2V+.
// After the detectors, polarizing couplers send c2H and c1V to output port 1
// and c1H and c2V to output port 2 (likewise for d), so port 1 carries the
// uncounted and port 2 the counted polarizations.

#include <array>
#include <string>
#include <vector>

#include "qndepp/hilbert.hpp"
#include "qndepp/kerr.hpp"
#include "qndepp/protocol.hpp"

namespace qndepp::protocol {

inline constexpr int kFockCutoff = 3;

/// c1H c1V c2H c2V d1H d1V d2H d2V, each of dimension kFockCutoff.
HilbertSpace pdc_space();
PureState pdc_vacuum();

struct PairTerm {
  std::string alice;  // e.g. "c1H"
  std::string bob;    // e.g. "d1H"
};

/// Terms of P (bit_flip = false) or E (bit_flip = true).
std::vector<PairTerm> pdc_pair_terms(bool bit_flip);

/// sum over terms of a_alice+ a_bob+ |psi>, with sqrt(n+1) factors.
PureState apply_pair_creation(const std::vector<PairTerm>& terms, const PureState& psi);

/// Unnormalized P|0> or E|0> (pairs = 1) and P^2|0>, P E|0>, E^2|0>
/// (pairs = 2 with error_count 0, 1, 2).
PureState pdc_input(int pairs, int error_count);

/// Branches of one pair, optionally bit-flipped. Decisions and, for kept
/// branches, the output-port fidelity vs (|HH> + |VV>)/sqrt2 are filled in.
std::vector<ProtocolBranch> pdc_single_pair_round(const kerr::PhaseShiftTable& table,
                                                  const kerr::PolarizationEncoding& enc,
                                                  bool with_error,
                                                  RuleSet rules = RuleSet::weak_kerr);

struct PdcRound {
  int error_count = 0;
  std::vector<ProtocolBranch> branches;
  double kept_weight = 0.0;  // total probability of kept branches
};

/// Branches of a double-pair emission with 0, 1 or 2 bit-flip errors.
/// Throws std::invalid_argument for any other error count.
PdcRound pdc_two_pair_round(int error_count, const kerr::PhaseShiftTable& table,
                            const kerr::PolarizationEncoding& enc,
                            RuleSet rules = RuleSet::weak_kerr);

/// Space of the coupler outputs: c1H c1V c2H c2V d1H d1V d2H d2V relabelled
/// as port modes "c@1H" ... "d@2V".
HilbertSpace output_port_space();

/// Routes the detector-stage modes through the polarizing couplers.
PureState route_to_ports(const PureState& state, const kerr::PolarizationEncoding& enc);

/// Mean photon number in each output port: {c@1, c@2, d@1, d@2}.
std::array<double, 4> port_photon_numbers(const PureState& ports);

/// Polarization qubit state {c, d} of a single pair sitting in one port
/// (1 or 2). Throws std::invalid_argument if any component of the state has
/// photons elsewhere or more than one photon per side.
PureState port_polarization_state(const PureState& ports, int port);

}  // namespace qndepp::protocol
