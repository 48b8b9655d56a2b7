#include <cmath>
#include <map>
#include <stdexcept>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qndepp/pdc.hpp"

using namespace qndepp;
using namespace qndepp::protocol;

namespace {

const kerr::PhaseShiftTable& table() {
  static const auto t = kerr::build_phase_table(kerr::KerrSystemParams::reference(), 2);
  return t;
}
const kerr::PolarizationEncoding kEnc = kerr::PolarizationEncoding::standard();

oracle::FockState oracle_input(int pairs, int errors) {
  oracle::FockState psi{{oracle::Occupation{}, 1.0}};
  if (pairs == 1) return oracle::pair_op(psi, errors == 1);
  psi = oracle::pair_op(psi, errors == 2);
  return oracle::pair_op(psi, errors >= 1);
}

std::map<std::pair<int, int>, double> library_weights(const std::vector<ProtocolBranch>& branches) {
  std::map<std::pair<int, int>, double> w;
  for (const auto& b : branches) w[{static_cast<int>(b.level_alice), static_cast<int>(b.level_bob)}] += b.probability;
  return w;
}

}  // namespace

TEST(PdcInput, AmplitudesMatchSparseFockAlgebra) {
  const auto space = pdc_space();
  for (auto [pairs, errors] : {std::pair{1, 0}, {1, 1}, {2, 0}, {2, 1}, {2, 2}}) {
    const auto psi = pdc_input(pairs, errors);
    const auto expected = oracle_input(pairs, errors);
    double norm2 = 0;
    for (const auto& [occ, amp] : expected) {
      const std::vector<int> digits(occ.begin(), occ.end());
      EXPECT_NEAR(psi.amplitude(digits).real(), amp, 1e-12);
      norm2 += amp * amp;
    }
    EXPECT_NEAR(psi.norm() * psi.norm(), norm2, 1e-10) << pairs << "," << errors;
  }
}

TEST(PdcInput, DoubleOccupationCarriesBosonicFactor) {
  const auto psi = pdc_input(2, 0);
  // (c1H+ d1H+)^2 |0> = 2 |2,2>, the only term with two photons in c1H.
  const std::vector<int> d{2, 0, 0, 0, 2, 0, 0, 0};
  EXPECT_NEAR(psi.amplitude(d).real(), 2.0, 1e-12);
  EXPECT_THROW(pdc_input(3, 0), std::invalid_argument);
}

TEST(PdcTwoPair, LevelWeightsMatchSparseFockAlgebra) {
  for (int e = 0; e <= 2; ++e) {
    const auto round = pdc_two_pair_round(e, table(), kEnc);
    const auto lib = library_weights(round.branches);
    const auto ref = oracle::level_weights(oracle_input(2, e));
    ASSERT_EQ(lib.size(), ref.size()) << e;
    for (const auto& [k, v] : ref) EXPECT_NEAR(lib.at(k), v, 1e-12) << e << ": " << k.first << "," << k.second;
    double total = 0;
    for (const auto& b : round.branches) total += b.probability;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(PdcTwoPair, NoErrorWeightsPerLevel) {
  const auto lib = library_weights(pdc_two_pair_round(0, table(), kEnc).branches);
  EXPECT_NEAR(lib.at({3, 3}), 0.2, 1e-12);
  EXPECT_NEAR(lib.at({2, 2}), 0.1, 1e-12);
  EXPECT_NEAR(lib.at({0, 0}), 0.3, 1e-12);
  EXPECT_NEAR(lib.at({1, 1}), 0.4, 1e-12);
}

TEST(PdcTwoPair, KeptWeights) {
  EXPECT_NEAR(pdc_two_pair_round(0, table(), kEnc).kept_weight, 1.0, 1e-12);
  EXPECT_EQ(pdc_two_pair_round(1, table(), kEnc).kept_weight, 0.0);
  const auto one = pdc_two_pair_round(1, table(), kEnc);
  for (const auto& b : one.branches) EXPECT_FALSE(b.matched());
  EXPECT_NEAR(pdc_two_pair_round(2, table(), kEnc).kept_weight, 0.4, 1e-12);
  EXPECT_THROW(pdc_two_pair_round(3, table(), kEnc), std::invalid_argument);
}

TEST(PdcSingle, BothCasesDeliverThePhiPairAtTheOutputPorts) {
  for (bool err : {false, true}) {
    const auto branches = pdc_single_pair_round(table(), kEnc, err);
    double total = 0;
    for (const auto& b : branches) {
      total += b.probability;
      EXPECT_TRUE(b.decision.keeps());
      EXPECT_NEAR(b.probability, 0.5, 1e-12);
      EXPECT_NEAR(b.final_fidelity, 1.0, 1e-12);
      if (err) {
        EXPECT_FALSE(b.matched());
        EXPECT_EQ(b.decision.action, Action::keep_after_bitflip_on_kept_pair);
      } else {
        EXPECT_TRUE(b.matched());
        EXPECT_EQ(b.decision.action, Action::keep_as_is);
      }
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Ports, SinglePairLandsInOnePortPerSide) {
  const auto branches = pdc_single_pair_round(table(), kEnc, false);
  for (const auto& b : branches) {
    const auto ports = route_to_ports(b.post_state, kEnc);
    const auto n = port_photon_numbers(ports);
    EXPECT_NEAR(n[0] + n[1], 1.0, 1e-12);
    EXPECT_NEAR(n[2] + n[3], 1.0, 1e-12);
    const int port = n[0] > 0.5 ? 1 : 2;
    const auto pol = port_polarization_state(ports, port);
    EXPECT_NEAR(overlap_magnitude(pol, bell_phi("c", "d")), 1.0, 1e-12);
    EXPECT_THROW(port_polarization_state(ports, 3 - port), std::invalid_argument);
  }
}

TEST(PairTerms, IdealAndBitFlippedSetsDiffer) {
  const auto ideal = pdc_pair_terms(false);
  const auto flip = pdc_pair_terms(true);
  ASSERT_EQ(ideal.size(), 4u);
  ASSERT_EQ(flip.size(), 4u);
  EXPECT_EQ(ideal[0].alice, "c1H");
  EXPECT_EQ(ideal[0].bob, "d1H");
  EXPECT_EQ(flip[0].alice, "c1V");
  EXPECT_EQ(flip[0].bob, "d1H");
}
