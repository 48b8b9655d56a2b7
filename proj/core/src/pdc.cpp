#include "qndepp/pdc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qndepp::protocol {

namespace {

constexpr std::array<const char*, 8> kModes = {"c1H", "c1V", "c2H", "c2V", "d1H", "d1V", "d2H", "d2V"};

std::string port_label(char side, int port, Polarization p) {
  return std::string(1, side) + "@" + std::to_string(port) + to_char(p);
}

std::string component_name(int pairs, int errors) {
  return "pairs=" + std::to_string(pairs) + ",errors=" + std::to_string(errors);
}

// Output port (1 or 2) of detector-stage mode `side mode pol`.
int port_of(int mode, Polarization pol, const kerr::PolarizationEncoding& enc) {
  return enc.counted(mode) == pol ? 2 : 1;
}

}  // namespace

HilbertSpace pdc_space() {
  std::vector<Factor> fs;
  for (const char* m : kModes) fs.push_back({m, kFockCutoff});
  return HilbertSpace(std::move(fs));
}

PureState pdc_vacuum() {
  const auto space = pdc_space();
  std::vector<int> zeros(space.size(), 0);
  return PureState::basis(space, zeros);
}

std::vector<PairTerm> pdc_pair_terms(bool bit_flip) {
  if (!bit_flip) return {{"c1H", "d1H"}, {"c1V", "d1V"}, {"c2H", "d2H"}, {"c2V", "d2V"}};
  return {{"c1V", "d1H"}, {"c1H", "d1V"}, {"c2V", "d2H"}, {"c2H", "d2V"}};
}

PureState apply_pair_creation(const std::vector<PairTerm>& terms, const PureState& psi) {
  const auto& space = psi.space();
  CVector out = CVector::Zero(psi.amplitudes().size());
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    const Complex a = psi.amplitudes()(static_cast<Eigen::Index>(i));
    if (a == Complex{}) continue;
    const auto digits = space.digits(i);
    for (const auto& t : terms) {
      auto d = digits;
      const std::size_t pa = space.position(t.alice);
      const std::size_t pb = space.position(t.bob);
      if (pa == pb) throw std::invalid_argument("apply_pair_creation: a term must name two distinct modes");
      const double amp = std::sqrt(d[pa] + 1.0) * std::sqrt(d[pb] + 1.0);
      ++d[pa];
      ++d[pb];
      if (d[pa] >= space.factors()[pa].dim || d[pb] >= space.factors()[pb].dim) {
        throw std::out_of_range("apply_pair_creation: Fock cutoff exceeded");
      }
      out(static_cast<Eigen::Index>(space.index(d))) += amp * a;
    }
  }
  return PureState(space, std::move(out));
}

PureState pdc_input(int pairs, int error_count) {
  const auto p = pdc_pair_terms(false);
  const auto e = pdc_pair_terms(true);
  const auto vac = pdc_vacuum();
  if (pairs == 1) {
    if (error_count == 0) return apply_pair_creation(p, vac);
    if (error_count == 1) return apply_pair_creation(e, vac);
    throw std::invalid_argument("pdc_input: a single pair carries 0 or 1 errors");
  }
  if (pairs == 2) {
    switch (error_count) {
      case 0: return apply_pair_creation(p, apply_pair_creation(p, vac));
      case 1: return apply_pair_creation(p, apply_pair_creation(e, vac));
      case 2: return apply_pair_creation(e, apply_pair_creation(e, vac));
      default: throw std::invalid_argument("pdc_input: error_count must be 0, 1 or 2");
    }
  }
  throw std::invalid_argument("pdc_input: pairs must be 1 or 2");
}

HilbertSpace output_port_space() {
  std::vector<Factor> fs;
  for (char side : {'c', 'd'}) {
    for (int port : {1, 2}) {
      for (auto pol : {Polarization::H, Polarization::V}) fs.push_back({port_label(side, port, pol), kFockCutoff});
    }
  }
  return HilbertSpace(std::move(fs));
}

PureState route_to_ports(const PureState& state, const kerr::PolarizationEncoding& enc) {
  const auto& in = state.space();
  const auto out_space = output_port_space();

  // src[j]: input factor feeding output factor j.
  std::vector<std::size_t> src(out_space.size(), out_space.size());
  for (char side : {'c', 'd'}) {
    for (int mode : {1, 2}) {
      for (auto pol : {Polarization::H, Polarization::V}) {
        const std::string from = std::string(1, side) + std::to_string(mode) + to_char(pol);
        const std::size_t j = out_space.position(port_label(side, port_of(mode, pol, enc), pol));
        if (src[j] != out_space.size()) {
          throw std::invalid_argument("route_to_ports: encoding sends two modes to one port polarization");
        }
        src[j] = in.position(from);
      }
    }
  }

  CVector out = CVector::Zero(static_cast<Eigen::Index>(out_space.dimension()));
  std::vector<int> d(out_space.size());
  for (std::size_t i = 0; i < in.dimension(); ++i) {
    const Complex a = state.amplitudes()(static_cast<Eigen::Index>(i));
    if (a == Complex{}) continue;
    const auto digits = in.digits(i);
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = digits[src[j]];
    out(static_cast<Eigen::Index>(out_space.index(d))) = a;
  }
  return PureState(out_space, std::move(out));
}

std::array<double, 4> port_photon_numbers(const PureState& ports) {
  const auto& space = ports.space();
  std::array<double, 4> n{};
  const double total = ports.norm() * ports.norm();
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    const double p = std::norm(ports.amplitudes()(static_cast<Eigen::Index>(i)));
    if (p == 0.0) continue;
    const auto d = space.digits(i);
    // Factor order: c@1H c@1V c@2H c@2V d@1H d@1V d@2H d@2V.
    for (std::size_t k = 0; k < 4; ++k) n[k] += p * (d[2 * k] + d[2 * k + 1]);
  }
  for (auto& x : n) x /= total;
  return n;
}

PureState port_polarization_state(const PureState& ports, int port) {
  if (port != 1 && port != 2) throw std::invalid_argument("port_polarization_state: port must be 1 or 2");
  const auto& space = ports.space();
  const auto qubits = HilbertSpace::qubits({"c", "d"});
  CVector out = CVector::Zero(4);
  const std::size_t other = port == 1 ? 2 : 0;  // offset of the other port's H factor
  const std::size_t mine = port == 1 ? 0 : 2;
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    const Complex a = ports.amplitudes()(static_cast<Eigen::Index>(i));
    if (a == Complex{}) continue;
    const auto d = space.digits(i);
    int pol[2] = {0, 0};
    for (std::size_t side = 0; side < 2; ++side) {
      const std::size_t base = 4 * side;
      if (d[base + other] != 0 || d[base + other + 1] != 0 || d[base + mine] + d[base + mine + 1] != 1) {
        throw std::invalid_argument("port_polarization_state: not a single pair in the requested port");
      }
      pol[side] = d[base + mine] == 1 ? 0 : 1;
    }
    out(pol[0] * 2 + pol[1]) += a;
  }
  return PureState(qubits, std::move(out));
}

std::vector<ProtocolBranch> pdc_single_pair_round(const kerr::PhaseShiftTable& table,
                                                  const kerr::PolarizationEncoding& enc,
                                                  bool with_error, RuleSet rules) {
  const int errors = with_error ? 1 : 0;
  auto branches = qnd_branches(pdc_input(1, errors).normalized(), table, enc, rules);
  const auto phi = bell_phi("c", "d");
  for (auto& b : branches) {
    b.source = SourceKind::pdc_single;
    b.input_component = component_name(1, errors);
    b.decision = decide(b, rules);
    b.final_fidelity = std::numeric_limits<double>::quiet_NaN();
    if (!b.decision.keeps()) continue;
    const auto ports = route_to_ports(apply_corrections(b.post_state, b.decision.corrections), enc);
    const auto n = port_photon_numbers(ports);
    const int port = n[0] > 0.5 ? 1 : 2;
    const auto pol = port_polarization_state(ports, port);
    b.final_fidelity = std::norm(phi.inner(pol));
  }
  return branches;
}

PdcRound pdc_two_pair_round(int error_count, const kerr::PhaseShiftTable& table,
                            const kerr::PolarizationEncoding& enc, RuleSet rules) {
  if (error_count < 0 || error_count > 2) {
    throw std::invalid_argument("pdc_two_pair_round: error_count must be 0, 1 or 2");
  }
  PdcRound r;
  r.error_count = error_count;
  r.branches = qnd_branches(pdc_input(2, error_count).normalized(), table, enc, rules);
  for (auto& b : r.branches) {
    b.source = SourceKind::pdc_two_pair;
    b.input_component = component_name(2, error_count);
    b.decision = decide(b, rules);
    b.final_fidelity = std::numeric_limits<double>::quiet_NaN();
    if (b.decision.keeps()) r.kept_weight += b.probability;
  }
  return r;
}

}  // namespace qndepp::protocol
