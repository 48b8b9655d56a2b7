#include "qndepp/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

namespace qndepp::protocol {

using kerr::PhaseLevel;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

PhaseLevel alias(PhaseLevel level, RuleSet rules) {
  return rules == RuleSet::ideal_phase && level == PhaseLevel::theta2 ? PhaseLevel::theta0 : level;
}

void check_level(PhaseLevel level) {
  const int v = static_cast<int>(level);
  if (v < 0 || v > 3) throw std::invalid_argument("decide: unknown phase level");
}

bool is_two_pair_qubit_space(const HilbertSpace& s) {
  for (const char* l : {"c1", "d1", "c2", "d2"}) {
    if (!s.contains(l) || s.dim_of(l) != 2) return false;
  }
  return true;
}

bool is_fock_pair_space(const HilbertSpace& s) {
  for (const char* side : {"c", "d"}) {
    for (const char* m : {"1", "2"}) {
      for (const char* p : {"H", "V"}) {
        if (!s.contains(std::string(side) + m + p)) return false;
      }
    }
  }
  return true;
}

// Exchanges the H and V Fock factors of one spatial mode.
LinearOperator polarization_swap(const std::string& mode, int dim) {
  const HilbertSpace pair({{mode + "H", dim}, {mode + "V", dim}});
  const auto n = static_cast<Eigen::Index>(pair.dimension());
  CMatrix m = CMatrix::Zero(n, n);
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) m(a * dim + b, b * dim + a) = 1.0;
  }
  return LinearOperator(pair, m, true);
}

struct FinishOutcomes {
  std::array<double, 4> probability{};
  std::array<DensityMatrix, 4> c1d1;  // normalized; unset where probability is 0
};

FinishOutcomes finish_outcomes(const PureState& psi) {
  const double total = psi.norm() * psi.norm();
  if (!(total > 0.0)) throw std::domain_error("finish_pair: zero state");
  FinishOutcomes out;
  const std::vector<std::string> keep{"c1", "d1"};
  std::size_t k = 0;
  for (int sc : {+1, -1}) {
    for (int sd : {+1, -1}) {
      const auto pc = projector(diagonal_ket("c2", sc));
      const auto pd = projector(diagonal_ket("d2", sd));
      PureState projected = apply(pd, apply(pc, psi));
      const double p = projected.norm() * projected.norm() / total;
      out.probability[k] = p;
      if (p > 1e-15) {
        if (sc != sd) projected = apply(pauli_z("c1"), projected);
        out.c1d1[k] = partial_trace(DensityMatrix::from_pure(projected.normalized()), keep);
      }
      ++k;
    }
  }
  return out;
}

}  // namespace

std::string to_string(RuleSet r) { return r == RuleSet::weak_kerr ? "weak_kerr" : "ideal_phase"; }

std::string to_string(Action a) {
  switch (a) {
    case Action::keep_as_is: return "keep_as_is";
    case Action::keep_after_bitflip: return "keep_after_bitflip";
    case Action::keep_after_bitflip_on_kept_pair: return "keep_after_bitflip_on_kept_pair";
    case Action::discard: return "discard";
  }
  return "?";
}

std::string to_string(SourceKind s) {
  switch (s) {
    case SourceKind::ideal_source: return "ideal_source";
    case SourceKind::pdc_single: return "pdc_single";
    case SourceKind::pdc_two_pair: return "pdc_two_pair";
  }
  return "?";
}

RuleSet rule_set_from_string(const std::string& s) {
  if (s == "weak_kerr") return RuleSet::weak_kerr;
  if (s == "ideal_phase") return RuleSet::ideal_phase;
  throw std::invalid_argument("unknown rule set '" + s + "' (expected weak_kerr or ideal_phase)");
}

MixedPairSpec MixedPairSpec::make(double f) {
  if (!(f > 0.5 && f <= 1.0)) throw std::invalid_argument("MixedPairSpec: f must lie in (0.5, 1]");
  return MixedPairSpec{f};
}

PureState bell_phi(const std::string& a, const std::string& b) {
  const auto hh = tensor(polarization_ket(a, Polarization::H), polarization_ket(b, Polarization::H));
  const auto vv = tensor(polarization_ket(a, Polarization::V), polarization_ket(b, Polarization::V));
  return (hh + vv) * Complex(std::numbers::sqrt2 / 2.0);
}

PureState bell_psi(const std::string& a, const std::string& b) {
  const auto hv = tensor(polarization_ket(a, Polarization::H), polarization_ket(b, Polarization::V));
  const auto vh = tensor(polarization_ket(a, Polarization::V), polarization_ket(b, Polarization::H));
  return (hv + vh) * Complex(std::numbers::sqrt2 / 2.0);
}

HilbertSpace two_pair_space() { return HilbertSpace::qubits({"c1", "d1", "c2", "d2"}); }

DensityMatrix make_mixed_pair(const MixedPairSpec& spec) {
  const auto checked = MixedPairSpec::make(spec.f);
  return DensityMatrix::from_pure(bell_phi("c", "d")) * checked.f +
         DensityMatrix::from_pure(bell_psi("c", "d")) * (1.0 - checked.f);
}

double bit_flip_weight(const DensityMatrix& rho, double tol) {
  const auto& fs = rho.space().factors();
  if (fs.size() != 2 || fs[0].dim != 2 || fs[1].dim != 2) {
    throw std::invalid_argument("bit_flip_weight: expected a two-qubit state");
  }
  const auto phi = bell_phi(fs[0].label, fs[1].label);
  const auto psi = bell_psi(fs[0].label, fs[1].label);
  const double f = fidelity(rho, phi);
  const CMatrix model = DensityMatrix::from_pure(phi).entries() * f +
                        DensityMatrix::from_pure(psi).entries() * (1.0 - f);
  if ((model - rho.entries()).cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("bit_flip_weight: state is not a bit-flip mixture");
  }
  return f;
}

std::vector<InputComponent> two_pair_components(double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("two_pair_components: f must lie in [0, 1]");
  const auto phi1 = bell_phi("c1", "d1");
  const auto psi1 = bell_psi("c1", "d1");
  const auto phi2 = bell_phi("c2", "d2");
  const auto psi2 = bell_psi("c2", "d2");
  return {
      {"PhiPhi", f * f, tensor(phi1, phi2)},
      {"PhiPsi", f * (1.0 - f), tensor(phi1, psi2)},
      {"PsiPhi", (1.0 - f) * f, tensor(psi1, phi2)},
      {"PsiPsi", (1.0 - f) * (1.0 - f), tensor(psi1, psi2)},
  };
}

std::pair<PhaseLevel, PhaseLevel> detector_levels(const HilbertSpace& space, std::size_t index,
                                                  const kerr::PolarizationEncoding& enc) {
  const auto digits = space.digits(index);
  const auto digit = [&](const std::string& label) { return digits[space.position(label)]; };

  if (is_two_pair_qubit_space(space)) {
    const auto pol = [&](const std::string& label) { return static_cast<Polarization>(digit(label)); };
    return {kerr::detector_level(pol("c1"), pol("c2"), enc),
            kerr::detector_level(pol("d1"), pol("d2"), enc)};
  }
  if (is_fock_pair_space(space)) {
    const std::string p1(1, to_char(enc.counted(1)));
    const std::string p2(1, to_char(enc.counted(2)));
    return {kerr::level_of(digit("c1" + p1), digit("c2" + p2)),
            kerr::level_of(digit("d1" + p1), digit("d2" + p2))};
  }
  throw std::invalid_argument(
      "detector_levels: state must live on qubits c1,d1,c2,d2 or on the Fock modes c1H..d2V");
}

std::vector<ProtocolBranch> qnd_branches(const PureState& state, const kerr::PhaseShiftTable& table,
                                         const kerr::PolarizationEncoding& enc, RuleSet rules) {
  const auto& space = state.space();
  const double total = state.norm() * state.norm();
  if (!(total > 0.0)) throw std::domain_error("qnd_branches: zero state");

  std::map<std::pair<PhaseLevel, PhaseLevel>, CVector> groups;
  const auto& amps = state.amplitudes();
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    const Complex a = amps(static_cast<Eigen::Index>(i));
    if (a == Complex{}) continue;
    auto [la, lb] = detector_levels(space, i, enc);
    const auto key = std::make_pair(alias(la, rules), alias(lb, rules));
    auto it = groups.find(key);
    if (it == groups.end()) it = groups.emplace(key, CVector::Zero(amps.size())).first;
    it->second(static_cast<Eigen::Index>(i)) = a;
  }

  std::vector<ProtocolBranch> out;
  for (const auto& [key, vec] : groups) {
    ProtocolBranch b;
    b.source = is_two_pair_qubit_space(space) ? SourceKind::ideal_source : SourceKind::pdc_two_pair;
    b.level_alice = key.first;
    b.level_bob = key.second;
    b.theta_alice = table.theta(key.first);
    b.theta_bob = table.theta(key.second);
    b.probability = vec.squaredNorm() / total;
    b.post_state = PureState(space, vec).normalized();
    b.final_fidelity = kNaN;
    out.push_back(std::move(b));
  }
  return out;
}

Decision decide(SourceKind source, const std::string& input_component, PhaseLevel alice,
                PhaseLevel bob, RuleSet rules) {
  check_level(alice);
  check_level(bob);
  alice = alias(alice, rules);
  bob = alias(bob, rules);

  switch (source) {
    case SourceKind::ideal_source: {
      if (alice != bob || alice == PhaseLevel::theta3) return {};
      if (alice == PhaseLevel::theta1) return {Action::keep_as_is, {}};
      // (theta0, theta0) and (theta2, theta2) under the weak Kerr rules
      // collapse onto product states; only the merged ideal-phase group is
      // a GHZ-type superposition that a bit flip turns into |HHHH> + |VVVV>.
      if (rules == RuleSet::weak_kerr) return {};
      if (input_component == "PsiPsi") {
        return {Action::keep_after_bitflip, {{"sigma_x", "c2"}, {"sigma_x", "d2"}}};
      }
      return {Action::keep_after_bitflip, {{"sigma_x", "c1"}, {"sigma_x", "d1"}}};
    }
    case SourceKind::pdc_single: {
      if (alice == bob && (alice == PhaseLevel::theta0 || alice == PhaseLevel::theta1)) {
        return {Action::keep_as_is, {}};
      }
      const bool flipped = (alice == PhaseLevel::theta0 && bob == PhaseLevel::theta1) ||
                           (alice == PhaseLevel::theta1 && bob == PhaseLevel::theta0);
      if (flipped) return {Action::keep_after_bitflip_on_kept_pair, {{"sigma_x", "c"}}};
      return {};
    }
    case SourceKind::pdc_two_pair:
      if (alice == bob) return {Action::keep_as_is, {}};
      return {};
  }
  throw std::invalid_argument("decide: unknown source kind");
}

Decision decide(const ProtocolBranch& branch, RuleSet rules) {
  return decide(branch.source, branch.input_component, branch.level_alice, branch.level_bob, rules);
}

PureState apply_corrections(const PureState& state, const std::vector<Correction>& corrections) {
  PureState out = state;
  for (const auto& c : corrections) {
    if (c.mode == "c" || c.mode == "d") {
      if (c.op != "sigma_x") throw std::invalid_argument("apply_corrections: only sigma_x acts on a whole photon");
      for (const char* m : {"1", "2"}) {
        const std::string mode = c.mode + m;
        out = apply(polarization_swap(mode, out.space().dim_of(mode + "H")), out);
      }
    } else if (c.op == "sigma_x") {
      out = apply(pauli_x(c.mode), out);
    } else if (c.op == "sigma_z") {
      out = apply(pauli_z(c.mode), out);
    } else {
      throw std::invalid_argument("apply_corrections: unknown operator '" + c.op + "'");
    }
  }
  return out;
}

DensityMatrix finish_pair(const PureState& corrected_two_pair) {
  const auto o = finish_outcomes(corrected_two_pair);
  DensityMatrix acc(HilbertSpace::qubits({"c1", "d1"}), CMatrix::Zero(4, 4));
  for (std::size_t k = 0; k < 4; ++k) {
    if (o.probability[k] > 1e-15) acc = acc + o.c1d1[k] * o.probability[k];
  }
  return acc;
}

DensityMatrix finish_pair(const PureState& corrected_two_pair, Rng& rng) {
  const auto o = finish_outcomes(corrected_two_pair);
  std::discrete_distribution<std::size_t> pick(o.probability.begin(), o.probability.end());
  return o.c1d1[pick(rng)];
}

RoundResult finish_round(std::vector<ProtocolBranch> ledger, RuleSet rules) {
  RoundResult r;
  r.rule_set = rules;
  const auto phi = bell_phi("c1", "d1");
  DensityMatrix acc(HilbertSpace::qubits({"c1", "d1"}), CMatrix::Zero(4, 4));
  double kept = 0.0;
  for (auto& b : ledger) {
    if (!b.decision.keeps()) {
      b.final_fidelity = kNaN;
      continue;
    }
    const auto rho = finish_pair(apply_corrections(b.post_state, b.decision.corrections));
    b.final_fidelity = fidelity(rho, phi);
    const double w = b.component_weight * b.probability;
    if (w > 0.0) {
      acc = acc + rho * w;
      kept += w;
    }
  }
  r.success_probability = kept;
  if (kept > 0.0) {
    r.kept_state = acc * (1.0 / kept);
    r.kept_fidelity = fidelity(*r.kept_state, phi);
  } else {
    r.kept_fidelity = kNaN;
  }
  r.branch_ledger = std::move(ledger);
  return r;
}

double f_ideal(double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("f_ideal: f must lie in [0, 1]");
  const double g = 1.0 - f;
  return f * f / (f * f + g * g);
}

RoundResult run_round(double f, const kerr::PhaseShiftTable& table,
                      const kerr::PolarizationEncoding& enc, RuleSet rules) {
  std::vector<ProtocolBranch> ledger;
  for (const auto& comp : two_pair_components(f)) {
    for (auto& b : qnd_branches(comp.state, table, enc, rules)) {
      b.input_component = comp.name;
      b.component_weight = comp.weight;
      b.decision = decide(b, rules);
      ledger.push_back(std::move(b));
    }
  }
  auto r = finish_round(std::move(ledger), rules);
  r.input_fidelity = f;
  return r;
}

homodyne::PhaseBinSet readout_bins(const kerr::PhaseShiftTable& table, RuleSet rules,
                                   const std::optional<std::array<double, 4>>& level_phases) {
  std::vector<homodyne::PhaseBinSet::Bin> bins;
  for (auto level : kerr::kAllLevels) {
    const auto carried = alias(level, rules);
    const double theta = level_phases ? (*level_phases)[static_cast<std::size_t>(carried)]
                                      : table.theta(carried);
    bins.push_back({kerr::to_string(level), theta});
  }
  return homodyne::PhaseBinSet(std::move(bins));
}

namespace {

// Per-side readout distribution for every true level.
Eigen::MatrixXd readout_confusion(const homodyne::PhaseBinSet& bins, const ReadoutModel& readout) {
  if (!readout.alpha) return Eigen::MatrixXd::Identity(4, 4);
  return bins.confusion_matrix(*readout.alpha);
}

struct Component {
  InputComponent input;
  std::vector<ProtocolBranch> branches;
};

std::vector<Component> enumerate_components(double f, const kerr::PhaseShiftTable& table,
                                            const kerr::PolarizationEncoding& enc, RuleSet rules) {
  std::vector<Component> out;
  for (auto& comp : two_pair_components(f)) {
    auto branches = qnd_branches(comp.state, table, enc, rules);
    for (auto& b : branches) {
      b.input_component = comp.name;
      b.component_weight = comp.weight;
    }
    out.push_back({std::move(comp), std::move(branches)});
  }
  return out;
}

}  // namespace

ReadoutPrediction predict_with_readout(double f, const kerr::PhaseShiftTable& table,
                                       const kerr::PolarizationEncoding& enc, RuleSet rules,
                                       const ReadoutModel& readout) {
  const auto bins = readout_bins(table, rules, readout.level_phases);
  const auto conf = readout_confusion(bins, readout);
  const auto phi = bell_phi("c1", "d1");

  double kept = 0.0;
  double fid = 0.0;
  for (const auto& comp : enumerate_components(f, table, enc, rules)) {
    for (const auto& b : comp.branches) {
      const double w = comp.input.weight * b.probability;
      if (w == 0.0) continue;
      const auto ia = static_cast<Eigen::Index>(b.level_alice);
      const auto ib = static_cast<Eigen::Index>(b.level_bob);
      for (auto oa : kerr::kAllLevels) {
        for (auto ob : kerr::kAllLevels) {
          const double q = conf(ia, static_cast<Eigen::Index>(oa)) * conf(ib, static_cast<Eigen::Index>(ob));
          if (q == 0.0) continue;
          const auto d = decide(SourceKind::ideal_source, comp.input.name, oa, ob, rules);
          if (!d.keeps()) continue;
          const double F = fidelity(finish_pair(apply_corrections(b.post_state, d.corrections)), phi);
          kept += w * q;
          fid += w * q * F;
        }
      }
    }
  }
  return {kept > 0.0 ? fid / kept : kNaN, kept};
}

std::vector<double> iterate_rounds(double f0, int rounds, const kerr::PhaseShiftTable& table,
                                   const kerr::PolarizationEncoding& enc, RuleSet rules) {
  if (rounds < 0) throw std::invalid_argument("iterate_rounds: negative round count");
  std::vector<double> fs{f0};
  double f = f0;
  for (int k = 0; k < rounds; ++k) {
    const auto r = run_round(f, table, enc, rules);
    if (!r.kept_state) throw std::runtime_error("iterate_rounds: no branch kept");
    f = bit_flip_weight(*r.kept_state);
    fs.push_back(f);
  }
  return fs;
}

namespace {

// Cached outcome of applying a readout decision to one true branch.
struct TrialOutcome {
  bool keeps = false;
  std::array<double, 4> probability{};
  std::array<double, 4> fidelity{};
};

struct ShardTally {
  std::uint64_t trials = 0;
  std::uint64_t kept = 0;
  double sum_f = 0.0;
  double sum_f2 = 0.0;
};

}  // namespace

MonteCarloResult monte_carlo_round(double f, const kerr::PhaseShiftTable& table,
                                   const kerr::PolarizationEncoding& enc, RuleSet rules,
                                   const MonteCarloConfig& config) {
  if (config.trials < 1) throw std::invalid_argument("monte_carlo_round: trials must be >= 1");
  if (config.shards < 1) throw std::invalid_argument("monte_carlo_round: shards must be >= 1");
  if (config.readout.alpha && !(*config.readout.alpha >= 0.0)) {
    throw std::invalid_argument("monte_carlo_round: alpha must be >= 0");
  }

  const auto comps = enumerate_components(f, table, enc, rules);
  const auto bins = readout_bins(table, rules, config.readout.level_phases);
  const auto phi = bell_phi("c1", "d1");

  // outcome[c][b][oa][ob]
  std::vector<std::vector<std::array<std::array<TrialOutcome, 4>, 4>>> outcome(comps.size());
  for (std::size_t c = 0; c < comps.size(); ++c) {
    outcome[c].resize(comps[c].branches.size());
    for (std::size_t b = 0; b < comps[c].branches.size(); ++b) {
      for (auto oa : kerr::kAllLevels) {
        for (auto ob : kerr::kAllLevels) {
          auto& t = outcome[c][b][static_cast<std::size_t>(oa)][static_cast<std::size_t>(ob)];
          const auto d = decide(SourceKind::ideal_source, comps[c].input.name, oa, ob, rules);
          t.keeps = d.keeps();
          if (!t.keeps) continue;
          const auto o = finish_outcomes(apply_corrections(comps[c].branches[b].post_state, d.corrections));
          t.probability = o.probability;
          for (std::size_t k = 0; k < 4; ++k) {
            t.fidelity[k] = o.probability[k] > 1e-15 ? fidelity(o.c1d1[k], phi) : 0.0;
          }
        }
      }
    }
  }

  std::vector<double> comp_weights;
  std::vector<std::vector<double>> branch_probs;
  for (const auto& c : comps) {
    comp_weights.push_back(c.input.weight);
    branch_probs.emplace_back();
    for (const auto& b : c.branches) branch_probs.back().push_back(b.probability);
  }

  const auto run_shard = [&](unsigned shard, std::uint64_t n) {
    Rng rng = make_stream(config.seed, shard);
    std::discrete_distribution<std::size_t> pick_comp(comp_weights.begin(), comp_weights.end());
    std::vector<std::discrete_distribution<std::size_t>> pick_branch;
    for (const auto& p : branch_probs) pick_branch.emplace_back(p.begin(), p.end());

    const auto read = [&](PhaseLevel truth) -> std::size_t {
      const auto i = static_cast<std::size_t>(truth);
      if (!config.readout.alpha) return i;
      const auto probe = homodyne::ProbeState::make(*config.readout.alpha, bins.bins()[i].theta);
      return homodyne::sample_and_classify(probe, bins, rng).assigned;
    };

    ShardTally t;
    for (std::uint64_t k = 0; k < n; ++k) {
      const std::size_t c = pick_comp(rng);
      const std::size_t b = pick_branch[c](rng);
      const auto& br = comps[c].branches[b];
      const std::size_t oa = read(br.level_alice);
      const std::size_t ob = read(br.level_bob);
      const auto& o = outcome[c][b][oa][ob];
      ++t.trials;
      if (!o.keeps) continue;
      std::discrete_distribution<std::size_t> pick_outcome(o.probability.begin(), o.probability.end());
      const double F = o.fidelity[pick_outcome(rng)];
      ++t.kept;
      t.sum_f += F;
      t.sum_f2 += F * F;
    }
    return t;
  };

  std::vector<std::future<ShardTally>> futures;
  const std::uint64_t base = config.trials / config.shards;
  const std::uint64_t extra = config.trials % config.shards;
  for (unsigned s = 0; s < config.shards; ++s) {
    const std::uint64_t n = base + (s < extra ? 1 : 0);
    futures.push_back(std::async(std::launch::async, run_shard, s, n));
  }
  ShardTally total;
  for (auto& fut : futures) {
    const auto t = fut.get();
    total.trials += t.trials;
    total.kept += t.kept;
    total.sum_f += t.sum_f;
    total.sum_f2 += t.sum_f2;
  }

  MonteCarloResult r;
  r.trials = total.trials;
  r.kept = total.kept;
  const double n = static_cast<double>(total.trials);
  r.success_probability = static_cast<double>(total.kept) / n;
  r.success_stderr = std::sqrt(r.success_probability * (1.0 - r.success_probability) / n);
  if (total.kept > 0) {
    const double m = static_cast<double>(total.kept);
    r.kept_fidelity = total.sum_f / m;
    const double var = total.kept > 1 ? std::max(0.0, (total.sum_f2 - m * r.kept_fidelity * r.kept_fidelity) / (m - 1.0)) : 0.0;
    r.kept_fidelity_stderr = std::sqrt(var / m);
  } else {
    r.kept_fidelity = kNaN;
  }
  return r;
}

}  // namespace qndepp::protocol
