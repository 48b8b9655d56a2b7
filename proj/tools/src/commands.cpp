#include "qndepp_cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "qndepp/homodyne.hpp"
#include "qndepp/kerr.hpp"
#include "qndepp/lindblad.hpp"
#include "qndepp/pdc.hpp"
#include "qndepp/protocol.hpp"

namespace qndepp::cli {

namespace fs = std::filesystem;
using kerr::PhaseLevel;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.10g}", v);
}

class Csv {
 public:
  Csv(const RunConfig& c, const std::string& name, const std::string& header)
      : path_(fs::path(c.out) / name), file_(path_) {
    if (!file_) throw std::runtime_error("cannot write " + path_.string());
    file_ << header << '\n';
  }
  template <class... Args>
  void row(fmt::format_string<Args...> f, Args&&... args) {
    file_ << fmt::format(f, std::forward<Args>(args)...) << '\n';
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  std::ofstream file_;
};

void write_manifest(const RunConfig& c, const std::string& command) {
  std::ofstream m(fs::path(c.out) / "manifest.yaml");
  if (!m) throw std::runtime_error("cannot write manifest under " + c.out);
  m << to_manifest(c, command);
}

void print_regime_warnings(const RunConfig& c, std::ostream& err) {
  for (const auto& v : kerr::validate_regime(c.circuit, 2)) {
    fmt::print(err, "warning: regime condition {} not met (ratio {:.4g}, threshold {:.4g})\n", v.condition,
               v.ratio, v.threshold);
  }
}

kerr::PhaseShiftTable table_of(const RunConfig& c) { return kerr::build_phase_table(c.circuit, c.max_total); }

std::array<double, 4> level_phases(const RunConfig& c, const kerr::PhaseShiftTable& t) {
  if (c.paper_mode) return c.paper_phases;
  return {t.theta(PhaseLevel::theta0), t.theta(PhaseLevel::theta1), t.theta(PhaseLevel::theta2),
          t.theta(PhaseLevel::theta3)};
}

void write_ledger_rows(Csv& csv, const std::vector<protocol::ProtocolBranch>& branches) {
  for (const auto& b : branches) {
    csv.row("{},{},{},{},{},{},{},{}", b.input_component, kerr::to_string(b.level_alice),
            kerr::to_string(b.level_bob), num(b.theta_alice), num(b.theta_bob), num(b.probability),
            protocol::to_string(b.decision.action), num(b.final_fidelity));
  }
}

constexpr const char* kLedgerHeader =
    "input_component,level_alice,level_bob,theta_alice,theta_bob,probability,action,final_fidelity";

int phase_table(const RunConfig& c, std::ostream& out) {
  const auto t = table_of(c);
  out << fmt::format("chi/2pi = {:.6g} MHz\n", kerr::chi_from_params(c.circuit) / (2.0 * std::numbers::pi) / 1e6);

  Csv tab1(c, "phase_table.csv", "n1,n2,theta_rad");
  for (const auto& [key, theta] : t.entries()) tab1.row("{},{},{}", key.first, key.second, num(theta));

  const auto enc = kerr::PolarizationEncoding::standard();
  Csv tab2(c, "polarization_table.csv", "mode1_pol,mode2_pol,n1,n2,level,theta_rad");
  const std::pair<Polarization, Polarization> rows[] = {{Polarization::V, Polarization::V},
                                                        {Polarization::H, Polarization::H},
                                                        {Polarization::H, Polarization::V},
                                                        {Polarization::V, Polarization::H}};
  for (const auto& [p1, p2] : rows) {
    tab2.row("{},{},{},{},{},{}", to_char(p1), to_char(p2), enc.occupation(1, p1), enc.occupation(2, p2),
             kerr::to_string(kerr::detector_level(p1, p2, enc)),
             num(kerr::detector_phase_for_polarizations(p1, p2, enc, t)));
  }

  Csv tab3(c, "level_table.csv", "level,states,theta_rad,abs_theta_rad");
  const char* states[] = {"|0>|0>", "|1>|0>/|0>|1>", "|1>|1>", "|2>|0>/|0>|2>"};
  for (auto level : kerr::kAllLevels) {
    const double th = t.theta(level);
    tab3.row("{},{},{},{}", kerr::to_string(level), states[static_cast<int>(level)], num(th), num(std::abs(th)));
    out << fmt::format("{} = {:+.6f} rad  |{}| = {:.3f}\n", kerr::to_string(level), th, kerr::to_string(level),
                       std::abs(th));
  }
  return 0;
}

int alpha_threshold(const RunConfig& c, std::ostream& out) {
  const auto t = table_of(c);
  const auto exact_phases = t.distinct_phases();
  const std::vector<double> rounded_phases(c.paper_phases.begin(), c.paper_phases.end());

  const auto exact = homodyne::min_alpha(exact_phases, homodyne::ErrorTarget{c.error_target});
  const auto rounded = homodyne::min_alpha(rounded_phases, homodyne::SeparationThreshold{c.paper_separation});

  Csv csv(c, "alpha_threshold.csv", "mode,criterion,theta_a,theta_b,cos_gap,x_d,p_error,alpha");
  csv.row("exact,p_error={},{},{},{},{},{},{}", num(c.error_target), num(exact.theta_a), num(exact.theta_b),
          num(exact.cos_gap), num(exact.required_x_d), num(exact.error_at_alpha), num(exact.alpha));
  csv.row("rounded,x_d>{},{},{},{},{},{},{}", num(c.paper_separation), num(rounded.theta_a), num(rounded.theta_b),
          num(rounded.cos_gap), num(rounded.required_x_d), num(rounded.error_at_alpha), num(rounded.alpha));

  const auto& chosen = c.paper_mode ? rounded : exact;
  Csv sweep(c, "alpha_sweep.csv", "alpha,theta_a,theta_b,X_d,P_error");
  for (double a : c.alpha_sweep) {
    const auto g = homodyne::peak_separation(a, chosen.theta_a, chosen.theta_b);
    sweep.row("{},{},{},{},{}", num(a), num(chosen.theta_a), num(chosen.theta_b), num(std::abs(g.distance)),
              num(homodyne::error_probability(g.distance)));
  }

  out << fmt::format("alpha_min={:.4f} ({} mode)\n", chosen.alpha, c.paper_mode ? "rounded" : "exact");
  out << fmt::format("  exact: phases from the detector table, P_error={:.3g} -> alpha={:.4f} (X_d={:.4f})\n",
                     c.error_target, exact.alpha, exact.required_x_d);
  out << fmt::format("  rounded: rounded phases, X_d>{:.3g} -> alpha={:.4f} (P_error={:.3g})\n", c.paper_separation,
                     rounded.alpha, rounded.error_at_alpha);
  return 0;
}

// The polarization-spatial analysis assumes four distinct probe phases, so it
// always runs under the weak Kerr rules.
int pdc(const RunConfig& c, std::ostream& out) {
  const auto t = table_of(c);
  const auto rules = protocol::RuleSet::weak_kerr;
  const auto enc = kerr::PolarizationEncoding::standard();
  Csv ledger(c, "pdc_branches.csv", kLedgerHeader);
  Csv summary(c, "pdc_summary.csv", "input_component,kept_weight");

  for (bool err : {false, true}) {
    const auto branches = protocol::pdc_single_pair_round(t, enc, err, rules);
    write_ledger_rows(ledger, branches);
    double kept = 0.0;
    for (const auto& b : branches) kept += b.decision.keeps() ? b.probability : 0.0;
    summary.row("{},{}", branches.front().input_component, num(kept));
    out << fmt::format("{}: kept_weight={:.6g}\n", branches.front().input_component, kept);
  }
  for (int e = 0; e <= 2; ++e) {
    const auto r = protocol::pdc_two_pair_round(e, t, enc, rules);
    write_ledger_rows(ledger, r.branches);
    summary.row("{},{}", r.branches.front().input_component, num(r.kept_weight));
    out << fmt::format("{}: kept_weight={:.6g}\n", r.branches.front().input_component, r.kept_weight);
  }
  return 0;
}

int purify(RunConfig& c, std::ostream& out) {
  if (c.mode != ProtocolMode::ideal_source) return pdc(c, out);
  const auto t = table_of(c);
  const auto enc = kerr::PolarizationEncoding::standard();
  const auto rules = c.rule_set;

  const auto r = protocol::run_round(c.f, t, enc, rules);
  Csv ledger(c, "branch_ledger.csv", kLedgerHeader);
  write_ledger_rows(ledger, r.branch_ledger);

  Csv summary(c, "round_summary.csv",
              "method,f_in,f_out,success_prob,rule_set,trials,alpha,f_out_stderr,success_stderr");
  const std::string rs = protocol::to_string(rules);
  summary.row("exact,{},{},{},{},0,inf,0,0", num(c.f), num(r.kept_fidelity), num(r.success_probability), rs);
  out << fmt::format("f_in={:.6g} f_out={:.6g}, success={:.6g} rule_set={}\n", c.f, r.kept_fidelity,
                     r.success_probability, rs);

  protocol::ReadoutModel readout{c.alpha, std::nullopt};
  if (c.paper_mode) readout.level_phases = c.paper_phases;
  if (c.alpha) {
    const auto p = protocol::predict_with_readout(c.f, t, enc, rules, readout);
    summary.row("readout_prediction,{},{},{},{},0,{},0,0", num(c.f), num(p.kept_fidelity),
                num(p.success_probability), rs, num(*c.alpha));
    out << fmt::format("alpha={:.6g}: f_out={:.6g}, success={:.6g} (exact with readout confusion)\n", *c.alpha,
                       p.kept_fidelity, p.success_probability);
  }
  if (c.trials > 0) {
    protocol::MonteCarloConfig mc{c.trials, readout, c.seed, c.shards};
    const auto m = protocol::monte_carlo_round(c.f, t, enc, rules, mc);
    summary.row("monte_carlo,{},{},{},{},{},{},{},{}", num(c.f), num(m.kept_fidelity), num(m.success_probability),
                rs, c.trials, c.alpha ? num(*c.alpha) : "inf", num(m.kept_fidelity_stderr),
                num(m.success_stderr));
    out << fmt::format("monte carlo ({} trials): f_out={:.6g} +- {:.2g}, success={:.6g} +- {:.2g}\n", c.trials,
                       m.kept_fidelity, m.kept_fidelity_stderr, m.success_probability, m.success_stderr);
  }
  if (c.rounds > 1) {
    const auto fs_ = protocol::iterate_rounds(c.f, c.rounds, t, enc, rules);
    Csv iter(c, "rounds.csv", "round,fidelity,closed_form");
    double closed = c.f;
    for (std::size_t k = 0; k < fs_.size(); ++k) {
      if (k > 0) closed = protocol::f_ideal(closed);
      iter.row("{},{},{}", k, num(fs_[k]), num(closed));
    }
    out << fmt::format("after {} rounds: f={:.6g}\n", c.rounds, fs_.back());
  }
  return 0;
}

int dissipation_sweep(const RunConfig& c, std::ostream& out) {
  std::vector<lindblad::FockLabel> states;
  for (const auto& s : c.sweep_states) states.push_back(lindblad::FockLabel::parse(s));

  const auto run = [&](lindblad::SweepAxis axis, const std::vector<double>& values, const std::string& file) {
    lindblad::DissipationSweepConfig sc;
    sc.initial_states = states;
    sc.axis = axis;
    sc.values = values;
    sc.kappa1_inv = c.sweep_fixed_kappa1_inv;
    sc.kappa2_inv = 1.0 / c.circuit.kappa2;
    sc.tau_factor = c.tau_factor;
    sc.dt_fraction = c.dt_fraction;
    const auto rows = lindblad::sweep(sc);
    Csv csv(c, file, "initial_state,kappa1_inv_s,kappa2_inv_s,tau_s,fidelity");
    double drift = 0.0;
    double min_eig = 0.0;
    for (const auto& r : rows) {
      csv.row("\"{}\",{},{},{},{}", r.initial_state, num(r.kappa1_inv), num(r.kappa2_inv), num(r.tau),
              num(r.fidelity));
      drift = std::max(drift, r.diagnostics.max_trace_drift);
      min_eig = std::min(min_eig, r.diagnostics.min_eigenvalue);
    }
    out << fmt::format("{}: {} rows, max trace drift {:.2e}, min eigenvalue {:.2e}\n", file, rows.size(), drift,
                       min_eig);
  };
  run(lindblad::SweepAxis::kappa1_inv, c.sweep_kappa1_inv, "fig4_kappa1_sweep.csv");
  run(lindblad::SweepAxis::kappa2_inv, c.sweep_kappa2_inv, "fig5_kappa2_sweep.csv");
  return 0;
}

int homodyne_sim(RunConfig& c, std::ostream& out) {
  const auto t = table_of(c);
  const auto phases = level_phases(c, t);
  std::vector<homodyne::PhaseBinSet::Bin> bins;
  for (auto level : kerr::kAllLevels) bins.push_back({kerr::to_string(level), phases[static_cast<int>(level)]});
  const homodyne::PhaseBinSet set(bins);

  if (!c.alpha) {
    const std::vector<double> th(phases.begin(), phases.end());
    c.alpha = c.paper_mode ? homodyne::min_alpha(th, homodyne::SeparationThreshold{c.paper_separation}).alpha
                           : homodyne::min_alpha(th, homodyne::ErrorTarget{c.error_target}).alpha;
  }
  if (c.trials == 0) c.trials = 100000;
  const double alpha = *c.alpha;

  struct Trial {
    double x;
    std::size_t truth;
    std::size_t assigned;
  };
  const auto shard_run = [&](unsigned shard, std::uint64_t n) {
    Rng rng = make_stream(c.seed, shard);
    std::uniform_int_distribution<std::size_t> pick(0, set.size() - 1);
    std::vector<Trial> trials;
    trials.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k) {
      const std::size_t truth = pick(rng);
      const auto probe = homodyne::ProbeState::make(alpha, set.bins()[truth].theta);
      const auto cls = homodyne::sample_and_classify(probe, set, rng);
      trials.push_back({cls.x, truth, cls.assigned});
    }
    return trials;
  };
  std::vector<std::future<std::vector<Trial>>> futures;
  for (unsigned s = 0; s < c.shards; ++s) {
    const std::uint64_t n = c.trials / c.shards + (s < c.trials % c.shards ? 1 : 0);
    futures.push_back(std::async(std::launch::async, shard_run, s, n));
  }

  Csv log(c, "homodyne_trials.csv", "trial,X,true_label,assigned_label");
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(4, 4);
  std::uint64_t index = 0;
  for (auto& f : futures) {
    for (const auto& tr : f.get()) {
      log.row("{},{},{},{}", index++, num(tr.x), set.label(tr.truth), set.label(tr.assigned));
      counts(static_cast<Eigen::Index>(tr.truth), static_cast<Eigen::Index>(tr.assigned)) += 1.0;
    }
  }

  const auto analytic = set.confusion_matrix(alpha);
  Csv conf(c, "homodyne_confusion.csv", "true_label,assigned_label,count,empirical,analytic,stderr");
  double worst_z = 0.0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    const double n = counts.row(i).sum();
    for (Eigen::Index j = 0; j < 4; ++j) {
      const double p = analytic(i, j);
      const double emp = n > 0 ? counts(i, j) / n : 0.0;
      const double se = n > 0 ? std::sqrt(p * (1.0 - p) / n) : 0.0;
      if (se > 0) worst_z = std::max(worst_z, std::abs(emp - p) / se);
      conf.row("{},{},{},{},{},{}", set.label(static_cast<std::size_t>(i)), set.label(static_cast<std::size_t>(j)),
               static_cast<std::uint64_t>(counts(i, j)), num(emp), num(p), num(se));
    }
  }
  const double correct = counts.trace() / static_cast<double>(c.trials);
  out << fmt::format("alpha={:.6g}, {} trials: correct fraction {:.6f}, largest |z| vs analytic {:.2f}\n", alpha,
                     c.trials, correct, worst_z);
  return 0;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"phase-table", "alpha-threshold", "purify",
                                                 "pdc",         "dissipation-sweep", "homodyne-sim"};
  return names;
}

int run_command(const std::string& name, RunConfig config, std::ostream& out, std::ostream& err) {
  fs::create_directories(config.out);
  print_regime_warnings(config, err);
  int status = 0;
  if (name == "phase-table") status = phase_table(config, out);
  else if (name == "alpha-threshold") status = alpha_threshold(config, out);
  else if (name == "purify") status = purify(config, out);
  else if (name == "pdc") status = pdc(config, out);
  else if (name == "dissipation-sweep") status = dissipation_sweep(config, out);
  else if (name == "homodyne-sim") status = homodyne_sim(config, out);
  else throw std::invalid_argument("unknown command '" + name + "'");
  // Written last so it echoes values resolved during the run.
  write_manifest(config, name);
  return status;
}

}  // namespace qndepp::cli
