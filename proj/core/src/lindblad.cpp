#include "qndepp/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qndepp::lindblad {

namespace {

constexpr double kPsdTolerance = 1e-6;

double min_eig(const CMatrix& rho) {
  const CMatrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

LindbladModel::LindbladModel(HilbertSpace space, LinearOperator hamiltonian, std::vector<CollapseOp> collapse)
    : space_(std::move(space)), collapse_(std::move(collapse)) {
  h_ = embed(hamiltonian, space_).entries();
  for (const auto& c : collapse_) {
    if (!(c.rate >= 0.0)) throw std::invalid_argument("LindbladModel: collapse rates must be >= 0");
    const CMatrix o = embed(c.op, space_).entries();
    const CMatrix od = o.adjoint();
    dissipators_.push_back({o, od, od * o, c.rate});
  }
}

LindbladModel LindbladModel::storage_loss(double kappa1, int dim) {
  const auto space = HilbertSpace::uniform({"A1", "A2"}, dim);
  const CMatrix zero = CMatrix::Zero(static_cast<Eigen::Index>(space.dimension()),
                                     static_cast<Eigen::Index>(space.dimension()));
  return LindbladModel(space, LinearOperator(space, zero),
                       {{annihilation("A1", dim), kappa1}, {annihilation("A2", dim), kappa1}});
}

CMatrix lindblad_rhs(const CMatrix& rho, const LindbladModel& model) {
  const auto n = static_cast<Eigen::Index>(model.space().dimension());
  if (rho.rows() != n || rho.cols() != n) throw std::invalid_argument("lindblad_rhs: dimension mismatch");
  const Complex i{0.0, 1.0};
  CMatrix out = i * (rho * model.hamiltonian() - model.hamiltonian() * rho);
  for (const auto& d : model.dissipators()) {
    if (d.rate == 0.0) continue;
    out += d.rate * (d.o * rho * d.o_dag - 0.5 * (d.o_dag_o * rho + rho * d.o_dag_o));
  }
  return out;
}

CMatrix lindblad_rhs(const DensityMatrix& rho, const LindbladModel& model) {
  if (!(rho.space() == model.space())) throw std::invalid_argument("lindblad_rhs: space mismatch");
  return lindblad_rhs(rho.entries(), model);
}

EvolveResult evolve(const DensityMatrix& rho0, const LindbladModel& model, double tau, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
  if (!(tau >= 0.0)) throw std::invalid_argument("evolve: tau must be >= 0");
  if (!(rho0.space() == model.space())) throw std::invalid_argument("evolve: space mismatch");

  CMatrix rho = rho0.entries();
  EvolveDiagnostics diag;
  diag.max_trace_drift = std::abs(rho.trace() - 1.0);
  diag.min_eigenvalue = min_eig(rho);

  const auto steps = static_cast<std::size_t>(std::ceil(tau / dt - 1e-9));
  double t = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double h = std::min(dt, tau - t);
    const CMatrix k1 = lindblad_rhs(rho, model);
    const CMatrix k2 = lindblad_rhs(rho + 0.5 * h * k1, model);
    const CMatrix k3 = lindblad_rhs(rho + 0.5 * h * k2, model);
    const CMatrix k4 = lindblad_rhs(rho + h * k3, model);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;

    diag.max_trace_drift = std::max(diag.max_trace_drift, std::abs(rho.trace() - 1.0));
    const double ev = min_eig(rho);
    diag.min_eigenvalue = std::min(diag.min_eigenvalue, ev);
    if (ev < -kPsdTolerance) {
      std::ostringstream msg;
      msg << "evolve: density matrix lost positivity (eigenvalue " << ev << " at t = " << t << " s)";
      throw IntegrationUnstable(msg.str());
    }
  }
  diag.steps = steps;

  CMatrix out = 0.5 * (rho + rho.adjoint());
  out /= out.trace().real();
  return {DensityMatrix(model.space(), out), diag};
}

FockLabel FockLabel::parse(const std::string& text) {
  std::string s = text;
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '|' || c == '>' || c == ' '; }), s.end());
  FockLabel label;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || !std::all_of(item.begin(), item.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw std::invalid_argument("FockLabel: cannot parse '" + text + "'");
    }
    label.occupations.push_back(std::stoi(item));
  }
  if (label.occupations.empty()) throw std::invalid_argument("FockLabel: empty label");
  return label;
}

std::string FockLabel::str() const {
  std::string s = "|";
  for (std::size_t i = 0; i < occupations.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(occupations[i]);
  }
  return s + ">";
}

int FockLabel::total() const {
  int n = 0;
  for (int o : occupations) n += o;
  return n;
}

PureState fock_state(const HilbertSpace& space, const FockLabel& label) {
  if (label.occupations.size() != space.size()) {
    throw std::invalid_argument("fock_state: label " + label.str() + " does not match the mode count");
  }
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (label.occupations[i] >= space.factors()[i].dim) {
      throw std::invalid_argument("fock_state: " + label.str() + " exceeds the Fock cutoff");
    }
  }
  return PureState::basis(space, label.occupations);
}

StorageResult storage_fidelity(const FockLabel& initial, double kappa1, double kappa2, double tau_factor,
                               std::optional<double> dt, int dim) {
  if (!(kappa2 > 0.0)) throw std::invalid_argument("storage_fidelity: kappa2 must be positive");
  if (!(tau_factor > 0.0)) throw std::invalid_argument("storage_fidelity: tau_factor must be positive");
  const auto model = LindbladModel::storage_loss(kappa1, dim);
  const auto psi = fock_state(model.space(), initial);
  const double tau = tau_factor / kappa2;
  const double step = dt.value_or(tau / 1000.0);
  auto r = evolve(DensityMatrix::from_pure(psi), model, tau, step);
  return {fidelity(r.rho, psi), tau, r.diagnostics};
}

std::vector<SweepResult> sweep(const DissipationSweepConfig& config) {
  if (config.values.empty()) throw std::invalid_argument("sweep: empty range");
  if (config.initial_states.empty()) throw std::invalid_argument("sweep: no initial states");
  if (!(config.tau_factor > 0.0)) throw std::invalid_argument("sweep: tau_factor must be positive");

  struct Point {
    FockLabel state;
    double k1_inv;
    double k2_inv;
  };
  std::vector<Point> points;
  for (const auto& s : config.initial_states) {
    for (double v : config.values) {
      if (!(v > 0.0)) throw std::invalid_argument("sweep: swept decay times must be positive");
      if (config.axis == SweepAxis::kappa1_inv) points.push_back({s, v, config.kappa2_inv});
      else points.push_back({s, config.kappa1_inv, v});
    }
  }
  if (!(config.dt_fraction > 0.0 && config.dt_fraction <= 0.01)) {
    throw std::invalid_argument("sweep: dt_fraction must lie in (0, 0.01]");
  }
  for (const auto& p : points) {
    const double tau = config.tau_factor * p.k2_inv;
    if (config.dt && !(*config.dt > 0.0 && *config.dt <= tau / 100.0)) {
      throw std::invalid_argument("sweep: dt must lie in (0, tau/100]");
    }
  }

  std::vector<std::future<SweepResult>> futures;
  for (const auto& p : points) {
    futures.push_back(std::async(std::launch::async, [&config, p] {
      const double dt = config.dt.value_or(config.dt_fraction * config.tau_factor * p.k2_inv);
      const auto r = storage_fidelity(p.state, 1.0 / p.k1_inv, 1.0 / p.k2_inv, config.tau_factor, dt, config.dim);
      return SweepResult{p.state.str(), p.k1_inv, p.k2_inv, r.tau, r.fidelity, r.diagnostics};
    }));
  }
  std::vector<SweepResult> out;
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

}  // namespace qndepp::lindblad
