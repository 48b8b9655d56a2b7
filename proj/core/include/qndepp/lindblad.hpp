#pragma once

// Photon loss of the two storage resonators during the measuring window:
//     d rho/dt = i[rho, H] + sum_k kappa_k (2 o rho o+ - o+ o rho - rho o+ o)/2
// integrated with fixed-step RK4. H is zero in the rotating frame.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qndepp/hilbert.hpp"

namespace qndepp::lindblad {

struct CollapseOp {
  LinearOperator op;  // may act on a subset of the model's factors
  double rate = 0.0;  // 1/s
};

class LindbladModel {
 public:
  /// Throws if a rate is negative or an operator names a factor outside `space`.
  LindbladModel(HilbertSpace space, LinearOperator hamiltonian, std::vector<CollapseOp> collapse);

  /// Storage modes A1, A2 with cutoff `dim`, H = 0 and loss a_i at rate kappa1.
  static LindbladModel storage_loss(double kappa1, int dim = 3);

  const HilbertSpace& space() const { return space_; }
  const std::vector<CollapseOp>& collapse_ops() const { return collapse_; }
  const CMatrix& hamiltonian() const { return h_; }

  // Lifted onto the full space.
  struct Dissipator {
    CMatrix o;
    CMatrix o_dag;
    CMatrix o_dag_o;
    double rate;
  };
  const std::vector<Dissipator>& dissipators() const { return dissipators_; }

 private:
  HilbertSpace space_;
  CMatrix h_;
  std::vector<CollapseOp> collapse_;
  std::vector<Dissipator> dissipators_;
};

/// d rho/dt. Throws std::invalid_argument on a space mismatch.
CMatrix lindblad_rhs(const CMatrix& rho, const LindbladModel& model);
CMatrix lindblad_rhs(const DensityMatrix& rho, const LindbladModel& model);

class IntegrationUnstable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvolveDiagnostics {
  std::size_t steps = 0;
  double max_trace_drift = 0.0;  // max |tr rho - 1| over steps, before renormalization
  double min_eigenvalue = 0.0;   // smallest eigenvalue seen at any step
};

struct EvolveResult {
  DensityMatrix rho;  // re-symmetrized and trace-renormalized
  EvolveDiagnostics diagnostics;
};

/// RK4 from 0 to tau. The last step is shortened so the end point is hit
/// exactly. Throws IntegrationUnstable if an eigenvalue drops below -1e-6.
EvolveResult evolve(const DensityMatrix& rho0, const LindbladModel& model, double tau, double dt);

/// Occupations of A1, A2, ... written "1,0" or "|1,0>".
struct FockLabel {
  std::vector<int> occupations;

  static FockLabel parse(const std::string& text);
  std::string str() const;  // "|1,0>"
  int total() const;

  bool operator==(const FockLabel&) const = default;
};

/// Number state on the storage space; throws if an occupation exceeds the cutoff.
PureState fock_state(const HilbertSpace& space, const FockLabel& label);

struct StorageResult {
  double fidelity = 0.0;
  double tau = 0.0;
  EvolveDiagnostics diagnostics;
};

/// Evolves the number state for tau = tau_factor / kappa2 under storage loss
/// at kappa1 and returns <psi|rho(tau)|psi>. dt defaults to tau/1000.
StorageResult storage_fidelity(const FockLabel& initial, double kappa1, double kappa2, double tau_factor,
                               std::optional<double> dt = std::nullopt, int dim = 3);

enum class SweepAxis { kappa1_inv, kappa2_inv };

struct DissipationSweepConfig {
  std::vector<FockLabel> initial_states{FockLabel{{1, 0}}, FockLabel{{1, 1}}};
  SweepAxis axis = SweepAxis::kappa1_inv;
  std::vector<double> values;  // seconds along the swept axis
  double kappa1_inv = 20e-6;   // s, used when sweeping kappa2_inv
  double kappa2_inv = 10e-9;   // s, used when sweeping kappa1_inv
  double tau_factor = 8.0;
  std::optional<double> dt;    // s; when unset, dt_fraction * tau per point
  double dt_fraction = 1e-3;
  int dim = 3;
};

struct SweepResult {
  std::string initial_state;
  double kappa1_inv = 0.0;
  double kappa2_inv = 0.0;
  double tau = 0.0;
  double fidelity = 0.0;
  EvolveDiagnostics diagnostics;
};

/// One row per (initial state, swept value), states outermost. Points run in
/// parallel; the result does not depend on scheduling.
std::vector<SweepResult> sweep(const DissipationSweepConfig& config);

}  // namespace qndepp::lindblad
