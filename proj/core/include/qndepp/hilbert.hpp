#pragma once

// Dense linear algebra over small labeled tensor-product Hilbert spaces.
//
// Basis ordering is Kronecker order: the first factor is the most
// significant digit. Qubit factors use index 0 = |H>, index 1 = |V>; Fock
// factors are indexed by photon number.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qndepp/random.hpp"

namespace qndepp {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

struct Factor {
  std::string label;
  int dim = 0;

  bool operator==(const Factor&) const = default;
};

class HilbertSpace {
 public:
  // The two-pair polarization-spatial space (8 Fock modes, cutoff 3) is
  // 3^8 = 6561, so the cap sits one power of two above it.
  static constexpr std::size_t kMaxDimension = 8192;

  HilbertSpace() = default;
  explicit HilbertSpace(std::vector<Factor> factors);

  static HilbertSpace qubits(std::initializer_list<std::string_view> labels);
  static HilbertSpace uniform(std::initializer_list<std::string_view> labels, int dim);

  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return factors_.size(); }

  bool contains(std::string_view label) const;
  /// Position of `label` among the factors; throws std::invalid_argument if absent.
  std::size_t position(std::string_view label) const;
  int dim_of(std::string_view label) const { return factors_[position(label)].dim; }
  std::vector<std::string> labels() const;

  /// Concatenation; throws on label collision.
  HilbertSpace concat(const HilbertSpace& other) const;
  /// Factors named in `keep`, in this space's order.
  HilbertSpace subspace(std::span<const std::string> keep) const;

  /// Row-major stride of each factor.
  std::vector<std::size_t> strides() const;
  std::vector<int> digits(std::size_t index) const;
  std::size_t index(std::span<const int> digits) const;

  bool operator==(const HilbertSpace& other) const { return factors_ == other.factors_; }

 private:
  std::vector<Factor> factors_;
  std::size_t dimension_ = 1;
};

class PureState {
 public:
  PureState() = default;
  PureState(HilbertSpace space, CVector amplitudes);

  static PureState zero(const HilbertSpace& space);
  static PureState basis(const HilbertSpace& space, std::span<const int> digits);
  static PureState basis(const HilbertSpace& space, std::initializer_list<int> digits);

  const HilbertSpace& space() const { return space_; }
  const CVector& amplitudes() const { return amplitudes_; }
  Complex amplitude(std::span<const int> digits) const;

  double norm() const { return amplitudes_.norm(); }
  /// Throws std::domain_error on the zero vector.
  PureState normalized() const;
  /// <this|other>
  Complex inner(const PureState& other) const;

  PureState operator+(const PureState& other) const;
  PureState operator-(const PureState& other) const;
  PureState operator*(Complex scale) const;

 private:
  HilbertSpace space_;
  CVector amplitudes_;
};

class DensityMatrix {
 public:
  DensityMatrix() = default;
  DensityMatrix(HilbertSpace space, CMatrix entries);

  /// |psi><psi| without renormalization.
  static DensityMatrix from_pure(const PureState& psi);
  static DensityMatrix maximally_mixed(const HilbertSpace& space);

  const HilbertSpace& space() const { return space_; }
  const CMatrix& entries() const { return entries_; }

  Complex trace() const { return entries_.trace(); }
  bool is_hermitian(double tol = 1e-10) const;
  /// Smallest eigenvalue of the Hermitian part.
  double min_eigenvalue() const;
  /// Hermitian, unit trace and PSD within the given tolerances.
  bool is_physical(double herm_tol = 1e-10, double trace_tol = 1e-10,
                   double eig_tol = 1e-9) const;

  DensityMatrix operator+(const DensityMatrix& other) const;
  DensityMatrix operator*(double scale) const;

 private:
  HilbertSpace space_;
  CMatrix entries_;
};

class LinearOperator {
 public:
  /// With `unitary` set, O^dagger O = I is verified to 1e-9.
  LinearOperator(HilbertSpace space, CMatrix entries, bool unitary = false);

  static LinearOperator identity(const HilbertSpace& space);

  const HilbertSpace& space() const { return space_; }
  const CMatrix& entries() const { return entries_; }
  bool is_unitary() const { return unitary_; }

  LinearOperator adjoint() const;
  LinearOperator operator*(const LinearOperator& rhs) const;
  LinearOperator operator+(const LinearOperator& rhs) const;
  LinearOperator operator*(Complex scale) const;

 private:
  HilbertSpace space_;
  CMatrix entries_;
  bool unitary_ = false;
};

// Kronecker products on the concatenated space. Labels must be disjoint.
PureState tensor(const PureState& a, const PureState& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);
LinearOperator tensor(const LinearOperator& a, const LinearOperator& b);

/// Traces out every factor not named in `keep`.
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::string> keep);

/// <psi|rho|psi>.
double fidelity(const DensityMatrix& rho, const PureState& psi);

/// |<a|b>| / (|a||b|); equal to 1 iff the states agree up to a global phase.
double overlap_magnitude(const PureState& a, const PureState& b);

// The operator may act on a subset of the state's factors (matched by label,
// in any order); it is padded with identity elsewhere. No renormalization.
PureState apply(const LinearOperator& op, const PureState& psi);
DensityMatrix apply(const LinearOperator& op, const DensityMatrix& rho);

/// Dense matrix of `op` lifted onto `full`.
LinearOperator embed(const LinearOperator& op, const HilbertSpace& full);

struct PureMeasurement {
  std::size_t outcome = 0;
  PureState post_state;
  double probability = 0.0;
};

struct MixedMeasurement {
  std::size_t outcome = 0;
  DensityMatrix post_state;
  double probability = 0.0;
};

/// Throws std::invalid_argument unless the projectors are mutually orthogonal
/// and sum to the identity on their common space (tolerance 1e-9).
void check_projective_set(std::span<const LinearOperator> projectors);

/// Born-rule probabilities of each outcome; the state need not be normalized.
std::vector<double> outcome_probabilities(const PureState& psi,
                                          std::span<const LinearOperator> projectors);
std::vector<double> outcome_probabilities(const DensityMatrix& rho,
                                          std::span<const LinearOperator> projectors);

PureMeasurement measure_projective(const PureState& psi,
                                   std::span<const LinearOperator> projectors, Rng& rng);
MixedMeasurement measure_projective(const DensityMatrix& rho,
                                    std::span<const LinearOperator> projectors, Rng& rng);

// --- Single-mode building blocks ------------------------------------------

enum class Polarization { H = 0, V = 1 };

char to_char(Polarization p);
Polarization flipped(Polarization p);

PureState polarization_ket(std::string_view label, Polarization p);
/// (|H> + sign |V>)/sqrt(2), sign = +1 or -1.
PureState diagonal_ket(std::string_view label, int sign);
PureState fock_ket(std::string_view label, int dim, int n);

LinearOperator pauli_x(std::string_view label);
LinearOperator pauli_z(std::string_view label);
LinearOperator projector(const PureState& psi);
/// {|+><+|, |-><-|} on one qubit.
std::vector<LinearOperator> diagonal_basis_projectors(std::string_view label);

LinearOperator annihilation(std::string_view label, int dim);
LinearOperator creation(std::string_view label, int dim);
LinearOperator number_operator(std::string_view label, int dim);

}  // namespace qndepp
