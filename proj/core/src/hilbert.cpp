#include "qndepp/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace qndepp {

namespace {

constexpr double kUnitaryTol = 1e-9;
constexpr double kProjectorTol = 1e-9;

void require_same_space(const HilbertSpace& a, const HilbertSpace& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": space mismatch");
}

// Index bookkeeping for an operator acting on a subset of a larger space.
// For every full index i: sub[i] is the operator-space index read off the
// digits of i, base[i] is i with those digits zeroed, and offset[s] is the
// full-space displacement of operator index s.
struct Embedding {
  std::vector<std::size_t> sub;
  std::vector<std::size_t> base;
  std::vector<std::size_t> offset;
};

Embedding make_embedding(const HilbertSpace& op_space, const HilbertSpace& full) {
  const auto full_strides = full.strides();
  const auto op_strides = op_space.strides();
  std::vector<std::size_t> positions;
  positions.reserve(op_space.size());
  for (const auto& f : op_space.factors()) {
    const std::size_t p = full.position(f.label);
    if (full.factors()[p].dim != f.dim) {
      throw std::invalid_argument("apply: dimension mismatch on factor '" + f.label + "'");
    }
    positions.push_back(p);
  }

  Embedding e;
  e.offset.resize(op_space.dimension());
  for (std::size_t s = 0; s < op_space.dimension(); ++s) {
    const auto d = op_space.digits(s);
    std::size_t off = 0;
    for (std::size_t j = 0; j < positions.size(); ++j) off += d[j] * full_strides[positions[j]];
    e.offset[s] = off;
  }
  e.sub.resize(full.dimension());
  e.base.resize(full.dimension());
  for (std::size_t i = 0; i < full.dimension(); ++i) {
    const auto d = full.digits(i);
    std::size_t s = 0;
    std::size_t off = 0;
    for (std::size_t j = 0; j < positions.size(); ++j) {
      s += d[positions[j]] * op_strides[j];
      off += d[positions[j]] * full_strides[positions[j]];
    }
    e.sub[i] = s;
    e.base[i] = i - off;
  }
  return e;
}

// Applies the embedded operator to every column of `m`.
CMatrix apply_left(const CMatrix& op, const Embedding& e, const CMatrix& m) {
  CMatrix out = CMatrix::Zero(m.rows(), m.cols());
  const auto sub_dim = static_cast<Eigen::Index>(e.offset.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto s = static_cast<Eigen::Index>(e.sub[i]);
    const std::size_t base = e.base[i];
    for (Eigen::Index t = 0; t < sub_dim; ++t) {
      const Complex w = op(s, t);
      if (w == Complex{}) continue;
      out.row(i) += w * m.row(static_cast<Eigen::Index>(base + e.offset[t]));
    }
  }
  return out;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

HilbertSpace single(std::string_view label, int dim) {
  return HilbertSpace({Factor{std::string(label), dim}});
}

}  // namespace

// --- HilbertSpace -----------------------------------------------------------

HilbertSpace::HilbertSpace(std::vector<Factor> factors) : factors_(std::move(factors)) {
  std::unordered_set<std::string> seen;
  for (const auto& f : factors_) {
    if (f.dim <= 0) throw std::invalid_argument("HilbertSpace: factor '" + f.label + "' has non-positive dimension");
    if (f.label.empty()) throw std::invalid_argument("HilbertSpace: empty factor label");
    if (!seen.insert(f.label).second) {
      throw std::invalid_argument("HilbertSpace: duplicate label '" + f.label + "'");
    }
    dimension_ *= static_cast<std::size_t>(f.dim);
    if (dimension_ > kMaxDimension) {
      throw std::invalid_argument("HilbertSpace: total dimension exceeds " +
                                  std::to_string(kMaxDimension));
    }
  }
}

HilbertSpace HilbertSpace::qubits(std::initializer_list<std::string_view> labels) {
  return uniform(labels, 2);
}

HilbertSpace HilbertSpace::uniform(std::initializer_list<std::string_view> labels, int dim) {
  std::vector<Factor> fs;
  for (auto l : labels) fs.push_back({std::string(l), dim});
  return HilbertSpace(std::move(fs));
}

bool HilbertSpace::contains(std::string_view label) const {
  return std::any_of(factors_.begin(), factors_.end(),
                     [&](const Factor& f) { return f.label == label; });
}

std::size_t HilbertSpace::position(std::string_view label) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].label == label) return i;
  }
  throw std::invalid_argument("HilbertSpace: unknown label '" + std::string(label) + "'");
}

std::vector<std::string> HilbertSpace::labels() const {
  std::vector<std::string> out;
  for (const auto& f : factors_) out.push_back(f.label);
  return out;
}

HilbertSpace HilbertSpace::concat(const HilbertSpace& other) const {
  std::vector<Factor> fs = factors_;
  fs.insert(fs.end(), other.factors_.begin(), other.factors_.end());
  return HilbertSpace(std::move(fs));
}

HilbertSpace HilbertSpace::subspace(std::span<const std::string> keep) const {
  for (const auto& k : keep) (void)position(k);
  std::vector<Factor> fs;
  for (const auto& f : factors_) {
    if (std::find(keep.begin(), keep.end(), f.label) != keep.end()) fs.push_back(f);
  }
  return HilbertSpace(std::move(fs));
}

std::vector<std::size_t> HilbertSpace::strides() const {
  std::vector<std::size_t> s(factors_.size());
  std::size_t acc = 1;
  for (std::size_t i = factors_.size(); i-- > 0;) {
    s[i] = acc;
    acc *= static_cast<std::size_t>(factors_[i].dim);
  }
  return s;
}

std::vector<int> HilbertSpace::digits(std::size_t index) const {
  std::vector<int> d(factors_.size());
  for (std::size_t i = factors_.size(); i-- > 0;) {
    const auto dim = static_cast<std::size_t>(factors_[i].dim);
    d[i] = static_cast<int>(index % dim);
    index /= dim;
  }
  return d;
}

std::size_t HilbertSpace::index(std::span<const int> digits) const {
  if (digits.size() != factors_.size()) throw std::invalid_argument("HilbertSpace::index: wrong digit count");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (digits[i] < 0 || digits[i] >= factors_[i].dim) {
      throw std::out_of_range("HilbertSpace::index: digit out of range for '" + factors_[i].label + "'");
    }
    idx = idx * static_cast<std::size_t>(factors_[i].dim) + static_cast<std::size_t>(digits[i]);
  }
  return idx;
}

// --- PureState --------------------------------------------------------------

PureState::PureState(HilbertSpace space, CVector amplitudes)
    : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != space_.dimension()) {
    throw std::invalid_argument("PureState: amplitude count does not match space dimension");
  }
}

PureState PureState::zero(const HilbertSpace& space) {
  return PureState(space, CVector::Zero(static_cast<Eigen::Index>(space.dimension())));
}

PureState PureState::basis(const HilbertSpace& space, std::span<const int> digits) {
  CVector v = CVector::Zero(static_cast<Eigen::Index>(space.dimension()));
  v(static_cast<Eigen::Index>(space.index(digits))) = 1.0;
  return PureState(space, std::move(v));
}

PureState PureState::basis(const HilbertSpace& space, std::initializer_list<int> digits) {
  return basis(space, std::span<const int>(digits.begin(), digits.size()));
}

Complex PureState::amplitude(std::span<const int> digits) const {
  return amplitudes_(static_cast<Eigen::Index>(space_.index(digits)));
}

PureState PureState::normalized() const {
  const double n = norm();
  if (n == 0.0) throw std::domain_error("PureState::normalized: zero vector");
  return PureState(space_, amplitudes_ / n);
}

Complex PureState::inner(const PureState& other) const {
  require_same_space(space_, other.space_, "PureState::inner");
  return amplitudes_.dot(other.amplitudes_);
}

PureState PureState::operator+(const PureState& other) const {
  require_same_space(space_, other.space_, "PureState::operator+");
  return PureState(space_, amplitudes_ + other.amplitudes_);
}

PureState PureState::operator-(const PureState& other) const {
  require_same_space(space_, other.space_, "PureState::operator-");
  return PureState(space_, amplitudes_ - other.amplitudes_);
}

PureState PureState::operator*(Complex scale) const {
  return PureState(space_, amplitudes_ * scale);
}

// --- DensityMatrix ----------------------------------------------------------

DensityMatrix::DensityMatrix(HilbertSpace space, CMatrix entries)
    : space_(std::move(space)), entries_(std::move(entries)) {
  const auto n = static_cast<Eigen::Index>(space_.dimension());
  if (entries_.rows() != n || entries_.cols() != n) {
    throw std::invalid_argument("DensityMatrix: matrix shape does not match space dimension");
  }
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  return DensityMatrix(psi.space(), psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(const HilbertSpace& space) {
  const auto n = static_cast<Eigen::Index>(space.dimension());
  return DensityMatrix(space, CMatrix::Identity(n, n) / static_cast<double>(n));
}

bool DensityMatrix::is_hermitian(double tol) const {
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double DensityMatrix::min_eigenvalue() const {
  const CMatrix herm = 0.5 * (entries_ + entries_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool DensityMatrix::is_physical(double herm_tol, double trace_tol, double eig_tol) const {
  return is_hermitian(herm_tol) && std::abs(trace() - Complex{1.0}) <= trace_tol &&
         min_eigenvalue() >= -eig_tol;
}

DensityMatrix DensityMatrix::operator+(const DensityMatrix& other) const {
  require_same_space(space_, other.space_, "DensityMatrix::operator+");
  return DensityMatrix(space_, entries_ + other.entries_);
}

DensityMatrix DensityMatrix::operator*(double scale) const {
  return DensityMatrix(space_, entries_ * scale);
}

// --- LinearOperator ---------------------------------------------------------

LinearOperator::LinearOperator(HilbertSpace space, CMatrix entries, bool unitary)
    : space_(std::move(space)), entries_(std::move(entries)), unitary_(unitary) {
  const auto n = static_cast<Eigen::Index>(space_.dimension());
  if (entries_.rows() != n || entries_.cols() != n) {
    throw std::invalid_argument("LinearOperator: matrix shape does not match space dimension");
  }
  if (unitary_) {
    const double err = (entries_.adjoint() * entries_ - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (err > kUnitaryTol) throw std::invalid_argument("LinearOperator: flagged unitary but O^dagger O != I");
  }
}

LinearOperator LinearOperator::identity(const HilbertSpace& space) {
  const auto n = static_cast<Eigen::Index>(space.dimension());
  return LinearOperator(space, CMatrix::Identity(n, n), true);
}

LinearOperator LinearOperator::adjoint() const {
  return LinearOperator(space_, entries_.adjoint(), unitary_);
}

LinearOperator LinearOperator::operator*(const LinearOperator& rhs) const {
  require_same_space(space_, rhs.space_, "LinearOperator::operator*");
  return LinearOperator(space_, entries_ * rhs.entries_, unitary_ && rhs.unitary_);
}

LinearOperator LinearOperator::operator+(const LinearOperator& rhs) const {
  require_same_space(space_, rhs.space_, "LinearOperator::operator+");
  return LinearOperator(space_, entries_ + rhs.entries_);
}

LinearOperator LinearOperator::operator*(Complex scale) const {
  return LinearOperator(space_, entries_ * scale, unitary_ && std::abs(std::abs(scale) - 1.0) < 1e-12);
}

// --- Free operations --------------------------------------------------------

PureState tensor(const PureState& a, const PureState& b) {
  const HilbertSpace space = a.space().concat(b.space());
  const CVector& va = a.amplitudes();
  const CVector& vb = b.amplitudes();
  CVector out(va.size() * vb.size());
  for (Eigen::Index i = 0; i < va.size(); ++i) out.segment(i * vb.size(), vb.size()) = va(i) * vb;
  return PureState(space, std::move(out));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(a.space().concat(b.space()), kron(a.entries(), b.entries()));
}

LinearOperator tensor(const LinearOperator& a, const LinearOperator& b) {
  return LinearOperator(a.space().concat(b.space()), kron(a.entries(), b.entries()),
                        a.is_unitary() && b.is_unitary());
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep) {
  const HilbertSpace& full = rho.space();
  const HilbertSpace kept = full.subspace(keep);
  std::vector<std::string> traced_labels;
  for (const auto& f : full.factors()) {
    if (!kept.contains(f.label)) traced_labels.push_back(f.label);
  }
  const HilbertSpace traced = full.subspace(traced_labels);

  std::vector<std::size_t> kept_pos, traced_pos;
  for (const auto& f : kept.factors()) kept_pos.push_back(full.position(f.label));
  for (const auto& f : traced.factors()) traced_pos.push_back(full.position(f.label));
  const auto kept_strides = kept.strides();
  const auto traced_strides = traced.strides();

  // groups[t] lists (kept index, full index) pairs sharing traced index t.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> groups(traced.dimension());
  for (std::size_t i = 0; i < full.dimension(); ++i) {
    const auto d = full.digits(i);
    std::size_t k = 0, t = 0;
    for (std::size_t j = 0; j < kept_pos.size(); ++j) k += d[kept_pos[j]] * kept_strides[j];
    for (std::size_t j = 0; j < traced_pos.size(); ++j) t += d[traced_pos[j]] * traced_strides[j];
    groups[t].emplace_back(k, i);
  }

  const auto n = static_cast<Eigen::Index>(kept.dimension());
  CMatrix out = CMatrix::Zero(n, n);
  const CMatrix& m = rho.entries();
  for (const auto& g : groups) {
    for (const auto& [k1, i1] : g) {
      for (const auto& [k2, i2] : g) {
        out(static_cast<Eigen::Index>(k1), static_cast<Eigen::Index>(k2)) +=
            m(static_cast<Eigen::Index>(i1), static_cast<Eigen::Index>(i2));
      }
    }
  }
  return DensityMatrix(kept, std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::string> keep) {
  return partial_trace(rho, std::span<const std::string>(keep.begin(), keep.size()));
}

double fidelity(const DensityMatrix& rho, const PureState& psi) {
  require_same_space(rho.space(), psi.space(), "fidelity");
  return std::real(psi.amplitudes().dot(rho.entries() * psi.amplitudes()));
}

double overlap_magnitude(const PureState& a, const PureState& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::abs(a.inner(b)) / (na * nb);
}

PureState apply(const LinearOperator& op, const PureState& psi) {
  if (op.space() == psi.space()) return PureState(psi.space(), op.entries() * psi.amplitudes());
  const Embedding e = make_embedding(op.space(), psi.space());
  CMatrix col = psi.amplitudes();
  return PureState(psi.space(), apply_left(op.entries(), e, col).col(0));
}

DensityMatrix apply(const LinearOperator& op, const DensityMatrix& rho) {
  if (op.space() == rho.space()) {
    return DensityMatrix(rho.space(), op.entries() * rho.entries() * op.entries().adjoint());
  }
  const Embedding e = make_embedding(op.space(), rho.space());
  const CMatrix left = apply_left(op.entries(), e, rho.entries());  // O rho
  const CMatrix both = apply_left(op.entries(), e, left.adjoint());  // O rho^dag O^dag
  return DensityMatrix(rho.space(), both.adjoint());
}

LinearOperator embed(const LinearOperator& op, const HilbertSpace& full) {
  if (op.space() == full) return op;
  const Embedding e = make_embedding(op.space(), full);
  const auto n = static_cast<Eigen::Index>(full.dimension());
  return LinearOperator(full, apply_left(op.entries(), e, CMatrix::Identity(n, n)), op.is_unitary());
}

void check_projective_set(std::span<const LinearOperator> projectors) {
  if (projectors.empty()) throw std::invalid_argument("measure_projective: empty projector set");
  const HilbertSpace& space = projectors.front().space();
  const auto n = static_cast<Eigen::Index>(space.dimension());
  CMatrix sum = CMatrix::Zero(n, n);
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    require_same_space(space, projectors[i].space(), "measure_projective");
    sum += projectors[i].entries();
    for (std::size_t j = i + 1; j < projectors.size(); ++j) {
      const double overlap = (projectors[i].entries() * projectors[j].entries()).cwiseAbs().maxCoeff();
      if (overlap > kProjectorTol) throw std::invalid_argument("measure_projective: projectors not orthogonal");
    }
  }
  if ((sum - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() > kProjectorTol) {
    throw std::invalid_argument("measure_projective: projectors do not sum to identity");
  }
}

std::vector<double> outcome_probabilities(const PureState& psi,
                                          std::span<const LinearOperator> projectors) {
  check_projective_set(projectors);
  const double norm2 = psi.norm() * psi.norm();
  std::vector<double> p;
  for (const auto& proj : projectors) {
    const PureState projected = apply(proj, psi);
    p.push_back(projected.norm() * projected.norm() / norm2);
  }
  return p;
}

std::vector<double> outcome_probabilities(const DensityMatrix& rho,
                                          std::span<const LinearOperator> projectors) {
  check_projective_set(projectors);
  const double tr = std::real(rho.trace());
  std::vector<double> p;
  for (const auto& proj : projectors) p.push_back(std::real(apply(proj, rho).trace()) / tr);
  return p;
}

namespace {

std::size_t sample_index(const std::vector<double>& p, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    acc += p[k];
    if (r < acc) return k;
  }
  // Rounding left r above the cumulative sum: take the last nonzero outcome.
  for (std::size_t k = p.size(); k-- > 0;) {
    if (p[k] > 0.0) return k;
  }
  return p.size() - 1;
}

}  // namespace

PureMeasurement measure_projective(const PureState& psi,
                                   std::span<const LinearOperator> projectors, Rng& rng) {
  const auto p = outcome_probabilities(psi, projectors);
  const std::size_t k = sample_index(p, rng);
  return {k, apply(projectors[k], psi).normalized(), p[k]};
}

MixedMeasurement measure_projective(const DensityMatrix& rho,
                                    std::span<const LinearOperator> projectors, Rng& rng) {
  const auto p = outcome_probabilities(rho, projectors);
  const std::size_t k = sample_index(p, rng);
  const DensityMatrix post = apply(projectors[k], rho);
  return {k, post * (1.0 / std::real(post.trace())), p[k]};
}

// --- Single-mode building blocks --------------------------------------------

char to_char(Polarization p) { return p == Polarization::H ? 'H' : 'V'; }

Polarization flipped(Polarization p) {
  return p == Polarization::H ? Polarization::V : Polarization::H;
}

PureState polarization_ket(std::string_view label, Polarization p) {
  return PureState::basis(single(label, 2), {static_cast<int>(p)});
}

PureState diagonal_ket(std::string_view label, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("diagonal_ket: sign must be +1 or -1");
  CVector v(2);
  v << 1.0, static_cast<double>(sign);
  return PureState(single(label, 2), v / std::sqrt(2.0));
}

PureState fock_ket(std::string_view label, int dim, int n) {
  return PureState::basis(single(label, dim), {n});
}

LinearOperator pauli_x(std::string_view label) {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return LinearOperator(single(label, 2), m, true);
}

LinearOperator pauli_z(std::string_view label) {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return LinearOperator(single(label, 2), m, true);
}

LinearOperator projector(const PureState& psi) {
  const PureState u = psi.normalized();
  return LinearOperator(u.space(), u.amplitudes() * u.amplitudes().adjoint());
}

std::vector<LinearOperator> diagonal_basis_projectors(std::string_view label) {
  return {projector(diagonal_ket(label, +1)), projector(diagonal_ket(label, -1))};
}

LinearOperator annihilation(std::string_view label, int dim) {
  CMatrix m = CMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
  return LinearOperator(single(label, dim), m);
}

LinearOperator creation(std::string_view label, int dim) {
  return annihilation(label, dim).adjoint();
}

LinearOperator number_operator(std::string_view label, int dim) {
  CMatrix m = CMatrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) m(n, n) = static_cast<double>(n);
  return LinearOperator(single(label, dim), m);
}

}  // namespace qndepp
