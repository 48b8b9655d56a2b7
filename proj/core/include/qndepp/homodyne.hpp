#pragma once

// X-quadrature homodyne discrimination of coherent probe phases.
//
// The quadrature wavefunction of |alpha e^{i theta}> is
// f(X, alpha cos theta) e^{i Phi(X)} with f(X, y) = (2 pi)^{-1/4}
// exp[-(X - 2y)^2 / 4], so |f|^2 is a unit-variance Gaussian centred at
// 2 alpha cos theta. Only |f|^2 enters any classification below.

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qndepp/random.hpp"

namespace qndepp::homodyne {

struct ProbeState {
  double alpha = 0.0;  // real amplitude, >= 0
  double theta = 0.0;  // accumulated phase (rad)

  /// Throws std::invalid_argument for negative alpha.
  static ProbeState make(double alpha, double theta);
  double peak() const;  // 2 alpha cos theta
};

/// f(X, alpha cos theta).
double quadrature_amplitude(double x, const ProbeState& probe);
/// Phi(X) = alpha sin(theta) (X - 2 alpha cos theta) mod 2pi. Informational only.
double quadrature_phase(double x, const ProbeState& probe);
/// |f(X, alpha cos theta)|^2 = (2 pi)^{-1/2} exp[-(X - 2 alpha cos theta)^2 / 2].
double quadrature_pdf(double x, const ProbeState& probe);

struct PeakGeometry {
  double midpoint = 0.0;  // X_m = alpha (cos theta_a + cos theta_b)
  double distance = 0.0;  // X_d = 2 alpha (cos theta_a - cos theta_b), signed
};

PeakGeometry peak_separation(double alpha, double theta_a, double theta_b);

/// 1/2 erfc(|X_d| / (2 sqrt 2)).
double error_probability(double x_d);

/// X_d >= 0 with error_probability(X_d) = p_target, p_target in (0, 0.5).
double separation_for_error(double p_target);

/// Exact inversion of the error law at a target probability.
struct ErrorTarget {
  double probability = 0.01;
};
/// A fixed peak-distance requirement X_d > x_d.
struct SeparationThreshold {
  double x_d = 4.5;
};
using MinAlphaCriterion = std::variant<ErrorTarget, SeparationThreshold>;

struct MinAlphaResult {
  double alpha = 0.0;
  double theta_a = 0.0;  // hardest pair
  double theta_b = 0.0;
  double cos_gap = 0.0;     // |cos theta_a - cos theta_b|
  double required_x_d = 0.0;
  double error_at_alpha = 0.0;
};

/// Smallest alpha at which the hardest pair (smallest cosine gap among the
/// distinct phases) meets the criterion. The ErrorTarget mode bisects on
/// alpha to relative 1e-12. Throws if fewer than two distinct cosines exist
/// or if two different phases share a cosine.
MinAlphaResult min_alpha(std::span<const double> thetas, const MinAlphaCriterion& criterion);
double min_alpha(std::span<const double> thetas, double p_target);

class PhaseBinSet {
 public:
  struct Bin {
    std::string label;
    double theta = 0.0;
  };

  explicit PhaseBinSet(std::vector<Bin> bins);

  const std::vector<Bin>& bins() const { return bins_; }
  std::size_t size() const { return bins_.size(); }
  const std::string& label(std::size_t i) const { return bins_.at(i).label; }
  /// First bin whose phase equals `theta` within 1e-12; throws if none.
  std::size_t index_of_theta(double theta) const;

  double center(std::size_t i, double alpha) const;
  /// Nearest centre 2 alpha cos theta; exact ties go to the lower index.
  std::size_t classify(double x, double alpha) const;
  /// Decision boundaries X_m between adjacent distinct centres, ascending.
  std::vector<double> thresholds(double alpha) const;
  /// P(assigned = column | true = row) under the classify() rule.
  Eigen::MatrixXd confusion_matrix(double alpha) const;

 private:
  std::vector<Bin> bins_;
};

struct Classification {
  double x = 0.0;
  std::size_t true_bin = 0;
  std::size_t assigned = 0;
  bool correct = false;
};

/// Draws X from quadrature_pdf and classifies it against the bin set.
Classification sample_and_classify(const ProbeState& probe, const PhaseBinSet& bins, Rng& rng);

}  // namespace qndepp::homodyne
