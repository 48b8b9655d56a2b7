#include "qndepp/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qndepp::homodyne {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double wrap_two_pi(double x) {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(x, two_pi);
  if (r < 0.0) r += two_pi;
  return r;
}

}  // namespace

ProbeState ProbeState::make(double alpha, double theta) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("ProbeState: alpha must be >= 0");
  return ProbeState{alpha, theta};
}

double ProbeState::peak() const { return 2.0 * alpha * std::cos(theta); }

double quadrature_amplitude(double x, const ProbeState& probe) {
  const double d = x - probe.peak();
  return std::pow(2.0 * std::numbers::pi, -0.25) * std::exp(-0.25 * d * d);
}

double quadrature_phase(double x, const ProbeState& probe) {
  return wrap_two_pi(probe.alpha * std::sin(probe.theta) * (x - probe.peak()));
}

double quadrature_pdf(double x, const ProbeState& probe) {
  const double d = x - probe.peak();
  return std::exp(-0.5 * d * d) / std::sqrt(2.0 * std::numbers::pi);
}

PeakGeometry peak_separation(double alpha, double theta_a, double theta_b) {
  const double ca = std::cos(theta_a);
  const double cb = std::cos(theta_b);
  return {alpha * (ca + cb), 2.0 * alpha * (ca - cb)};
}

double error_probability(double x_d) {
  return 0.5 * std::erfc(std::abs(x_d) / (2.0 * kSqrt2));
}

double separation_for_error(double p_target) {
  if (!(p_target > 0.0 && p_target < 0.5)) {
    throw std::invalid_argument("separation_for_error: target must lie in (0, 0.5)");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (error_probability(hi) > p_target) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (error_probability(mid) > p_target ? lo : hi) = mid;
  }
  return hi;
}

MinAlphaResult min_alpha(std::span<const double> thetas, const MinAlphaCriterion& criterion) {
  struct Phase {
    double theta;
    double cosine;
  };
  std::vector<Phase> phases;
  for (double t : thetas) {
    const double c = std::cos(t);
    bool duplicate = false;
    for (const auto& p : phases) {
      if (std::abs(p.cosine - c) <= 1e-12) {
        if (std::abs(std::remainder(p.theta - t, 2.0 * std::numbers::pi)) > 1e-12) {
          throw std::invalid_argument(
              "min_alpha: phases with equal cosine cannot be separated by an X measurement");
        }
        duplicate = true;
        break;
      }
    }
    if (!duplicate) phases.push_back({t, c});
  }
  if (phases.size() < 2) {
    throw std::invalid_argument("min_alpha: need at least two distinct cos(theta); no finite alpha exists");
  }
  std::sort(phases.begin(), phases.end(), [](const Phase& a, const Phase& b) { return a.cosine < b.cosine; });

  MinAlphaResult r;
  r.cos_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < phases.size(); ++i) {
    const double gap = phases[i].cosine - phases[i - 1].cosine;
    if (gap < r.cos_gap) {
      r.cos_gap = gap;
      r.theta_a = phases[i].theta;
      r.theta_b = phases[i - 1].theta;
    }
  }

  if (const auto* fixed = std::get_if<SeparationThreshold>(&criterion)) {
    if (!(fixed->x_d > 0.0)) throw std::invalid_argument("min_alpha: separation threshold must be positive");
    r.required_x_d = fixed->x_d;
    r.alpha = fixed->x_d / (2.0 * r.cos_gap);
  } else {
    const double p = std::get<ErrorTarget>(criterion).probability;
    if (!(p > 0.0 && p < 0.5)) throw std::invalid_argument("min_alpha: target must lie in (0, 0.5)");
    const auto err = [&](double alpha) { return error_probability(2.0 * alpha * r.cos_gap); };
    double lo = 0.0;
    double hi = 1.0;
    while (err(hi) > p) hi *= 2.0;
    while (hi - lo > 1e-12 * hi) {
      const double mid = 0.5 * (lo + hi);
      (err(mid) > p ? lo : hi) = mid;
    }
    r.alpha = hi;
    r.required_x_d = 2.0 * hi * r.cos_gap;
  }
  r.error_at_alpha = error_probability(2.0 * r.alpha * r.cos_gap);
  return r;
}

double min_alpha(std::span<const double> thetas, double p_target) {
  return min_alpha(thetas, ErrorTarget{p_target}).alpha;
}

PhaseBinSet::PhaseBinSet(std::vector<Bin> bins) : bins_(std::move(bins)) {
  if (bins_.empty()) throw std::invalid_argument("PhaseBinSet: no bins");
}

std::size_t PhaseBinSet::index_of_theta(double theta) const {
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    if (std::abs(bins_[i].theta - theta) <= 1e-12) return i;
  }
  throw std::invalid_argument("PhaseBinSet: probe phase matches no bin");
}

double PhaseBinSet::center(std::size_t i, double alpha) const {
  return 2.0 * alpha * std::cos(bins_.at(i).theta);
}

std::size_t PhaseBinSet::classify(double x, double alpha) const {
  std::size_t best = 0;
  double best_dist = std::abs(x - center(0, alpha));
  for (std::size_t i = 1; i < bins_.size(); ++i) {
    const double d = std::abs(x - center(i, alpha));
    if (d < best_dist) {
      best = i;
      best_dist = d;
    }
  }
  return best;
}

namespace {

// Distinct centres in ascending order, each owned by the lowest bin index
// sharing it.
std::vector<std::pair<double, std::size_t>> owned_centers(const PhaseBinSet& set, double alpha) {
  std::vector<std::pair<double, std::size_t>> out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double c = set.center(i, alpha);
    const bool seen = std::any_of(out.begin(), out.end(), [&](const auto& p) { return p.first == c; });
    if (!seen) out.emplace_back(c, i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<double> PhaseBinSet::thresholds(double alpha) const {
  const auto centers = owned_centers(*this, alpha);
  std::vector<double> t;
  for (std::size_t k = 1; k < centers.size(); ++k) t.push_back(0.5 * (centers[k - 1].first + centers[k].first));
  return t;
}

Eigen::MatrixXd PhaseBinSet::confusion_matrix(double alpha) const {
  const auto centers = owned_centers(*this, alpha);
  const auto n = static_cast<Eigen::Index>(bins_.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = center(static_cast<std::size_t>(i), alpha);
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const double lo = k == 0 ? -inf : 0.5 * (centers[k - 1].first + centers[k].first);
      const double hi = k + 1 == centers.size() ? inf : 0.5 * (centers[k].first + centers[k + 1].first);
      // Upper tails via erfc keep small probabilities accurate.
      const double p = mu <= lo ? 0.5 * std::erfc((lo - mu) / kSqrt2) - 0.5 * std::erfc((hi - mu) / kSqrt2)
                                : normal_cdf(hi - mu) - normal_cdf(lo - mu);
      m(i, static_cast<Eigen::Index>(centers[k].second)) += p;
    }
  }
  return m;
}

Classification sample_and_classify(const ProbeState& probe, const PhaseBinSet& bins, Rng& rng) {
  const std::size_t truth = bins.index_of_theta(probe.theta);
  std::normal_distribution<double> noise(probe.peak(), 1.0);
  const double x = noise(rng);
  const std::size_t assigned = bins.classify(x, probe.alpha);
  return {x, truth, assigned, assigned == truth};
}

}  // namespace qndepp::homodyne
