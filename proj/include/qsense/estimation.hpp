#pragma once

// Grid posterior over the oscillator frequency, held as log-weights on a
// uniform grid. All operations return new posteriors; inputs are untouched.

#include <cstdint>
#include <iosfwd>

#include <Eigen/Core>

#include "qsense/errors.hpp"

namespace qsense {

/// Lower bound applied to log-weights after normalization (about the
/// smallest positive double's log).
inline constexpr double kLogFloor = -745.0;

/// Likelihoods are clamped into [kLikelihoodFloor, 1 - kLikelihoodFloor]
/// before taking logs, so one contrary outcome cannot zero the posterior.
inline constexpr double kLikelihoodFloor = 1e-12;

class Posterior {
 public:
  static constexpr Eigen::Index kMinPoints = 64;

  /// Takes unnormalized log-weights and normalizes them.
  Posterior(double omega_min, double omega_max, Eigen::ArrayXd log_weights);

  double omega_min() const { return omega_min_; }
  double omega_max() const { return omega_max_; }
  Eigen::Index size() const { return log_weights_.size(); }
  double spacing() const { return (omega_max_ - omega_min_) / static_cast<double>(size() - 1); }
  double node(Eigen::Index i) const { return omega_min_ + spacing() * static_cast<double>(i); }

  Eigen::ArrayXd nodes() const;
  const Eigen::ArrayXd& log_weights() const { return log_weights_; }
  /// Probability mass per node; sums to one.
  Eigen::ArrayXd weights() const { return log_weights_.exp(); }

 private:
  double omega_min_;
  double omega_max_;
  Eigen::ArrayXd log_weights_;
};

struct MleResult {
  double omega;
  bool degenerate;  // every node carried the same weight
};

struct UncertaintyResult {
  double value;
  bool resolution_limited;  // narrower than one grid spacing
};

struct Estimate {
  double omega_hat;
  double delta_omega;
};

/// Gaussian prior on omega0 +- span_sigmas * delta_omega0.
Posterior gaussian_prior(double omega0, double delta_omega0, double span_sigmas,
                         Eigen::Index n_points);

/// Multiplies in P+^n_plus (1 - P+)^n_minus node by node.
Posterior bayes_update(const Posterior& post, const Eigen::Ref<const Eigen::ArrayXd>& p_plus,
                       std::int64_t n_plus, std::int64_t n_minus);

/// Argmax of the posterior refined by a three-point parabola through the
/// log-weights. Ties go to the node nearest the grid centre, then to the
/// lower index.
MleResult mle(const Posterior& post);

/// RMS deviation of the posterior about omega_hat (trapezoid weights).
UncertaintyResult uncertainty(const Posterior& post, double omega_hat);

/// Index range [first, last] of the posterior mode containing omega_hat: the
/// walk outward stops at the first local minimum whose weight has fallen below
/// `valley_fraction` of the mode's peak. A fraction of 0 spans the whole grid.
struct ModeBounds {
  Eigen::Index first;
  Eigen::Index last;
};
ModeBounds mode_bounds(const Posterior& post, double omega_hat, double valley_fraction);

/// RMS deviation about omega_hat restricted to mode_bounds(post, omega_hat,
/// valley_fraction). Equals uncertainty() for a unimodal posterior.
UncertaintyResult mode_uncertainty(const Posterior& post, double omega_hat,
                                   double valley_fraction);

/// Linear interpolation of log-weights onto a new uniform window; nodes
/// outside the old grid get kLogFloor.
Posterior regrid(const Posterior& post, double center, double half_width,
                 Eigen::Index n_points);

/// Writes "omega,weight" rows.
void write_posterior_csv(std::ostream& out, const Posterior& post);

}  // namespace qsense
