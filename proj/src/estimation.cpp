#include "qsense/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

namespace qsense {

namespace {

void normalize(Eigen::ArrayXd& lw) {
  for (Eigen::Index i = 0; i < lw.size(); ++i)
    if (std::isnan(lw[i])) throw DegeneratePosteriorError("posterior: NaN log-weight");
  const double peak = lw.maxCoeff();
  if (!std::isfinite(peak)) throw DegeneratePosteriorError("posterior: non-finite log-weight");
  const double log_total = peak + std::log((lw - peak).exp().sum());
  lw -= log_total;
  lw = lw.max(kLogFloor);
}

}  // namespace

Posterior::Posterior(double omega_min, double omega_max, Eigen::ArrayXd log_weights)
    : omega_min_(omega_min), omega_max_(omega_max), log_weights_(std::move(log_weights)) {
  if (!(omega_min_ < omega_max_) || !std::isfinite(omega_min_) || !std::isfinite(omega_max_))
    throw RangeError("Posterior: need finite omega_min < omega_max");
  if (log_weights_.size() < kMinPoints)
    throw DimensionError("Posterior: at least 64 grid nodes required");
  normalize(log_weights_);
}

Eigen::ArrayXd Posterior::nodes() const {
  return Eigen::ArrayXd::LinSpaced(size(), omega_min_, omega_max_);
}

Posterior gaussian_prior(double omega0, double delta_omega0, double span_sigmas,
                         Eigen::Index n_points) {
  if (!(delta_omega0 > 0.0)) throw DomainError("gaussian_prior: delta_omega0 must be positive");
  if (!(span_sigmas > 0.0)) throw DomainError("gaussian_prior: span_sigmas must be positive");
  const double lo = omega0 - span_sigmas * delta_omega0;
  const double hi = omega0 + span_sigmas * delta_omega0;
  const Eigen::ArrayXd w = Eigen::ArrayXd::LinSpaced(n_points, lo, hi);
  const Eigen::ArrayXd z = (w - omega0) / delta_omega0;
  Eigen::ArrayXd lw = -0.5 * z.square() - std::log(std::sqrt(2.0 * std::numbers::pi) * delta_omega0);
  return Posterior(lo, hi, std::move(lw));
}

Posterior bayes_update(const Posterior& post, const Eigen::Ref<const Eigen::ArrayXd>& p_plus,
                       std::int64_t n_plus, std::int64_t n_minus) {
  if (p_plus.size() != post.size())
    throw DimensionError("bayes_update: likelihood length does not match the grid");
  if (n_plus < 0 || n_minus < 0) throw DomainError("bayes_update: negative outcome count");
  Eigen::ArrayXd lw = post.log_weights();
  if (n_plus == 0 && n_minus == 0) return post;
  const Eigen::ArrayXd p = p_plus.max(kLikelihoodFloor).min(1.0 - kLikelihoodFloor);
  if (n_plus > 0) lw += static_cast<double>(n_plus) * p.log();
  if (n_minus > 0) lw += static_cast<double>(n_minus) * (-p).log1p();
  return Posterior(post.omega_min(), post.omega_max(), std::move(lw));
}

MleResult mle(const Posterior& post) {
  const Eigen::ArrayXd& lw = post.log_weights();
  const Eigen::Index n = lw.size();
  const double top = lw.maxCoeff();
  if (top == lw.minCoeff()) return {0.5 * (post.omega_min() + post.omega_max()), true};

  const double centre = 0.5 * static_cast<double>(n - 1);
  Eigen::Index best = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lw[i] != top) continue;
    if (best < 0 || std::abs(static_cast<double>(i) - centre) <
                        std::abs(static_cast<double>(best) - centre))
      best = i;
  }

  double omega = post.node(best);
  if (best > 0 && best < n - 1) {
    const double y0 = lw[best - 1];
    const double y1 = lw[best];
    const double y2 = lw[best + 1];
    const double curvature = y0 - 2.0 * y1 + y2;
    if (curvature < 0.0) {
      const double shift = std::clamp(0.5 * (y0 - y2) / curvature, -0.5, 0.5);
      omega += shift * post.spacing();
    }
  }
  return {omega, false};
}

namespace {

UncertaintyResult rms_over(const Posterior& post, double omega_hat, Eigen::Index first,
                           Eigen::Index last) {
  const Eigen::Index m = last - first + 1;
  Eigen::ArrayXd w = post.log_weights().segment(first, m).exp();
  w[0] *= 0.5;
  w[m - 1] *= 0.5;
  const double total = w.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw DegeneratePosteriorError("uncertainty: posterior has zero total weight");
  const Eigen::ArrayXd offsets = post.nodes().segment(first, m) - omega_hat;
  const double value = std::sqrt((w * offsets.square()).sum() / total);
  const double h = post.spacing();
  if (value < h) return {std::max(value, h / std::sqrt(12.0)), true};
  return {value, false};
}

}  // namespace

UncertaintyResult uncertainty(const Posterior& post, double omega_hat) {
  return rms_over(post, omega_hat, 0, post.size() - 1);
}

ModeBounds mode_bounds(const Posterior& post, double omega_hat, double valley_fraction) {
  if (!(valley_fraction >= 0.0 && valley_fraction < 1.0))
    throw DomainError("mode_bounds: valley_fraction must lie in [0, 1)");
  const Eigen::ArrayXd& lw = post.log_weights();
  const Eigen::Index n = lw.size();
  const auto start = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::lround((omega_hat - post.omega_min()) / post.spacing())), 0,
      n - 1);
  const double cut = valley_fraction > 0.0 ? std::log(valley_fraction)
                                           : -std::numeric_limits<double>::infinity();

  // Peak of the mode: climb from the start node.
  Eigen::Index peak = start;
  while (peak > 0 && lw[peak - 1] > lw[peak]) --peak;
  while (peak + 1 < n && lw[peak + 1] > lw[peak]) ++peak;
  const double top = lw[peak];

  Eigen::Index first = std::min(start, peak);
  while (first > 0 && !(lw[first - 1] > lw[first] && lw[first] - top < cut)) --first;
  Eigen::Index last = std::max(start, peak);
  while (last + 1 < n && !(lw[last + 1] > lw[last] && lw[last] - top < cut)) ++last;
  return {first, last};
}

UncertaintyResult mode_uncertainty(const Posterior& post, double omega_hat,
                                   double valley_fraction) {
  const ModeBounds b = mode_bounds(post, omega_hat, valley_fraction);
  return rms_over(post, omega_hat, b.first, b.last);
}

Posterior regrid(const Posterior& post, double center, double half_width,
                 Eigen::Index n_points) {
  if (!(half_width > 0.0)) throw DomainError("regrid: half_width must be positive");
  const double lo = center - half_width;
  const double hi = center + half_width;
  if (hi < post.omega_min() || lo > post.omega_max())
    throw RangeError("regrid: new window does not overlap the current grid");

  const Eigen::ArrayXd& old = post.log_weights();
  const Eigen::Index last = old.size() - 1;
  const double h = post.spacing();
  Eigen::ArrayXd lw(n_points);
  const double step = (hi - lo) / static_cast<double>(n_points - 1);
  for (Eigen::Index j = 0; j < n_points; ++j) {
    const double w = lo + step * static_cast<double>(j);
    const double pos = (w - post.omega_min()) / h;
    if (pos < -1e-9 || pos > static_cast<double>(last) + 1e-9) {
      lw[j] = kLogFloor;
      continue;
    }
    const double clamped = std::clamp(pos, 0.0, static_cast<double>(last));
    const auto i0 = std::min(static_cast<Eigen::Index>(clamped), last - 1);
    const double frac = clamped - static_cast<double>(i0);
    lw[j] = (1.0 - frac) * old[i0] + frac * old[i0 + 1];
  }
  return Posterior(lo, hi, std::move(lw));
}

void write_posterior_csv(std::ostream& out, const Posterior& post) {
  out << "omega,weight\n";
  const Eigen::ArrayXd w = post.weights();
  char buf[64];
  for (Eigen::Index i = 0; i < post.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", post.node(i), w[i]);
    out << buf;
  }
}

}  // namespace qsense
