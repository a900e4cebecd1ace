#include "qsense/information.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "qsense/quadrature.hpp"

namespace qsense {

namespace {
constexpr double kPi = std::numbers::pi;
}

PrecisionBound::PrecisionBound(double d) : delta_omega(d) {
  if (!(d > 0.0) || !std::isfinite(d))
    throw DomainError("PrecisionBound: delta_omega must be positive and finite");
}

EffectiveCoupling::EffectiveCoupling(double l) : lambda_tilde(l) {
  if (!(l > 0.0) || !std::isfinite(l))
    throw DomainError("EffectiveCoupling: lambda_tilde must be positive");
}

double g_finite(std::int64_t n_units, double zeta) {
  if (n_units < 2) throw DomainError("g_finite: n_units must be >= 2");
  constexpr double h = 1e-6;
  const double n = static_cast<double>(n_units);
  // sin(N x) / (N sin x) at x = pi (1 + z/N), reduced to sin(pi z) / (N sin(pi z/N)) up to a
  // constant sign so that no phase near pi is ever formed.
  auto amplitude = [&](double z) {
    const double s = std::sin(kPi * z / n);
    if (std::abs(s) < 1e-8) return std::cos(kPi * z) / std::cos(kPi * z / n);
    return std::sin(kPi * z) / (n * s);
  };
  return std::abs((amplitude(zeta + h) - amplitude(zeta - h)) / (2.0 * h));
}

double g_universal(double zeta) {
  if (std::abs(zeta) < 1e-4) return kPi * kPi * std::abs(zeta) / 3.0;
  const double u = kPi * zeta;
  return std::abs((u * std::cos(u) - std::sin(u)) / (kPi * zeta * zeta));
}

double g_approx(double zeta) {
  const double a = std::abs(zeta);
  if (a < 1.0) return kPi * kPi * a / 3.0 * std::exp(-(kPi * zeta) * (kPi * zeta) / 10.0);
  return std::abs(std::cos(kPi * zeta)) / a;
}

double g_sq_mean(double delta_zeta) {
  if (!(delta_zeta > 0.0)) throw DomainError("g_sq_mean: delta_zeta must be positive");
  const double lo = 1.0 - delta_zeta;
  const double hi = 1.0 + delta_zeta;
  std::vector<double> breaks;
  for (double k = std::ceil(lo); k <= std::floor(hi); k += 1.0) breaks.push_back(k);
  const auto integrand = [](double z) {
    const double g = g_universal(z);
    return g * g;
  };
  return integrate(integrand, lo, hi, 1e-8, breaks) / (2.0 * delta_zeta);
}

double g_rms(double delta_zeta) { return std::sqrt(g_sq_mean(delta_zeta)); }

double qfi_real(double coherence, double dcoherence_domega) {
  const double denom = 1.0 - coherence * coherence;
  if (dcoherence_domega == 0.0) return 0.0;
  if (!(denom > 0.0)) throw SingularityError("qfi_real: |L| >= 1 with nonzero dL/domega");
  return dcoherence_domega * dcoherence_domega / denom;
}

double qfi_complex(std::complex<double> coherence, std::complex<double> dcoherence_domega) {
  const double abs_l = std::abs(coherence);
  if (!(abs_l < 1.0)) throw SingularityError("qfi_complex: |L| >= 1");
  const double dabs =
      abs_l > 0.0 ? (std::conj(coherence) * dcoherence_domega).real() / abs_l : 0.0;
  return std::norm(dcoherence_domega) + abs_l * abs_l * dabs * dabs / (1.0 - abs_l * abs_l);
}

double cfi_binary(double p_plus, double dp_domega) {
  if (dp_domega == 0.0) return 0.0;
  if (!(p_plus > 0.0 && p_plus < 1.0))
    throw SingularityError("cfi_binary: p outside (0, 1) with nonzero dp/domega");
  return dp_domega * dp_domega / (p_plus * (1.0 - p_plus));
}

PrecisionBound precision_from_fisher(double fisher, std::int64_t repetitions) {
  if (repetitions < 1) throw DomainError("precision_from_fisher: repetitions must be >= 1");
  if (!(fisher > 0.0)) throw NoInformationError("precision_from_fisher: zero Fisher information");
  return PrecisionBound(1.0 / std::sqrt(static_cast<double>(repetitions) * fisher));
}

PrecisionBound precision_asymptotic(EffectiveCoupling lambda_tilde, double total_time, double g) {
  if (!(total_time > 0.0) || !(g > 0.0))
    throw DomainError("precision_asymptotic: T and g must be positive");
  return PrecisionBound(kPi / (g * lambda_tilde.lambda_tilde * total_time * total_time));
}

double t_max(double delta_omega, EffectiveCoupling lambda_tilde) {
  if (!(delta_omega > 0.0)) throw DomainError("t_max: delta_omega must be positive");
  return std::sqrt(2.0 * kPi / (delta_omega * std::max(delta_omega, lambda_tilde.lambda_tilde)));
}

PrecisionBound precision_free(double omega, EffectiveCoupling lambda_tilde, double total_time) {
  if (!(omega > 0.0) || !(total_time > 0.0))
    throw DomainError("precision_free: omega and T must be positive");
  return PrecisionBound(omega / (lambda_tilde.lambda_tilde * total_time));
}

ComparisonReport compare_control(double k_factor, double omega, const Coupling<double>& coupling,
                                 EffectiveCoupling lambda_tilde, double t2) {
  if (!(k_factor > 0.0) || !(omega > 0.0) || !(t2 > 0.0))
    throw DomainError("compare_control: inputs must be positive");
  const double lt = lambda_tilde.lambda_tilde;
  ComparisonReport r{};
  r.time_cost_ratio = std::sqrt(k_factor) * omega / coupling.lambda;
  r.sensitivity_controlled = kPi / (lt * std::pow(t2, 1.5));
  r.sensitivity_free = omega / (lt * std::sqrt(t2));
  r.sensitivity_gain = r.sensitivity_free / r.sensitivity_controlled;
  return r;
}

AbsDerivative dalpha_abs_domega(const ControlSchedule<double>& sched,
                                const Coupling<double>& coupling, double omega) {
  if (!(omega > 0.0)) throw DomainError("dalpha_abs_domega: omega must be positive");
  const double h = 1e-7 * omega;
  auto abs_alpha = [&](double w) { return std::abs(total_displacement(sched, coupling, w)); };
  const double centre = abs_alpha(omega);
  if (centre < 1e-14) return {(abs_alpha(omega + h) - centre) / h, true};
  return {(abs_alpha(omega + h) - abs_alpha(omega - h)) / (2.0 * h), false};
}

AbsDerivative dalpha_abs_domega_cpmg(std::int64_t n_units, const Coupling<double>& coupling,
                                     double omega, double tau) {
  if (!(omega > 0.0) || !(tau > 0.0))
    throw DomainError("dalpha_abs_domega_cpmg: omega and tau must be positive");
  if (n_units < 1) throw DomainError("dalpha_abs_domega_cpmg: n_units must be >= 1");
  const double lambda = coupling.lambda;
  const double n = static_cast<double>(n_units);

  // Signed single-unit amplitude a1 = (8 lambda / omega) cos(x) sin^3(x), x = omega tau / 8.
  const double x = omega * tau / 8.0;
  const double s = std::sin(x);
  const double c = std::cos(x);
  const double a1 = 8.0 * lambda / omega * c * s * s * s;
  const double da1 = -a1 / omega + lambda * tau / omega * (3.0 * c * c * s * s - s * s * s * s);

  // Signed Dirichlet ratio D = sin(N y) / sin(y), y = omega tau / 2 = m pi + r.
  const double y = omega * tau / 2.0;
  const double m = std::nearbyint(y / kPi);
  const double r = y - m * kPi;
  const double sign = std::fmod(std::abs(m), 2.0) == 1.0 && n_units % 2 == 0 ? -1.0 : 1.0;
  const double sr = std::sin(r);
  const double d = dirichlet_ratio(n_units, y);
  double dd;
  if (std::abs(sr) < 1e-8) {
    dd = 0.0;  // the major peaks are extrema of D
  } else {
    dd = sign * 0.5 * tau * (n * std::cos(n * r) * sr - std::sin(n * r) * std::cos(r)) / (sr * sr);
  }

  const double signed_alpha = a1 * d;
  const double slope = da1 * d + a1 * dd;
  if (std::abs(signed_alpha) < 1e-14) return {std::abs(slope), true};
  return {signed_alpha > 0.0 ? slope : -slope, false};
}

}  // namespace qsense
