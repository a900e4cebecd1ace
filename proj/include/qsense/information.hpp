#pragma once

// Fisher information and precision bounds for frequency estimation through
// the periodically controlled qubit probe.

#include <complex>
#include <cstdint>

#include "qsense/model.hpp"

namespace qsense {

/// RMS of the fringe-slope function over zeta in [0, 2]; the constant the
/// stage-(i) controller is tuned with.
inline constexpr double kGrmsUnitWindow = 0.83544;

/// Standard-deviation-level frequency uncertainty.
struct PrecisionBound {
  double delta_omega;

  explicit PrecisionBound(double d);
};

/// lambda_tilde = sqrt(2 nbar + 1) |alpha_1| / tau.
struct EffectiveCoupling {
  double lambda_tilde;

  explicit EffectiveCoupling(double l);
};

/// Controlled vs free-evolution figures of merit. All entries are order
/// estimates, not tight bounds.
struct ComparisonReport {
  double time_cost_ratio;         // T_free / T
  double sensitivity_controlled;  // S = delta_omega sqrt(T) under control
  double sensitivity_free;
  double sensitivity_gain;        // S_free / S
};

/// Derivative of |alpha| with respect to omega. |alpha| has kinks at its
/// zeros; there the one-sided slope is returned and `at_node` is set.
struct AbsDerivative {
  double value;
  bool at_node;
};

// Fringe slope g(zeta) = |d(|K|/N)/d zeta| with omega tau = 2 pi (1 + zeta/N).
// Differentiates the signed Dirichlet amplitude so that the magnitude is
// well-defined at the nodes of |K|.
double g_finite(std::int64_t n_units, double zeta);
double g_universal(double zeta);
double g_approx(double zeta);

/// <g^2> over [1 - delta_zeta, 1 + delta_zeta].
double g_sq_mean(double delta_zeta);
double g_rms(double delta_zeta);

double qfi_real(double coherence, double dcoherence_domega);
double qfi_complex(std::complex<double> coherence, std::complex<double> dcoherence_domega);
double cfi_binary(double p_plus, double dp_domega);

PrecisionBound precision_from_fisher(double fisher, std::int64_t repetitions);
PrecisionBound precision_asymptotic(EffectiveCoupling lambda_tilde, double total_time, double g);
double t_max(double delta_omega, EffectiveCoupling lambda_tilde);
PrecisionBound precision_free(double omega, EffectiveCoupling lambda_tilde, double total_time);

ComparisonReport compare_control(double k_factor, double omega, const Coupling<double>& coupling,
                                 EffectiveCoupling lambda_tilde, double t2);

/// Central finite difference of |total_displacement| with step 1e-7 * omega.
AbsDerivative dalpha_abs_domega(const ControlSchedule<double>& sched,
                                const Coupling<double>& coupling, double omega);

/// Closed-form derivative for N CPMG units.
AbsDerivative dalpha_abs_domega_cpmg(std::int64_t n_units, const Coupling<double>& coupling,
                                     double omega, double tau);

}  // namespace qsense
