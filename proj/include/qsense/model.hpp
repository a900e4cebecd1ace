#pragma once

// Closed-form dynamics of a qubit probe dephasing-coupled to an oscillator
// under periodic pi-pulse control. Everything here is a pure function of its
// arguments; frequencies share one arbitrary unit and times its inverse.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qsense/errors.hpp"

namespace qsense {

template <typename Scalar>
using Complex = std::complex<Scalar>;

/// One control unit: duration tau and an even number of pi pulses, stored as
/// fractions of tau in (0, 1). The modulation sign starts at +1 and flips at
/// every pulse.
template <typename Scalar>
class PulseSequence {
 public:
  PulseSequence(Scalar tau, std::vector<Scalar> pulse_fractions)
      : tau_(tau), fractions_(std::move(pulse_fractions)) {
    if (!(tau_ > Scalar(0)) || !std::isfinite(static_cast<double>(tau_)))
      throw DomainError("PulseSequence: tau must be positive and finite");
    if (fractions_.size() % 2 != 0)
      throw DomainError("PulseSequence: pulse count must be even");
    Scalar prev(0);
    for (Scalar f : fractions_) {
      if (!(f > prev) || !(f < Scalar(1)))
        throw DomainError(
            "PulseSequence: pulse fractions must be strictly increasing in (0, 1)");
      prev = f;
    }
  }

  /// Carr-Purcell-Meiboom-Gill unit tau/4 - pi - tau/2 - pi - tau/4.
  static PulseSequence cpmg(Scalar tau) {
    return PulseSequence(tau, {Scalar(0.25), Scalar(0.75)});
  }

  /// No pulses: f(t) = 1.
  static PulseSequence free_evolution(Scalar tau) { return PulseSequence(tau, {}); }

  Scalar tau() const { return tau_; }
  std::span<const Scalar> pulse_fractions() const { return fractions_; }

  /// Segment boundaries 0, t_1, ..., t_m, tau in absolute time.
  std::vector<Scalar> boundaries() const {
    std::vector<Scalar> b;
    b.reserve(fractions_.size() + 2);
    b.push_back(Scalar(0));
    for (Scalar f : fractions_) b.push_back(f * tau_);
    b.push_back(tau_);
    return b;
  }

 private:
  Scalar tau_;
  std::vector<Scalar> fractions_;
};

template <typename Scalar>
struct ControlSchedule {
  PulseSequence<Scalar> sequence;
  std::int64_t n_units;

  ControlSchedule(PulseSequence<Scalar> seq, std::int64_t n)
      : sequence(std::move(seq)), n_units(n) {
    if (n_units < 1) throw DomainError("ControlSchedule: n_units must be >= 1");
  }

  Scalar total_time() const { return Scalar(n_units) * sequence.tau(); }
};

template <typename Scalar>
struct ThermalState {
  Scalar nbar;

  explicit ThermalState(Scalar n) : nbar(n) {
    if (!(nbar >= Scalar(0))) throw DomainError("ThermalState: nbar must be >= 0");
  }
};

/// First and second moments of the oscillator's initial state, used by the
/// small-displacement coherence expansion.
template <typename Scalar>
struct OscillatorMoments {
  Complex<Scalar> b_dag_mean;
  Complex<Scalar> b_dag_sq_mean;
  Scalar nbar;

  OscillatorMoments(Complex<Scalar> b_dag, Complex<Scalar> b_dag_sq, Scalar n)
      : b_dag_mean(b_dag), b_dag_sq_mean(b_dag_sq), nbar(n) {
    if (!(nbar >= Scalar(0))) throw DomainError("OscillatorMoments: nbar must be >= 0");
    if (std::norm(b_dag_mean) > nbar * (Scalar(1) + Scalar(1e-12)) + Scalar(1e-15))
      throw DomainError("OscillatorMoments: |<b+>|^2 exceeds nbar");
  }
};

template <typename Scalar>
struct Coupling {
  Scalar lambda;

  explicit Coupling(Scalar l) : lambda(l) {
    if (!(lambda > Scalar(0))) throw DomainError("Coupling: lambda must be positive");
  }
};

// ---------------------------------------------------------------------------
// Modulation and displacement

template <typename Scalar>
int modulation_value(const PulseSequence<Scalar>& seq, Scalar t) {
  if (!(t >= Scalar(0)) || !(t < seq.tau()))
    throw DomainError("modulation_value: t outside [0, tau)");
  int sign = 1;
  for (Scalar f : seq.pulse_fractions()) {
    if (t >= f * seq.tau()) sign = -sign;
  }
  return sign;
}

/// Displacement accrued over a single unit,
/// -i (lambda/2) * integral_0^tau f(t) exp(i omega t) dt, integrated exactly
/// segment by segment.
template <typename Scalar>
Complex<Scalar> alpha_single_unit(const PulseSequence<Scalar>& seq,
                                  const Coupling<Scalar>& coupling, Scalar omega) {
  if (!(omega > Scalar(0))) throw DomainError("alpha_single_unit: omega must be positive");
  const auto b = seq.boundaries();
  Complex<Scalar> sum(0);
  Scalar sign(1);
  for (std::size_t j = 0; j + 1 < b.size(); ++j) {
    sum += sign * (std::polar(Scalar(1), omega * b[j + 1]) -
                   std::polar(Scalar(1), omega * b[j]));
    sign = -sign;
  }
  return -(coupling.lambda / (Scalar(2) * omega)) * sum;
}

template <typename Scalar>
Complex<Scalar> alpha_cpmg(const Coupling<Scalar>& coupling, Scalar omega, Scalar tau) {
  if (!(omega > Scalar(0)) || !(tau > Scalar(0)))
    throw DomainError("alpha_cpmg: omega and tau must be positive");
  const Scalar x = omega * tau / Scalar(8);
  const Scalar s = std::sin(x);
  const Scalar mag = Scalar(8) * coupling.lambda / omega * std::cos(x) * s * s * s;
  return Complex<Scalar>(0, mag) * std::polar(Scalar(1), omega * tau / Scalar(2));
}

/// Real Dirichlet ratio sin(N x) / sin(x) with x = omega*tau/2, so that
/// K = exp(i (N-1) x) * dirichlet_ratio. The phase is first reduced to
/// x = m pi + d, |d| <= pi/2, and the ratio evaluated as
/// (-1)^((N-1) m) sin(N d) / sin(d). Uses the l'Hopital limit
/// N cos(N d) / cos(d) where sin(d) vanishes.
template <typename Scalar>
Scalar dirichlet_ratio(std::int64_t n_units, Scalar half_phase) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar m = std::nearbyint(half_phase / pi);
  const Scalar d = half_phase - m * pi;
  const Scalar n = Scalar(n_units);
  const bool odd = std::fmod(std::abs(m), Scalar(2)) == Scalar(1) && n_units % 2 == 0;
  const Scalar sign = odd ? Scalar(-1) : Scalar(1);
  const Scalar s = std::sin(d);
  if (std::abs(s) < Scalar(1e-8)) return sign * n * std::cos(n * d) / std::cos(d);
  return sign * std::sin(n * d) / s;
}

/// K = sum_{n<N} exp(i n omega tau).
template <typename Scalar>
Complex<Scalar> interference_factor(std::int64_t n_units, Scalar omega, Scalar tau) {
  if (n_units < 1) throw DomainError("interference_factor: n_units must be >= 1");
  const Scalar phase = omega * tau;
  const Scalar half = phase / Scalar(2);
  if (std::abs(std::sin(half)) < Scalar(1e-8)) {
    Complex<Scalar> k(0);
    for (std::int64_t n = 0; n < n_units; ++n) k += std::polar(Scalar(1), Scalar(n) * phase);
    return k;
  }
  const Scalar n = Scalar(n_units);
  return dirichlet_ratio(n_units, half) * std::polar(Scalar(1), (n - Scalar(1)) * half);
}

template <typename Scalar>
Complex<Scalar> total_displacement(const ControlSchedule<Scalar>& sched,
                                   const Coupling<Scalar>& coupling, Scalar omega) {
  return alpha_single_unit(sched.sequence, coupling, omega) *
         interference_factor(sched.n_units, omega, sched.sequence.tau());
}

/// |alpha|^2 for N CPMG units, using only real trigonometry. This is the hot
/// path of the likelihood evaluation.
template <typename Scalar>
Scalar displacement_sq_cpmg(std::int64_t n_units, Scalar lambda, Scalar omega, Scalar tau) {
  const Scalar x = omega * tau / Scalar(8);
  const Scalar s = std::sin(x);
  const Scalar a1 = Scalar(8) * lambda / omega * std::cos(x) * s * s * s;
  const Scalar d = dirichlet_ratio(n_units, omega * tau / Scalar(2));
  return a1 * a1 * d * d;
}

/// Fringe label: zeta = N (omega tau / 2 pi - 1).
template <typename Scalar>
Scalar zeta(std::int64_t n_units, Scalar omega, Scalar tau) {
  return Scalar(n_units) * (omega * tau / (Scalar(2) * std::numbers::pi_v<Scalar>) - Scalar(1));
}

// ---------------------------------------------------------------------------
// Qubit coherence and readout

/// L = exp(-2 (2 nbar + 1) |alpha|^2) for a thermal oscillator.
template <typename Scalar>
Scalar coherence_thermal(Complex<Scalar> alpha, const ThermalState<Scalar>& state) {
  return std::exp(-Scalar(2) * (Scalar(2) * state.nbar + Scalar(1)) * std::norm(alpha));
}

/// Leading-order coherence for an arbitrary oscillator state. Only meaningful
/// for sqrt(2 nbar + 1) |alpha| << 1; the raw expansion is returned unclamped.
template <typename Scalar>
Complex<Scalar> coherence_small_alpha(Complex<Scalar> alpha,
                                      const OscillatorMoments<Scalar>& m) {
  const Complex<Scalar> i(0, 1);
  return Scalar(1) + Scalar(4) * i * alpha.imag() * m.b_dag_mean +
         Scalar(4) * (alpha * alpha).real() * m.b_dag_sq_mean -
         Scalar(2) * (Scalar(2) * m.nbar + Scalar(1)) * std::norm(alpha);
}

template <typename Scalar>
struct OutcomeProbabilities {
  Scalar plus;
  Scalar minus;
};

/// P(+-1) = (1 +- L) / 2 for the sigma_x readout. The two values sum to one
/// exactly in floating point.
template <typename Scalar>
OutcomeProbabilities<Scalar> outcome_probability(Scalar coherence_real) {
  constexpr Scalar kSlack = Scalar(1e-12);
  if (!std::isfinite(static_cast<double>(coherence_real)) ||
      std::abs(coherence_real) > Scalar(1) + kSlack)
    throw InvalidCoherenceError("outcome_probability: |L| > 1");
  const Scalar l = std::clamp(coherence_real, Scalar(-1), Scalar(1));
  const Scalar small = (Scalar(1) - std::abs(l)) / Scalar(2);
  const Scalar large = Scalar(1) - small;
  return l >= Scalar(0) ? OutcomeProbabilities<Scalar>{large, small}
                        : OutcomeProbabilities<Scalar>{small, large};
}

}  // namespace qsense
