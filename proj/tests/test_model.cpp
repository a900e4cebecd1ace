#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qsense/model.hpp"

using namespace qsense;
using cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// -i (lambda/2) * integral over the whole schedule of f(t) exp(i omega t),
// integrated numerically segment by segment.
cd alpha_by_quadrature(const ControlSchedule<double>& sched, double lambda, double omega) {
  using boost::math::quadrature::gauss_kronrod;
  const auto b = sched.sequence.boundaries();
  const double tau = sched.sequence.tau();
  cd integral(0.0, 0.0);
  for (std::int64_t n = 0; n < sched.n_units; ++n) {
    double sign = 1.0;
    for (std::size_t j = 0; j + 1 < b.size(); ++j) {
      const double lo = static_cast<double>(n) * tau + b[j];
      const double hi = static_cast<double>(n) * tau + b[j + 1];
      const double re = gauss_kronrod<double, 61>::integrate(
          [&](double t) { return std::cos(omega * t); }, lo, hi, 0, 1e-15);
      const double im = gauss_kronrod<double, 61>::integrate(
          [&](double t) { return std::sin(omega * t); }, lo, hi, 0, 1e-15);
      integral += sign * cd(re, im);
      sign = -sign;
    }
  }
  return cd(0.0, -0.5 * lambda) * integral;
}

// <n|D(2 alpha)|n> averaged over thermal occupations, truncated at
// ceil(30 (nbar + 1)) levels.
double thermal_coherence_fock(double alpha_abs, double nbar) {
  const auto dim = static_cast<unsigned>(std::ceil(30.0 * (nbar + 1.0)));
  const double x = 4.0 * alpha_abs * alpha_abs;
  const double ratio = nbar / (nbar + 1.0);
  double p = 1.0 / (nbar + 1.0);
  double sum = 0.0;
  double mass = 0.0;
  for (unsigned n = 0; n < dim; ++n) {
    sum += p * std::laguerre(n, x);
    mass += p;
    p *= ratio;
  }
  REQUIRE(1.0 - mass < 1e-10);
  return std::exp(-0.5 * x) * sum;
}

}  // namespace

TEST_CASE("pulse sequence validation") {
  CHECK_THROWS_AS(PulseSequence<double>(0.0, {}), DomainError);
  CHECK_THROWS_AS(PulseSequence<double>(1.0, {0.5}), DomainError);
  CHECK_THROWS_AS(PulseSequence<double>(1.0, {0.6, 0.4}), DomainError);
  CHECK_THROWS_AS(PulseSequence<double>(1.0, {0.0, 0.5}), DomainError);
  CHECK_THROWS_AS(PulseSequence<double>(1.0, {0.5, 1.0}), DomainError);
  CHECK_NOTHROW(PulseSequence<double>(1.0, {0.1, 0.2, 0.3, 0.9}));
  CHECK_THROWS_AS(ControlSchedule<double>(PulseSequence<double>::cpmg(1.0), 0), DomainError);
  CHECK_THROWS_AS(ThermalState<double>(-1.0), DomainError);
  CHECK_THROWS_AS(Coupling<double>(0.0), DomainError);
  CHECK_THROWS_AS(OscillatorMoments<double>(cd(2.0, 0.0), cd(0.0, 0.0), 1.0), DomainError);
}

TEST_CASE("modulation sign of the cpmg unit") {
  const auto seq = PulseSequence<double>::cpmg(2.0);
  CHECK(modulation_value(seq, 0.0) == 1);
  CHECK(modulation_value(seq, 1.0) == -1);
  CHECK(modulation_value(seq, 1.8) == 1);
  CHECK(modulation_value(seq, 0.5) == -1);
  CHECK_THROWS_AS(modulation_value(seq, 2.0), DomainError);
  CHECK_THROWS_AS(modulation_value(seq, -0.1), DomainError);
}

TEST_CASE("single unit displacement") {
  const Coupling<double> c(0.1);
  const double omega = 50.0;
  const double tau = 2.0 * kPi / omega;

  SUBCASE("free evolution over a full period vanishes") {
    const auto a = alpha_single_unit(PulseSequence<double>::free_evolution(tau), c, omega);
    CHECK(std::abs(a) < 1e-16);
  }
  SUBCASE("cpmg at the resonance") {
    const auto a = alpha_single_unit(PulseSequence<double>::cpmg(tau), c, omega);
    CHECK(a.real() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(a.imag() == doctest::Approx(-0.004).epsilon(1e-12));
    CHECK(std::abs(a) / tau == doctest::Approx(0.1 / kPi).epsilon(1e-12));

    const auto q = alpha_by_quadrature({PulseSequence<double>::cpmg(tau), 1}, 0.1, omega);
    CHECK(std::abs(a - q) < 1e-10 * std::abs(a));
  }
  SUBCASE("domain") {
    CHECK_THROWS_AS(alpha_single_unit(PulseSequence<double>::cpmg(tau), c, 0.0), DomainError);
  }
}

TEST_CASE("cpmg closed form") {
  const Coupling<double> c(0.1);
  const double tau0 = 2.0 * kPi / 50.0;
  const auto a = alpha_cpmg(c, 50.0, tau0);
  CHECK(std::abs(a - cd(0.0, -0.004)) < 1e-15);
  CHECK(std::abs(alpha_cpmg(c, 50.0, 8.0 * kPi / 50.0)) < 1e-15);

  const double tau1 = tau0 * (1.0 + 1.0 / 50.0);
  const auto closed = alpha_cpmg(c, 50.0, tau1);
  const auto general = alpha_single_unit(PulseSequence<double>::cpmg(tau1), c, 50.0);
  CHECK(std::abs(closed - general) <= 1e-12 * std::abs(general));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> w(0.5, 200.0), t(0.01, 2.0), l(0.01, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const Coupling<double> ci(l(rng));
    const double om = w(rng);
    const double ta = t(rng);
    const auto x = alpha_cpmg(ci, om, ta);
    const auto y = alpha_single_unit(PulseSequence<double>::cpmg(ta), ci, om);
    if (std::abs(y) < 1e-8 * ci.lambda / om) continue;  // zero of sin^3
    CHECK(std::abs(x - y) <= 1e-12 * std::abs(y) + 1e-14 * ci.lambda * (ta + 1.0 / om));
  }
}

TEST_CASE("interference factor") {
  CHECK(interference_factor(1, 3.0, 0.7) == cd(1.0, 0.0));
  const double tau = 2.0 * kPi / 50.0;
  const auto k = interference_factor(50, 50.0, tau);
  CHECK(k.real() == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(std::abs(k.imag()) < 1e-9);
  CHECK(std::abs(interference_factor(50, 50.0, tau * (1.0 + 1.0 / 50.0))) < 1e-10);

  SUBCASE("integer zeta nodes") {
    for (int z = -49; z <= 49; ++z) {
      if (z == 0) continue;
      const double t = tau * (1.0 + z / 50.0);
      CHECK(std::abs(interference_factor(50, 50.0, t)) <= 1e-10);
    }
  }
  SUBCASE("closed form matches the direct sum and |K| <= N") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> n(1, 300);
    std::uniform_real_distribution<double> ph(0.0, 40.0);
    for (int i = 0; i < 2000; ++i) {
      const int nu = n(rng);
      const double phase = ph(rng);
      cd direct(0.0, 0.0);
      for (int m = 0; m < nu; ++m) direct += std::polar(1.0, m * phase);
      const auto closed = interference_factor(nu, phase, 1.0);
      CHECK(std::abs(closed - direct) <= 1e-10 * nu);
      CHECK(std::abs(closed) <= nu * (1.0 + 1e-12));
    }
  }
  SUBCASE("near resonance") {
    for (double eps : {0.0, 1e-12, 1e-9, -1e-9}) {
      const auto k2 = interference_factor(40, 2.0 * kPi + eps, 1.0);
      CHECK(std::abs(k2) == doctest::Approx(40.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("total displacement equals the quadrature of the schedule") {
  const Coupling<double> c(0.1);
  SUBCASE("single unit") {
    const ControlSchedule<double> s(PulseSequence<double>::cpmg(0.13), 1);
    CHECK(total_displacement(s, c, 50.0) == alpha_single_unit(s.sequence, c, 50.0));
  }
  SUBCASE("node of K") {
    const double tau = 2.0 * kPi / 50.0 * (1.0 + 1.0 / 50.0);
    const ControlSchedule<double> s(PulseSequence<double>::cpmg(tau), 50);
    CHECK(std::abs(total_displacement(s, c, 50.0)) <= 1e-10 * 0.1 * tau);
  }
  SUBCASE("four units") {
    const ControlSchedule<double> s(PulseSequence<double>::cpmg(0.13), 4);
    const auto a = total_displacement(s, c, 50.0);
    const auto q = alpha_by_quadrature(s, 0.1, 50.0);
    CHECK(std::abs(a - q) <= 1e-9 * std::abs(q));
  }
  SUBCASE("randomized schedules") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> n(1, 100);
    std::uniform_real_distribution<double> ph(1.0, 20.0);
    std::uniform_real_distribution<double> frac(0.05, 0.95);
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
      const double omega = 50.0;
      const double tau = ph(rng) / omega;
      std::vector<double> pulses = {0.25, 0.75};
      if (i % 2 == 1) {
        double f1 = frac(rng), f2 = frac(rng);
        if (f1 > f2) std::swap(f1, f2);
        if (f2 - f1 < 1e-3) continue;
        pulses = {f1, f2};
      }
      const ControlSchedule<double> s(PulseSequence<double>(tau, pulses), n(rng));
      const auto a = total_displacement(s, c, omega);
      const auto q = alpha_by_quadrature(s, 0.1, omega);
      if (std::abs(q) < 1e-9 * 0.1 * s.total_time()) continue;
      CHECK(std::abs(a - q) <= 1e-9 * std::abs(q));
      ++checked;
    }
    CHECK(checked > 150);
  }
}

TEST_CASE("zeta") {
  CHECK(zeta(17, 50.0, 2.0 * kPi / 50.0) == doctest::Approx(0.0));
  CHECK(zeta(50, 50.0, 2.0 * kPi / 50.0 * (1.0 + 1.0 / 50.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(zeta(50, 50.0, 0.12690) == doctest::Approx(50.0 * (50.0 * 0.12690 / (2.0 * kPi) - 1.0)));
}

TEST_CASE("squared displacement fast path") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> t(0.01, 1.0);
  std::uniform_int_distribution<int> n(1, 500);
  const Coupling<double> c(0.3);
  for (int i = 0; i < 500; ++i) {
    const double tau = t(rng);
    const int nu = n(rng);
    const ControlSchedule<double> s(PulseSequence<double>::cpmg(tau), nu);
    const double ref = std::norm(total_displacement(s, c, 50.0));
    const double scale = 0.3 * tau * nu;
    CHECK(std::abs(displacement_sq_cpmg(nu, 0.3, 50.0, tau) - ref) <=
          1e-9 * ref + 1e-13 * scale * scale);
  }
}

TEST_CASE("thermal coherence") {
  const ThermalState<double> hot(10.0);
  CHECK(coherence_thermal(cd(0.0, 0.0), hot) == 1.0);
  const double l = coherence_thermal(cd(0.1, 0.0), hot);
  CHECK(l == doctest::Approx(std::exp(-0.42)).epsilon(1e-14));
  CHECK(l == doctest::Approx(0.6570).epsilon(1e-4));
  CHECK(l == doctest::Approx(thermal_coherence_fock(0.1, 10.0)).epsilon(1e-6));

  for (double nbar : {0.0, 0.5, 3.0, 10.0}) {
    for (double a : {1e-3, 0.05, 0.2, 0.4}) {
      const double fock = thermal_coherence_fock(a, nbar);
      CHECK(std::abs(coherence_thermal(cd(0.0, a), ThermalState<double>(nbar)) - fock) <= 1e-6);
    }
  }

  double prev = 1.0;
  for (double nbar : {0.0, 1.0, 10.0, 100.0, 1000.0}) {
    const double v = coherence_thermal(cd(0.05, 0.02), ThermalState<double>(nbar));
    CHECK(v > 0.0);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("small displacement expansion") {
  const OscillatorMoments<double> diag(cd(0.0, 0.0), cd(0.0, 0.0), 2.0);
  CHECK(coherence_small_alpha(cd(0.0, 0.0), diag) == cd(1.0, 0.0));

  const OscillatorMoments<double> shifted(cd(0.5, 0.0), cd(0.0, 0.0), 1.0);
  const auto v = coherence_small_alpha(cd(0.0, 0.01), shifted);
  CHECK(v.real() == doctest::Approx(0.9994).epsilon(1e-12));
  CHECK(v.imag() == doctest::Approx(0.02).epsilon(1e-12));

  // Diagonal states: expansion differs from the exponential at fourth order.
  double worst = 0.0;
  for (double a = 1e-4; a <= 1e-2; a *= 1.2) {
    const double exact = coherence_thermal(cd(a, 0.0), ThermalState<double>(2.0));
    const auto approx = coherence_small_alpha(cd(a, 0.0), diag);
    CHECK(approx.real() == doctest::Approx(1.0 - 2.0 * 5.0 * a * a).epsilon(1e-14));
    worst = std::max(worst, std::abs(approx.real() - exact) / std::pow(a, 4));
  }
  // 2 (2 nbar + 1)^2 = 50 is the fourth-order coefficient.
  CHECK(worst <= 50.0 * 1.01);
  CHECK(worst >= 50.0 * 0.99);
}

TEST_CASE("outcome probabilities") {
  auto p = outcome_probability(1.0);
  CHECK(p.plus == 1.0);
  CHECK(p.minus == 0.0);
  p = outcome_probability(0.0);
  CHECK(p.plus == 0.5);
  CHECK(p.minus == 0.5);
  p = outcome_probability(0.6570);
  CHECK(p.plus == doctest::Approx(0.8285));
  CHECK(p.minus == doctest::Approx(0.1715));
  CHECK(outcome_probability(1.0 + 5e-13).plus == 1.0);
  CHECK_THROWS_AS(outcome_probability(1.0 + 1e-9), InvalidCoherenceError);
  CHECK_THROWS_AS(outcome_probability(-1.1), InvalidCoherenceError);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const auto q = outcome_probability(u(rng));
    CHECK(q.plus + q.minus == 1.0);
    CHECK(q.plus >= 0.0);
    CHECK(q.minus >= 0.0);
  }
}
