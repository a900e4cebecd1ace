#pragma once

#include <array>
#include <cmath>
#include <span>
#include <utility>

namespace qsense {

namespace detail {

// Kronrod 15-point abscissae on [-1, 1] (non-negative half) with the
// embedded Gauss 7-point rule at odd indices.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
std::pair<double, double> gauss_kronrod_15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double fsum = f(c - dx) + f(c + dx);
    kronrod += kWgk[j] * fsum;
    if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
  }
  return {kronrod * h, std::abs((kronrod - gauss) * h)};
}

template <typename F>
double adaptive_gk(F& f, double a, double b, double tol, int depth) {
  const auto [value, err] = gauss_kronrod_15(f, a, b);
  if (err <= tol || depth <= 0) return value;
  const double m = 0.5 * (a + b);
  return adaptive_gk(f, a, m, 0.5 * tol, depth - 1) + adaptive_gk(f, m, b, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (7/15) integral of f over [a, b] to an absolute
/// tolerance, first split at the given interior breakpoints.
template <typename F>
double integrate(F f, double a, double b, double abs_tol, std::span<const double> breakpoints = {}) {
  double total = 0.0;
  double left = a;
  const double width = b - a;
  auto piece = [&](double lo, double hi) {
    if (hi <= lo) return;
    total += detail::adaptive_gk(f, lo, hi, abs_tol * (hi - lo) / width, 30);
  };
  for (double p : breakpoints) {
    if (p <= left || p >= b) continue;
    piece(left, p);
    left = p;
  }
  piece(left, b);
  return total;
}

}  // namespace qsense
