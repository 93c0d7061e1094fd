#include "quadcatch/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace quadcatch {

namespace {

constexpr double kDegenerateCoeff = 1e-14;
constexpr double kImagTol = 1e-9;

// One Newton step keeps closed-form roots tight after the trig/cbrt round
// trips.
double polish(double c3, double c2, double c1, double c0, double s) {
  for (int i = 0; i < 2; ++i) {
    const double f = ((c3 * s + c2) * s + c1) * s + c0;
    const double df = (3.0 * c3 * s + 2.0 * c2) * s + c1;
    if (df == 0.0 || !std::isfinite(df)) {
      break;
    }
    const double step = f / df;
    if (!std::isfinite(step)) {
      break;
    }
    s -= step;
  }
  return s;
}

int real_quadratic_roots(double a, double b, double c,
                         std::array<double, 3>& roots) {
  if (std::abs(a) < kDegenerateCoeff) {
    if (std::abs(b) < kDegenerateCoeff) {
      return 0;
    }
    roots[0] = -c / b;
    return 1;
  }
  const double disc = b * b - 4.0 * a * c;
  const double scale = b * b + std::abs(4.0 * a * c);
  if (disc < -kImagTol * kImagTol * std::max(1.0, scale)) {
    return 0;
  }
  if (disc <= 0.0) {
    roots[0] = -b / (2.0 * a);
    return 1;
  }
  // Stable form: avoid cancellation between -b and the square root.
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  double r0 = q / a;
  double r1 = (q != 0.0) ? c / q : -b / (2.0 * a);
  if (r0 > r1) {
    std::swap(r0, r1);
  }
  roots[0] = r0;
  roots[1] = r1;
  return 2;
}

}  // namespace

int real_cubic_roots(double c3, double c2, double c1, double c0,
                     std::array<double, 3>& roots) {
  const double scale =
      std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (scale == 0.0 || !std::isfinite(scale)) {
    return 0;
  }
  const double a3 = c3 / scale;
  const double a2 = c2 / scale;
  const double a1 = c1 / scale;
  const double a0 = c0 / scale;

  if (std::abs(a3) < kDegenerateCoeff) {
    return real_quadratic_roots(a2, a1, a0, roots);
  }

  // Depressed cubic s = u - B/3: u^3 + p u + q = 0.
  const double B = a2 / a3;
  const double C = a1 / a3;
  const double D = a0 / a3;
  const double shift = B / 3.0;
  const double p = C - B * B / 3.0;
  const double q = 2.0 * B * B * B / 27.0 - B * C / 3.0 + D;

  const double half_q = 0.5 * q;
  const double third_p = p / 3.0;
  const double disc = half_q * half_q + third_p * third_p * third_p;
  const double disc_scale =
      std::max({1.0, half_q * half_q, std::abs(third_p * third_p * third_p)});
  const double tol = kImagTol * kImagTol * disc_scale;

  int n = 0;
  if (disc > tol) {
    // One real root; pick the larger-magnitude cube root to avoid
    // cancellation, recover the partner from u*v = -p/3.
    const double sq = std::sqrt(disc);
    const double w = -half_q - std::copysign(sq, half_q);
    const double u = std::cbrt(w);
    const double v = (u != 0.0) ? -third_p / u : std::cbrt(-half_q + sq);
    roots[0] = u + v - shift;
    n = 1;
  } else if (disc < -tol) {
    // Three distinct real roots (requires p < 0).
    const double m = 2.0 * std::sqrt(-third_p);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots[n++] = m * std::cos(theta - 2.0 * M_PI * k / 3.0) - shift;
    }
  } else {
    // Repeated roots on the boundary.
    if (std::abs(p) < kDegenerateCoeff) {
      roots[0] = -shift;  // triple root
      n = 1;
    } else {
      roots[0] = 3.0 * q / p - shift;          // simple root
      roots[1] = -3.0 * q / (2.0 * p) - shift; // double root
      n = 2;
    }
  }

  for (int i = 0; i < n; ++i) {
    roots[i] = polish(a3, a2, a1, a0, roots[i]);
  }
  std::sort(roots.begin(), roots.begin() + n);
  return n;
}

}  // namespace quadcatch
