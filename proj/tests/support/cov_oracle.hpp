#pragma once

// Independent covariance oracle shared by the unit tests and the acceptance
// suite.  Uses adaptive Simpson (a different quadrature family from the
// library's Gauss-Legendre) on the interchanged-integral representation.

#include <algorithm>
#include <cmath>
#include <functional>

#include "slowheat/kernels.hpp"

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double simpson(const std::function<double(double)>& f, double a,
                      double b, double tol = 1e-12) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Covariance by the interchanged-integral representation: the kernel
// semigroup collapses the spatial convolution, leaving
//   cov = int_0^min(t,s) G_{t+s-2u}(x-y) du,
// evaluated after u = min - v^2 so the coincident-point case is smooth.
// Deep-tail covariances are exponentially small (down to ~1e-223 on the
// acceptance grid), where any fixed absolute tolerance accepts a coarse,
// relatively wrong estimate.  The integrand is therefore rescaled by its
// peak so the integration runs at O(1) magnitudes, with a second pass whose
// tolerance is proportional to the first-pass result.
inline double cov_oracle(double t, double x, double s, double y) {
  const double m = std::min(t, s);
  const double d = std::abs(x - y);
  const double base = t + s - 2.0 * m;
  const auto f = [&](double v) {
    const double a = base + 2.0 * v * v;
    if (a == 0.0) return d == 0.0 ? 1.0 / std::sqrt(2.0 * kPi) : 0.0;
    return 2.0 * v * slowheat::kernels::heat_kernel(a, d);
  };
  const double vmax = std::sqrt(m);
  // The mass concentrates toward v = vmax (largest kernel time); a few
  // interior samples guard the diffuse cases.
  const double scale = std::max({f(vmax), f(0.5 * vmax), f(0.25 * vmax)});
  if (!(scale > 0.0) || !std::isfinite(scale)) return 0.0;  // all mass underflows
  const auto g = [&](double v) { return f(v) / scale; };
  const double est = simpson(g, 0.0, vmax, 1e-10 * std::max(vmax, 1e-3));
  const double tol = std::max(2e-12 * std::abs(est), 1e-15 * vmax);
  return scale * simpson(g, 0.0, vmax, tol);
}

}  // namespace oracle
