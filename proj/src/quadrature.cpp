#include "slowheat/quadrature.hpp"

#include <array>
#include <cmath>

#include "slowheat/errors.hpp"

namespace slowheat::quad {

namespace {

constexpr int kOrder = 12;

struct Rule {
  std::array<double, kOrder> node;
  std::array<double, kOrder> weight;
};

// Legendre P_n(x) and its derivative by the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

// Nodes are the roots of P_12, found by Newton from the Chebyshev-like guess;
// weights 2 / ((1-x^2) P'^2).
Rule make_rule() {
  Rule r;
  for (int k = 0; k < kOrder; ++k) {
    double x = std::cos(M_PI * (k + 0.75) / (kOrder + 0.5));
    for (int it = 0; it < 60; ++it) {
      double p, dp;
      legendre(kOrder, x, p, dp);
      const double step = p / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    double p, dp;
    legendre(kOrder, x, p, dp);
    r.node[k] = x;
    r.weight[k] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

const Rule& rule() {
  static const Rule r = make_rule();
  return r;
}

double panel(const std::function<double(double)>& f, double a, double b) {
  const Rule& r = rule();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int k = 0; k < kOrder; ++k)
    acc += r.weight[k] * f(mid + half * r.node[k]);
  return half * acc;
}

double refine(const std::function<double(double)>& f, double a, double b,
              double whole, double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = panel(f, a, mid);
  const double right = panel(f, mid, b);
  const double err = std::abs(left + right - whole);
  if (err <= tol) return left + right;
  if (depth <= 0)
    throw numerical_error("quadrature: interval refinement did not converge");
  return refine(f, a, mid, left, 0.5 * tol, depth - 1) +
         refine(f, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_depth) {
  if (!(abs_tol > 0.0))
    throw validation_error("quadrature: abs_tol must be positive");
  if (a == b) return 0.0;
  const double sign = (a < b) ? 1.0 : -1.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  return sign * refine(f, lo, hi, panel(f, lo, hi), abs_tol, max_depth);
}

}  // namespace slowheat::quad
