#include "slowheat/kernels.hpp"

#include <cmath>

#include "slowheat/errors.hpp"
#include "slowheat/quadrature.hpp"

namespace slowheat::kernels {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kSqrt2Pi = 2.5066282746310005024;

// F(v; a) from the header comment.  exp(-z^2) underflows for z > ~27, which
// is the correct limit (no mass reaches that far).
double f_piece(double v, double a) {
  if (v <= 0.0) return 0.0;
  if (a <= 0.0) return v;
  const double z = a / v;
  const double damp = std::exp(-z * z);
  if (damp == 0.0) return 0.0;
  return v * damp * gauss_tail_defect(z);
}

}  // namespace

double heat_kernel(double s, double y) {
  if (!(s > 0.0)) throw validation_error("heat_kernel: s must be positive");
  return std::exp(-y * y / (4.0 * s)) / std::sqrt(4.0 * M_PI * s);
}

double var_h(double t) {
  if (!(t >= 0.0)) throw validation_error("var_h: t must be non-negative");
  return std::sqrt(t / (2.0 * M_PI));
}

double cov_h(double t, double x, double s, double y) {
  if (!(t > 0.0) || !(s > 0.0))
    throw validation_error("cov_h: times must be positive");
  const double a = 0.5 * std::abs(x - y);
  return (f_piece(std::sqrt(t + s), a) -
          f_piece(std::sqrt(std::abs(t - s)), a)) /
         (2.0 * kSqrtPi);
}

double cov_h_temporal(double t, double s) {
  if (!(t > 0.0) || !(s > 0.0))
    throw validation_error("cov_h_temporal: times must be positive");
  return (std::sqrt(t + s) - std::sqrt(std::abs(t - s))) / (2.0 * kSqrtPi);
}

double gauss_tail_defect(double z) {
  if (!(z >= 0.0)) throw validation_error("gauss_tail_defect: z must be >= 0");
  if (z == 0.0) return 1.0;
  if (z < 8.0) return 1.0 - kSqrtPi * z * std::exp(z * z) * std::erfc(z);
  // Tail series g(z) = sum_{n>=1} (-1)^(n+1) (2n-1)!! / (2 z^2)^n.  Terms
  // shrink until n ~ z^2; well past the 1e-18 cutoff for z >= 8.
  const double inv = 1.0 / (2.0 * z * z);
  double term = inv, sum = 0.0;
  for (int n = 1; n <= 40; ++n) {
    sum += term;
    const double next = -term * (2 * n + 1) * inv;
    if (std::abs(next) < 1e-18 * std::abs(sum)) break;
    term = next;
  }
  return sum;
}

double var_h_alpha(double t, double alpha) {
  if (!(t > 0.0)) throw validation_error("var_h_alpha: t must be positive");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw validation_error("var_h_alpha: alpha must lie in (0,1)");
  const double w = std::pow(t, 0.5 * (1.0 - alpha));
  const double root_t = std::sqrt(t);
  const auto integrand = [w](double rho) {
    if (rho <= 0.0) return 1.0;
    return std::erf(w / (M_SQRT2 * rho));
  };
  return quad::integrate(integrand, 0.0, root_t, 1e-14) / kSqrt2Pi;
}

double localization_l2(double t, double alpha) {
  if (!(t > 0.0)) throw validation_error("localization_l2: t must be positive");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw validation_error("localization_l2: alpha must lie in (0,1)");
  const double w = std::pow(t, 0.5 * (1.0 - alpha));
  const double root_t = std::sqrt(t);
  const auto integrand = [w](double rho) {
    if (rho <= 0.0) return 0.0;
    return std::erfc(w / (M_SQRT2 * rho));
  };
  // All-positive integrand: exponentially small results stay positive.
  return quad::integrate(integrand, 0.0, root_t, 1e-14) / kSqrt2Pi;
}

double localization_bound(double t, double alpha) {
  if (!(t > 0.0))
    throw validation_error("localization_bound: t must be positive");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw validation_error("localization_bound: alpha must lie in (0,1)");
  return 2.0 * std::sqrt(t / M_PI) * std::exp(-0.25 / std::pow(t, alpha));
}

double temporal_increment_msq(double t, double eps) {
  if (!(t >= 0.0) || !(eps > 0.0))
    throw validation_error(
        "temporal_increment_msq: need t >= 0 and eps > 0");
  return (std::sqrt(t + eps) + std::sqrt(t)) / kSqrt2Pi -
         (std::sqrt(2.0 * t + eps) - std::sqrt(eps)) / kSqrtPi;
}

}  // namespace slowheat::kernels
