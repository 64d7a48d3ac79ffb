#pragma once

namespace slowheat::kernels {

// Gaussian heat kernel on the line, G_s(y) = exp(-y^2/(4s)) / sqrt(4 pi s).
double heat_kernel(double s, double y);

// Pointwise variance of the linearization field at time t: sqrt(t / (2 pi)).
double var_h(double t);

// Space-time covariance Cov(H(t,x), H(s,y)).  Closed form built from
// F(v; a) = v * exp(-(a/v)^2) * g(a/v) with a = |x-y|/2:
//   cov = (F(sqrt(t+s); a) - F(sqrt(|t-s|); a)) / (2 sqrt(pi)).
double cov_h(double t, double x, double s, double y);

// Same-site covariance Cov(H(t,x), H(s,x)) = (sqrt(t+s) - sqrt(|t-s|)) / (2 sqrt(pi)).
double cov_h_temporal(double t, double s);

// g(z) = 1 - sqrt(pi) * z * exp(z^2) * erfc(z).  Evaluated directly for
// moderate z and by the asymptotic tail series for large z, where the direct
// form loses all precision to cancellation.
double gauss_tail_defect(double z);

// Variance captured by noise within the window |y - x| <= t^((1-alpha)/2):
//   var_h_alpha = (2 pi)^(-1/2) * int_0^sqrt(t) erf(w / (sqrt(2) rho)) drho,
// with w = t^((1-alpha)/2).  Requires t > 0 and 0 < alpha < 1.
double var_h_alpha(double t, double alpha);

// Mean-square error of the window-localized field, i.e. the variance carried
// by noise outside the window.  By independence of the in/out contributions
// this equals var_h(t) - var_h_alpha(t, alpha), but it is evaluated as the
// complementary integral (erfc in place of erf) so that exponentially small
// values come out positive instead of drowning in subtraction noise.
double localization_l2(double t, double alpha);

// Closed-form upper bound for localization_l2: 2 sqrt(t/pi) * exp(-1 / (4 t^alpha)).
double localization_bound(double t, double alpha);

// E |H(t+eps) - H(t)|^2 at a fixed site, simplified from the bilinear
// expansion.  Lies in [sqrt(eps/(2 pi)), sqrt(eps/pi)), increasing in t;
// t = 0 is allowed and reduces to var_h(eps).
double temporal_increment_msq(double t, double eps);

}  // namespace slowheat::kernels
