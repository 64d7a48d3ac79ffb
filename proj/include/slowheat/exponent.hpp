#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slowheat/spde.hpp"

namespace slowheat::exponent {

struct SurvivalRecord {
  double theta = 0.0;
  double ratio = 0.0;    // R; the band is checked on a grid spanning [1, R]
  int grid_density = 0;  // points per octave
  long trials = 0;
  long hits = 0;
  double p_hat = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // Wilson 95%
  bool lower_bound_only = false;    // hits == 0: usable only as a lower bound
};

// Monte-Carlo survival probability of |H(t,0)| <= theta t^(1/4) on the
// geometric grid [1, R] (the law depends only on the ratio, so [1, R] stands
// in for any [a, b] with b/a = R).
SurvivalRecord estimate_survival(double theta, double ratio, int density,
                                 long trials, std::uint64_t master_seed,
                                 std::uint64_t stream);

struct ExponentFit {
  double theta = 0.0;
  double lambda_hat = 0.0;
  double se = 0.0;
  double r_squared = 0.0;
  std::vector<double> ratios_used;
};

// Weighted least squares of log p_hat against -log R over records sharing a
// theta.  Refuses (numerical_error listing the offending R) when any record
// has fewer than 30 hits.
ExponentFit fit_lambda(const std::vector<SurvivalRecord>& records);

struct CurveEntry {
  double theta = 0.0;
  bool fitted = false;
  ExponentFit fit;  // valid iff fitted
  // For refused thetas: best Wilson-based lower bound -log(ci_hi)/log(R).
  double lambda_lower_bound = 0.0;
  std::vector<SurvivalRecord> records;
  std::string note;
};

struct ThetaC {
  bool available = false;
  double value = 0.0;
  double lo = 0.0, hi = 0.0;  // se-propagated bracketing interval
  std::string note;
};

struct CurveChecks {
  bool monotone_ok = true;  // decreasing up to 2 se, all fitted pairs
  bool convex_ok = true;    // divided second differences >= -2 propagated se
  bool all_fitted = true;
  std::vector<std::string> violations;
};

struct ExponentCurve {
  std::vector<CurveEntry> entries;  // ordered by theta
  std::vector<double> ratios;
  int grid_density = 0;
  long trials = 0;
  ThetaC theta_c;
  CurveChecks checks;
};

// Full exponent curve over a theta ladder.  One path batch on [1, max R] is
// reused for every (theta, R) via running prefix maxima of |H|/t^(1/4), so
// p_hat is exactly non-increasing in R and non-decreasing in theta, and the
// whole table costs one ladder of samples.  Records at different R within a
// theta are therefore correlated (documented; the fit treats them as
// independent, which is the usual nested-ladder trade-off).
ExponentCurve lambda_curve(const std::vector<double>& thetas,
                           const std::vector<double>& ratios, int density,
                           long trials, std::uint64_t master_seed,
                           std::uint64_t stream);

// theta_c from a set of (theta, lambda) points: monotone cubic interpolation
// solved at lambda = 1/2, with the se-shifted curves giving the interval.
ThetaC theta_c_from_points(const std::vector<double>& thetas,
                           const std::vector<double>& lambdas,
                           const std::vector<double>& ses);

struct AsymptoticReport {
  bool large_available = false;
  double large_slope = 0.0, large_se = 0.0;  // log lambda vs theta^2
  bool small_available = false;
  double small_slope = 0.0, small_se = 0.0;  // log lambda vs log theta
  std::vector<std::string> notes;
};

// Regime slope report; regimes with fewer than 3 fitted points are reported
// as unavailable (partial report, not an error).
AsymptoticReport asymptotic_check(const ExponentCurve& curve,
                                  double small_theta_max = 0.4,
                                  double large_theta_min = 1.5);

struct SmallballPoint {
  double eps = 0.0;
  double f_value = 0.0;  // f(eps) = eps^q
  double window_lo = 0.0, window_hi = 0.0;
  double dx = 0.0, dt = 0.0;
  long trials = 0;
  long hits = 0;  // nonlinear field band survivals
  double p_hat = 0.0, ci_lo = 0.0, ci_hi = 0.0;
  long gauss_hits = 0;  // same-noise discrete linear field, same geometry
  double gauss_p_hat = 0.0;
};

struct SmallballConfig {
  double theta = 1.0;
  std::vector<double> eps_list;  // each in (0, 1)
  double f_exponent = 0.5;       // q; f(eps) = eps^q with q in (0, 1)
  long trials = 10000;
  spde::SigmaSpec sigma;
  int checkpoint_density = 32;  // per octave across the window
  long bottom_steps = 64;       // window bottom / dt target
  std::uint64_t master_seed = 0;
  std::uint64_t stream = 0;
};

struct SmallballReport {
  double theta = 0.0;
  double f_exponent = 0.0;
  double slope = 0.0, slope_se = 0.0;              // log p vs log f, SPDE side
  double gauss_slope = 0.0, gauss_slope_se = 0.0;  // discrete linear side
  std::vector<SmallballPoint> points;
  std::vector<std::string> warnings;
};

// Nonlinear small-ball survival P{|u(t,0)-1| <= |sigma(1)| theta t^(1/4) on
// [eps f(eps), eps]} estimated by SPDE Monte Carlo per eps, regressed against
// log f(eps).  A discrete linear field evolved on the same noise gives the
// matched-geometry Gaussian slope for side-by-side comparison.
SmallballReport smallball_u(const SmallballConfig& config);

}  // namespace slowheat::exponent
