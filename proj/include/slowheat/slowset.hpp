#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slowheat/exponent.hpp"
#include "slowheat/spde.hpp"

namespace slowheat::slowset {

struct PointSet {
  std::vector<double> points;  // positions mapped into [0, 1]
  double resolution = 0.0;     // native spacing on the unit interval
};

// Threshold the per-site band statistic: a site is slow iff its statistic is
// <= |sigma(1)| * theta.  Site positions are mapped affinely from the
// analysis interval onto [0, 1]; only interior sites arrive here (the
// simulator never tracks boundary-buffer cells).
PointSet detect_slow(const spde::FieldStats& stats, double theta,
                     double sigma_at_one);

struct SlowSetCensus {
  std::vector<long> counts;  // counts[n] = occupied level-n dyadic intervals
};

// Exact occupancy of dyadic intervals (j 2^-n, (j+1) 2^-n] for n = 0..n_max;
// the point 0 is assigned to the first interval.
SlowSetCensus box_census(const PointSet& set, int n_max);

struct DimensionEstimate {
  double slope = 0.0;      // clamped to [0, 1]
  double slope_raw = 0.0;  // pre-clamp least-squares slope
  double se = 0.0;
  double r_squared = 0.0;
  int n_lo = 0, n_hi = 0;  // level range used
};

// Least-squares slope of log2 counts[n] vs n.  With an explicit level_range
// the fit runs exactly as requested; in auto mode, levels with counts below
// 10 or above half the available boxes are excluded first.
DimensionEstimate dim_fit(
    const SlowSetCensus& census,
    std::optional<std::pair<int, int>> level_range = std::nullopt);

struct DimensionComparison {
  double dim_est = 0.0, dim_se = 0.0;
  double theory = 0.0, theory_se = 0.0;  // 1 - 2 lambda_hat, propagated se
  double gap = 0.0, gap_se = 0.0;
  bool theta_c_known = false;
  bool theta_at_least_theta_c = false;
  std::string note;
};

// Exploratory comparison of the measured box dimension against 1 - 2 lambda.
// Purely a report; asymptotic theory is not certifiable at finite scale.
DimensionComparison dimension_vs_theory(const DimensionEstimate& est,
                                        const exponent::ExponentFit& lam,
                                        std::optional<double> theta_c);

}  // namespace slowheat::slowset
