#include "slowheat/slowset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slowheat/errors.hpp"
#include "slowheat/stats.hpp"

namespace slowheat::slowset {

PointSet detect_slow(const spde::FieldStats& stats, double theta,
                     double sigma_at_one) {
  if (!(theta > 0.0)) throw validation_error("detect_slow: theta must be positive");
  if (sigma_at_one == 0.0)
    throw validation_error("detect_slow: sigma(1) must be nonzero");
  if (stats.positions.size() != stats.stat.size() || stats.positions.empty())
    throw validation_error("detect_slow: malformed field statistics");
  const double x_min = stats.positions.front();
  const double span = stats.positions.back() - x_min;
  const double level = std::abs(sigma_at_one) * theta;
  PointSet set;
  set.resolution = span > 0.0 ? stats.meta.dx / span : 1.0;
  for (std::size_t i = 0; i < stats.positions.size(); ++i)
    if (stats.stat[i] <= level)
      set.points.push_back(span > 0.0 ? (stats.positions[i] - x_min) / span
                                      : 0.0);
  return set;
}

SlowSetCensus box_census(const PointSet& set, int n_max) {
  if (n_max < 0) throw validation_error("box_census: n_max must be >= 0");
  if (!(set.resolution > 0.0))
    throw validation_error("box_census: resolution must be positive");
  if (std::ldexp(1.0, -n_max) < set.resolution * (1.0 - 1e-9))
    throw validation_error(
        "box_census: n_max finer than the set's native resolution");
  for (double p : set.points)
    if (!(p >= 0.0 && p <= 1.0))
      throw validation_error("box_census: points must lie in [0,1]");
  SlowSetCensus census;
  census.counts.assign(std::size_t(n_max) + 1, 0);
  std::vector<long> boxes(set.points.size());
  for (int n = 0; n <= n_max; ++n) {
    const double scale = std::ldexp(1.0, n);
    for (std::size_t i = 0; i < set.points.size(); ++i) {
      long idx = long(std::ceil(set.points[i] * scale)) - 1;
      boxes[i] = std::max<long>(idx, 0);
    }
    std::sort(boxes.begin(), boxes.end());
    census.counts[std::size_t(n)] =
        long(std::unique(boxes.begin(), boxes.end()) - boxes.begin());
  }
  return census;
}

DimensionEstimate dim_fit(const SlowSetCensus& census,
                          std::optional<std::pair<int, int>> level_range) {
  const int n_max = int(census.counts.size()) - 1;
  if (n_max < 0) throw validation_error("dim_fit: empty census");
  int lo = 0, hi = 0;
  std::vector<double> xs, ys;
  if (level_range) {
    lo = level_range->first;
    hi = level_range->second;
    if (lo < 0 || hi > n_max || hi - lo < 1)
      throw validation_error("dim_fit: level range out of bounds");
    for (int n = lo; n <= hi; ++n) {
      xs.push_back(double(n));
      ys.push_back(std::log2(double(std::max<long>(census.counts[std::size_t(n)], 1))));
    }
  } else {
    // Auto mode: drop sparse (< 10) and saturated (> half the boxes) levels.
    for (int n = 0; n <= n_max; ++n) {
      const long c = census.counts[std::size_t(n)];
      if (c < 10) continue;
      if (n >= 1 && double(c) > std::ldexp(1.0, n - 1)) continue;
      if (xs.empty()) lo = n;
      hi = n;
      xs.push_back(double(n));
      ys.push_back(std::log2(double(c)));
    }
    if (xs.size() < 3) {
      std::ostringstream os;
      os << "dim_fit: no admissible level window (counts:";
      for (long c : census.counts) os << " " << c;
      os << "); pass an explicit level range";
      throw numerical_error(os.str());
    }
  }
  const stats::WlsFit fit = stats::ols_line(xs, ys);
  DimensionEstimate est;
  est.slope_raw = fit.slope;
  est.slope = std::clamp(fit.slope, 0.0, 1.0);
  est.se = fit.se_slope;
  est.r_squared = fit.r_squared;
  est.n_lo = lo;
  est.n_hi = hi;
  return est;
}

DimensionComparison dimension_vs_theory(const DimensionEstimate& est,
                                        const exponent::ExponentFit& lam,
                                        std::optional<double> theta_c) {
  DimensionComparison cmp;
  cmp.dim_est = est.slope;
  cmp.dim_se = est.se;
  cmp.theory = 1.0 - 2.0 * lam.lambda_hat;
  cmp.theory_se = 2.0 * lam.se;
  cmp.gap = cmp.dim_est - cmp.theory;
  cmp.gap_se = std::sqrt(cmp.dim_se * cmp.dim_se + cmp.theory_se * cmp.theory_se);
  std::ostringstream os;
  if (theta_c) {
    cmp.theta_c_known = true;
    cmp.theta_at_least_theta_c = lam.theta >= *theta_c;
    if (!cmp.theta_at_least_theta_c)
      os << "theta " << lam.theta << " below theta_c " << *theta_c
         << ": theory predicts an empty slow set at t -> 0; ";
  } else {
    os << "theta_c unavailable; gate check skipped; ";
  }
  if (cmp.theory < 0.0)
    os << "1 - 2 lambda negative (lambda > 1/2): emptiness predicted; ";
  os << "exploratory comparison at finite resolution";
  cmp.note = os.str();
  return cmp;
}

}  // namespace slowheat::slowset
