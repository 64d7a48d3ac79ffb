#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace slowheat::stats {

struct Interval {
  double lo = 0.0, hi = 0.0;
};

// Wilson score interval for a binomial proportion.  Behaves sensibly at
// hits = 0 and hits = trials, unlike the Wald interval.
Interval wilson_ci(long hits, long trials, double z = 1.959963984540054);

struct WlsFit {
  double intercept = 0.0, slope = 0.0;
  double se_intercept = 0.0, se_slope = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

// Weighted least squares line y ~ a + b x with known per-point weights
// (inverse variances).  Standard errors come from the weight matrix alone,
// not from the residual scale, matching the known-variance setting.
WlsFit wls_line(const std::vector<double>& x, const std::vector<double>& y,
                const std::vector<double>& w);

// Ordinary least squares convenience wrapper (unit weights, standard errors
// scaled by residual variance).
WlsFit ols_line(const std::vector<double>& x, const std::vector<double>& y);

// Monotone cubic interpolant (Fritsch-Carlson slopes).  Preserves
// monotonicity of the data, which keeps root-finding on the interpolant
// well-posed.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;

  // Smallest abscissa where the interpolant crosses `target`, found by
  // bisection on the bracketing segment.  Empty if no segment brackets it.
  std::optional<double> solve(double target) const;

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }

 private:
  std::vector<double> x_, y_, d_;  // data and endpoint slopes
};

struct BatchStat {
  double mean = 0.0, se = 0.0;
  std::size_t n_batches = 0;
};

// Mean and standard error of a statistic estimated from per-replica values,
// via non-overlapping batch means.
BatchStat batch_se(const std::vector<double>& values, std::size_t n_batches);

double mean(const std::vector<double>& v);
double sample_variance(const std::vector<double>& v);

}  // namespace slowheat::stats
