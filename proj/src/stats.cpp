#include "slowheat/stats.hpp"

#include <algorithm>
#include <cmath>

#include "slowheat/errors.hpp"

namespace slowheat::stats {

Interval wilson_ci(long hits, long trials, double z) {
  if (trials <= 0) throw validation_error("wilson_ci: trials must be positive");
  if (hits < 0 || hits > trials)
    throw validation_error("wilson_ci: hits out of range");
  const double n = double(trials), p = double(hits) / n, z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // center - half is exactly 0 at hits = 0 (likewise 1 at hits = trials);
  // snap the edges so rounding residue cannot leak outside [0, 1].
  const double lo = hits == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = hits == trials ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

WlsFit wls_line(const std::vector<double>& x, const std::vector<double>& y,
                const std::vector<double>& w) {
  if (x.size() != y.size() || x.size() != w.size())
    throw validation_error("wls_line: size mismatch");
  if (x.size() < 2) throw validation_error("wls_line: need at least 2 points");
  double sw = 0.0, swx = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(w[i] > 0.0)) throw validation_error("wls_line: weights must be positive");
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
  }
  const double xbar = swx / sw, ybar = swy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - xbar;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * (y[i] - ybar);
  }
  if (!(sxx > 0.0)) throw validation_error("wls_line: degenerate abscissae");
  WlsFit f;
  f.n = x.size();
  f.slope = sxy / sxx;
  f.intercept = ybar - f.slope * xbar;
  f.se_slope = 1.0 / std::sqrt(sxx);
  f.se_intercept = std::sqrt(1.0 / sw + xbar * xbar / sxx);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double fit = f.intercept + f.slope * x[i];
    ss_res += w[i] * (y[i] - fit) * (y[i] - fit);
    ss_tot += w[i] * (y[i] - ybar) * (y[i] - ybar);
  }
  f.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

WlsFit ols_line(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> w(x.size(), 1.0);
  WlsFit f = wls_line(x, y, w);
  // Rescale standard errors by the residual standard deviation.
  if (x.size() > 2) {
    double xbar = mean(x), ss_res = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      ss_res += r * r;
      sxx += (x[i] - xbar) * (x[i] - xbar);
    }
    const double s2 = ss_res / double(x.size() - 2);
    f.se_slope = std::sqrt(s2 / sxx);
    f.se_intercept =
        std::sqrt(s2 * (1.0 / double(x.size()) + xbar * xbar / sxx));
  }
  return f;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n)
    throw validation_error("MonotoneCubic: need matching arrays, size >= 2");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1]))
      throw validation_error("MonotoneCubic: abscissae must increase");
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  d_.assign(n, 0.0);
  d_[0] = delta[0];
  d_[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      d_[i] = 0.0;
    } else {
      // Weighted harmonic mean of adjacent secants (Fritsch-Carlson).
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  // Endpoint clamp to keep the first/last segments monotone.
  for (std::size_t i : {std::size_t(0), n - 1}) {
    const double del = delta[std::min(i, n - 2)];
    if (del == 0.0)
      d_[i] = 0.0;
    else if (d_[i] / del < 0.0)
      d_[i] = 0.0;
    else if (std::abs(d_[i]) > 3.0 * std::abs(del))
      d_[i] = 3.0 * del;
  }
}

double MonotoneCubic::operator()(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i = std::size_t(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i], s = (x - x_[i]) / h;
  const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = s * s * (s - 1.0);
  return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
}

std::optional<double> MonotoneCubic::solve(double target) const {
  for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
    const double f0 = y_[i] - target, f1 = y_[i + 1] - target;
    if (f0 == 0.0) return x_[i];
    if (f0 * f1 > 0.0) continue;
    double lo = x_[i], hi = x_[i + 1];
    const bool rising = f1 > f0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = (*this)(mid)-target;
      if ((fm < 0.0) == rising)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }
  if (y_.back() == target) return x_.back();
  return std::nullopt;
}

BatchStat batch_se(const std::vector<double>& values, std::size_t n_batches) {
  if (values.empty()) throw validation_error("batch_se: empty input");
  if (n_batches < 2 || n_batches > values.size())
    throw validation_error("batch_se: need 2 <= n_batches <= n values");
  const std::size_t per = values.size() / n_batches;
  std::vector<double> bm;
  bm.reserve(n_batches);
  // Trailing remainder (< one batch) is dropped.
  for (std::size_t b = 0; b < n_batches; ++b) {
    double acc = 0.0;
    for (std::size_t i = b * per; i < (b + 1) * per; ++i) acc += values[i];
    bm.push_back(acc / double(per));
  }
  BatchStat s;
  s.n_batches = n_batches;
  s.mean = mean(bm);
  s.se = std::sqrt(sample_variance(bm) / double(n_batches));
  return s;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw validation_error("mean: empty input");
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / double(v.size());
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) throw validation_error("sample_variance: need >= 2 values");
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / double(v.size() - 1);
}

}  // namespace slowheat::stats
