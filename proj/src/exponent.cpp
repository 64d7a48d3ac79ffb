#include "slowheat/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slowheat/errors.hpp"
#include "slowheat/gaussfield.hpp"
#include "slowheat/rng.hpp"
#include "slowheat/stats.hpp"

namespace slowheat::exponent {

namespace {

constexpr long kShardPaths = 4096;

SurvivalRecord make_record(double theta, double ratio, int density,
                           long trials, long hits) {
  SurvivalRecord r;
  r.theta = theta;
  r.ratio = ratio;
  r.grid_density = density;
  r.trials = trials;
  r.hits = hits;
  r.p_hat = double(hits) / double(trials);
  const stats::Interval ci = stats::wilson_ci(hits, trials);
  r.ci_lo = ci.lo;
  r.ci_hi = ci.hi;
  r.lower_bound_only = (hits == 0);
  return r;
}

// Delta-method weight 1/Var(log p) ~ p n / (1 - p), with a half-count guard
// at p = 1 so saturated records keep a finite weight.
double log_p_weight(double p_hat, long trials) {
  double p = p_hat;
  if (p >= 1.0) p = (double(trials) - 0.5) / double(trials);
  return p * double(trials) / (1.0 - p);
}

}  // namespace

SurvivalRecord estimate_survival(double theta, double ratio, int density,
                                 long trials, std::uint64_t master_seed,
                                 std::uint64_t stream) {
  if (!(theta > 0.0))
    throw validation_error("estimate_survival: theta must be positive");
  if (!(ratio >= 1.0))
    throw validation_error("estimate_survival: ratio must be >= 1");
  if (trials < 1)
    throw validation_error("estimate_survival: trials must be >= 1");
  const gaussfield::TimeGrid grid = gaussfield::build_grid(1.0, ratio, density);
  const gaussfield::CovFactor factor = gaussfield::factor_covariance(grid);
  long hits = 0, done = 0, shard = 0;
  while (done < trials) {
    const long n = std::min(kShardPaths, trials - done);
    const gaussfield::PathBatch batch = gaussfield::sample_paths(
        factor, n, master_seed, rng::substream(stream, std::uint64_t(shard)));
    for (std::uint8_t s : gaussfield::survival_indicator(batch, theta))
      hits += s;
    done += n;
    ++shard;
  }
  return make_record(theta, ratio, density, trials, hits);
}

ExponentFit fit_lambda(const std::vector<SurvivalRecord>& records) {
  if (records.size() < 3)
    throw validation_error("fit_lambda: need >= 3 records");
  const double theta = records.front().theta;
  std::vector<long> starved;
  for (const SurvivalRecord& r : records) {
    if (std::abs(r.theta - theta) > 1e-12 * std::max(1.0, std::abs(theta)))
      throw validation_error("fit_lambda: records mix different thetas");
    if (r.hits < 30) starved.push_back(std::lround(r.ratio));
  }
  if (!starved.empty()) {
    std::ostringstream os;
    os << "fit_lambda: refused, fewer than 30 hits at R = {";
    for (std::size_t i = 0; i < starved.size(); ++i)
      os << (i ? "," : "") << starved[i];
    os << "}; increase the trial budget";
    throw numerical_error(os.str());
  }
  std::vector<double> x, y, w;
  for (const SurvivalRecord& r : records) {
    x.push_back(-std::log(r.ratio));
    y.push_back(std::log(r.p_hat));
    w.push_back(log_p_weight(r.p_hat, r.trials));
  }
  const stats::WlsFit line = stats::wls_line(x, y, w);
  ExponentFit f;
  f.theta = theta;
  f.lambda_hat = line.slope;
  f.se = line.se_slope;
  f.r_squared = line.r_squared;
  for (const SurvivalRecord& r : records) f.ratios_used.push_back(r.ratio);
  std::sort(f.ratios_used.begin(), f.ratios_used.end());
  if (!(f.lambda_hat > 0.0))
    throw numerical_error(
        "fit_lambda: fit produced a non-positive exponent; survival does not "
        "decay over this ratio range");
  return f;
}

ThetaC theta_c_from_points(const std::vector<double>& thetas,
                           const std::vector<double>& lambdas,
                           const std::vector<double>& ses) {
  if (thetas.size() != lambdas.size() || thetas.size() != ses.size())
    throw validation_error("theta_c_from_points: size mismatch");
  ThetaC tc;
  if (thetas.size() < 2) {
    tc.note = "fewer than 2 fitted points; no interpolation possible";
    return tc;
  }
  const stats::MonotoneCubic curve(thetas, lambdas);
  const auto hit = curve.solve(0.5);
  if (!hit) {
    const double lmin = *std::min_element(lambdas.begin(), lambdas.end());
    const double lmax = *std::max_element(lambdas.begin(), lambdas.end());
    std::ostringstream os;
    os << "lambda = 1/2 not bracketed: fitted range [" << lmin << ", " << lmax
       << "]";
    tc.note = os.str();
    return tc;
  }
  tc.available = true;
  tc.value = *hit;
  // se-shifted curves bracket the crossing; a shift that no longer brackets
  // collapses to the corresponding data endpoint.
  std::vector<double> down(lambdas), up(lambdas);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    down[i] -= ses[i];
    up[i] += ses[i];
  }
  const auto lo = stats::MonotoneCubic(thetas, down).solve(0.5);
  const auto hi = stats::MonotoneCubic(thetas, up).solve(0.5);
  tc.lo = lo ? *lo : thetas.front();
  tc.hi = hi ? *hi : thetas.back();
  if (tc.lo > tc.hi) std::swap(tc.lo, tc.hi);
  return tc;
}

ExponentCurve lambda_curve(const std::vector<double>& thetas,
                           const std::vector<double>& ratios, int density,
                           long trials, std::uint64_t master_seed,
                           std::uint64_t stream) {
  if (thetas.empty()) throw validation_error("lambda_curve: no thetas");
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (!(thetas[i] > 0.0))
      throw validation_error("lambda_curve: thetas must be positive");
    if (i > 0 && !(thetas[i] > thetas[i - 1]))
      throw validation_error("lambda_curve: thetas must strictly increase");
  }
  if (ratios.empty()) throw validation_error("lambda_curve: no ratios");
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] >= 1.0))
      throw validation_error("lambda_curve: ratios must be >= 1");
    if (i > 0 && !(ratios[i] > ratios[i - 1]))
      throw validation_error("lambda_curve: ratios must strictly increase");
  }
  if (trials < 1) throw validation_error("lambda_curve: trials must be >= 1");

  const gaussfield::TimeGrid grid =
      gaussfield::build_grid(1.0, ratios.back(), density);
  const gaussfield::CovFactor factor = gaussfield::factor_covariance(grid);
  const std::size_t n_pts = grid.times.size();

  // Map each rung to its last grid index; rungs must sit on the ladder grid.
  std::vector<std::size_t> rung_idx;
  for (double r : ratios) {
    std::size_t best = 0;
    for (std::size_t j = 0; j < n_pts; ++j)
      if (std::abs(grid.times[j] - r) < std::abs(grid.times[best] - r))
        best = j;
    if (std::abs(grid.times[best] - r) > 1e-9 * r)
      throw validation_error(
          "lambda_curve: ratio does not land on the ladder grid");
    rung_idx.push_back(best);
  }

  std::vector<double> quarter(n_pts);
  for (std::size_t j = 0; j < n_pts; ++j)
    quarter[j] = std::pow(grid.times[j], 0.25);

  // hits[theta][rung] from one shared prefix-max statistic per path.
  std::vector<std::vector<long>> hits(thetas.size(),
                                      std::vector<long>(ratios.size(), 0));
  std::vector<double> stat(ratios.size());
  long done = 0, shard = 0;
  while (done < trials) {
    const long n = std::min(kShardPaths, trials - done);
    const gaussfield::PathBatch batch = gaussfield::sample_paths(
        factor, n, master_seed, rng::substream(stream, std::uint64_t(shard)));
    for (long i = 0; i < n; ++i) {
      double running = 0.0;
      std::size_t k = 0;
      for (std::size_t j = 0; j < n_pts && k < rung_idx.size(); ++j) {
        running =
            std::max(running, std::abs(batch.values(i, Eigen::Index(j))) /
                                  quarter[j]);
        while (k < rung_idx.size() && rung_idx[k] == j) stat[k++] = running;
      }
      for (std::size_t ti = 0; ti < thetas.size(); ++ti)
        for (std::size_t k2 = 0; k2 < ratios.size(); ++k2)
          hits[ti][k2] += (stat[k2] <= thetas[ti]) ? 1 : 0;
    }
    done += n;
    ++shard;
  }

  ExponentCurve curve;
  curve.ratios = ratios;
  curve.grid_density = density;
  curve.trials = trials;
  for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
    CurveEntry e;
    e.theta = thetas[ti];
    for (std::size_t k = 0; k < ratios.size(); ++k)
      e.records.push_back(
          make_record(thetas[ti], ratios[k], density, trials, hits[ti][k]));
    std::vector<SurvivalRecord> usable;
    std::vector<long> starved;
    for (const SurvivalRecord& r : e.records) {
      if (r.hits >= 30)
        usable.push_back(r);
      else
        starved.push_back(std::lround(r.ratio));
    }
    if (usable.size() >= 3) {
      e.fit = fit_lambda(usable);
      e.fitted = true;
      if (!starved.empty()) {
        std::ostringstream os;
        os << "rungs below 30 hits dropped from fit: R = {";
        for (std::size_t i = 0; i < starved.size(); ++i)
          os << (i ? "," : "") << starved[i];
        os << "}";
        e.note = os.str();
      }
    } else {
      curve.checks.all_fitted = false;
      for (const SurvivalRecord& r : e.records) {
        if (r.ratio <= 1.0 || r.ci_hi >= 1.0) continue;
        e.lambda_lower_bound = std::max(
            e.lambda_lower_bound, -std::log(r.ci_hi) / std::log(r.ratio));
      }
      std::ostringstream os;
      os << "refused: fewer than 3 rungs reach 30 hits at theta = " << e.theta
         << "; exponent lower bound " << e.lambda_lower_bound
         << " from Wilson upper limits; increase the trial budget";
      e.note = os.str();
    }
    curve.entries.push_back(std::move(e));
  }

  // Property checks and theta_c over the fitted subset.
  std::vector<double> ft, fl, fs;
  for (const CurveEntry& e : curve.entries)
    if (e.fitted) {
      ft.push_back(e.theta);
      fl.push_back(e.fit.lambda_hat);
      fs.push_back(e.fit.se);
    }
  for (std::size_t i = 0; i < ft.size(); ++i)
    for (std::size_t j = i + 1; j < ft.size(); ++j)
      if (!(fl[i] > fl[j] - 2.0 * (fs[i] + fs[j]))) {
        curve.checks.monotone_ok = false;
        std::ostringstream os;
        os << "monotonicity violated beyond 2 se between theta " << ft[i]
           << " and " << ft[j];
        curve.checks.violations.push_back(os.str());
      }
  for (std::size_t k = 1; k + 1 < ft.size(); ++k) {
    // Divided second difference (the ladder is not equally spaced).
    const double hl = ft[k] - ft[k - 1], hr = ft[k + 1] - ft[k];
    const double d2 = (fl[k + 1] - fl[k]) / hr - (fl[k] - fl[k - 1]) / hl;
    const double se_prop =
        std::sqrt(fs[k + 1] * fs[k + 1] / (hr * hr) +
                  fs[k] * fs[k] * (1.0 / hr + 1.0 / hl) * (1.0 / hr + 1.0 / hl) +
                  fs[k - 1] * fs[k - 1] / (hl * hl));
    if (!(d2 >= -2.0 * se_prop)) {
      curve.checks.convex_ok = false;
      std::ostringstream os;
      os << "convexity violated beyond 2 se around theta " << ft[k];
      curve.checks.violations.push_back(os.str());
    }
  }
  curve.theta_c = ft.empty() ? ThetaC{} : theta_c_from_points(ft, fl, fs);
  if (ft.empty()) curve.theta_c.note = "no fitted entries";
  return curve;
}

AsymptoticReport asymptotic_check(const ExponentCurve& curve,
                                  double small_theta_max,
                                  double large_theta_min) {
  AsymptoticReport rep;
  std::vector<double> sx, sy, sw, lx, ly, lw;
  for (const CurveEntry& e : curve.entries) {
    if (!e.fitted) continue;
    const double rel = e.fit.se / e.fit.lambda_hat;  // se of log lambda
    const double w = (rel > 0.0) ? 1.0 / (rel * rel) : 1e12;
    if (e.theta <= small_theta_max) {
      sx.push_back(std::log(e.theta));
      sy.push_back(std::log(e.fit.lambda_hat));
      sw.push_back(w);
    }
    if (e.theta >= large_theta_min) {
      lx.push_back(e.theta * e.theta);
      ly.push_back(std::log(e.fit.lambda_hat));
      lw.push_back(w);
    }
  }
  if (sx.size() >= 3) {
    const stats::WlsFit f = stats::wls_line(sx, sy, sw);
    rep.small_available = true;
    rep.small_slope = f.slope;
    rep.small_se = f.se_slope;
  } else {
    std::ostringstream os;
    os << "small-theta regime (theta <= " << small_theta_max << ") has "
       << sx.size() << " fitted points; need 3 — partial report";
    rep.notes.push_back(os.str());
  }
  if (lx.size() >= 3) {
    const stats::WlsFit f = stats::wls_line(lx, ly, lw);
    rep.large_available = true;
    rep.large_slope = f.slope;
    rep.large_se = f.se_slope;
  } else {
    std::ostringstream os;
    os << "large-theta regime (theta >= " << large_theta_min << ") has "
       << lx.size() << " fitted points; need 3 — partial report";
    rep.notes.push_back(os.str());
  }
  return rep;
}

namespace {

// Largest even power of two <= target (even exponent, so sqrt is a power of
// two and dx = 2 sqrt(dt) keeps cfl exactly 1/4 on a dyadic mesh).
double floor_pow4(double target) {
  int k = int(std::floor(std::log2(target)));
  while (std::ldexp(1.0, k + 1) <= target) ++k;
  while (std::ldexp(1.0, k) > target) --k;
  if (k % 2 != 0) --k;
  return std::ldexp(1.0, k);
}

}  // namespace

SmallballReport smallball_u(const SmallballConfig& config) {
  if (!(config.theta > 0.0))
    throw validation_error("smallball_u: theta must be positive");
  if (!(config.f_exponent > 0.0 && config.f_exponent < 1.0))
    throw validation_error("smallball_u: f exponent must lie in (0,1)");
  if (config.eps_list.empty())
    throw validation_error("smallball_u: eps list empty");
  for (double e : config.eps_list)
    if (!(e > 0.0 && e < 1.0))
      throw validation_error("smallball_u: eps must lie in (0,1)");
  if (config.trials < 1)
    throw validation_error("smallball_u: trials must be >= 1");
  if (config.checkpoint_density < 1 || config.bottom_steps < 2)
    throw validation_error("smallball_u: invalid discretization knobs");
  config.sigma.validate();

  SmallballReport rep;
  rep.theta = config.theta;
  rep.f_exponent = config.f_exponent;
  const double s1 = std::abs(config.sigma.sigma_at_one);
  const spde::SigmaSpec unit = spde::SigmaSpec::constant(1.0);

  for (std::size_t ie = 0; ie < config.eps_list.size(); ++ie) {
    const double eps = config.eps_list[ie];
    const double f_val = std::pow(eps, config.f_exponent);
    const double lo = eps * f_val, hi = eps;

    const double dt = floor_pow4(lo / double(config.bottom_steps));
    const double root_dt = std::sqrt(dt);
    const double dx = 2.0 * root_dt;
    const long n_half = long(std::ceil(4.0 * std::sqrt(hi) / dx - 1e-12));
    const double half_width = double(n_half) * dx;

    spde::SpdeConfig sc;
    sc.half_width = half_width;
    sc.dx = dx;
    sc.dt = dt;
    sc.horizon = hi;
    sc.sigma = config.sigma;
    sc.checkpoints = gaussfield::build_grid(lo, hi, config.checkpoint_density).times;
    sc.master_seed = config.master_seed;
    sc.stream = config.stream;
    sc.validate();
    const spde::CheckpointPlan plan = plan_checkpoints(sc);

    std::vector<double> band_u(plan.times.size()), band_h(plan.times.size());
    for (std::size_t k = 0; k < plan.times.size(); ++k) {
      const double q = std::pow(plan.times[k], 0.25);
      band_u[k] = s1 * config.theta * q;
      band_h[k] = config.theta * q;
    }

    const long n_cells = 2 * n_half;
    const std::size_t center = std::size_t(n_half);
    const double cfl = sc.cfl();
    const double amp = std::sqrt(dt / dx);
    const std::uint64_t eps_stream =
        rng::substream(config.stream, std::uint64_t(ie));

    std::vector<double> u(std::size_t(n_cells) + 1), un(u);
    std::vector<double> h(std::size_t(n_cells) + 1), hn(h);
    std::vector<double> noise(std::size_t(n_cells) - 1);

    long hits_u = 0, hits_h = 0;
    const long last_step = plan.steps.back();
    for (long trial = 0; trial < config.trials; ++trial) {
      std::fill(u.begin(), u.end(), 1.0);
      std::fill(h.begin(), h.end(), 0.0);
      rng::NormalStream ns(config.master_seed,
                           rng::substream(eps_stream, std::uint64_t(trial)));
      bool alive_u = true, alive_h = true;
      std::size_t next_ck = 0;
      for (long step = 1; step <= last_step; ++step) {
        ns.fill(noise.data(), noise.size());
        spde::step_field_into(u, un, noise, cfl, amp, config.sigma);
        spde::step_field_into(h, hn, noise, cfl, amp, unit);
        u.swap(un);
        h.swap(hn);
        if ((step & 255) == 0 && !std::isfinite(u[center] + h[center]))
          throw numerical_error("smallball_u: non-finite field at step " +
                                std::to_string(step));
        if (next_ck < plan.steps.size() && step == plan.steps[next_ck]) {
          alive_u = alive_u &&
                    std::abs(u[center] - 1.0) <= band_u[next_ck];
          alive_h = alive_h && std::abs(h[center]) <= band_h[next_ck];
          if (!alive_u && !alive_h) break;
          ++next_ck;
        }
      }
      hits_u += alive_u ? 1 : 0;
      hits_h += alive_h ? 1 : 0;
    }

    SmallballPoint p;
    p.eps = eps;
    p.f_value = f_val;
    p.window_lo = plan.times.front();
    p.window_hi = plan.times.back();
    p.dx = dx;
    p.dt = dt;
    p.trials = config.trials;
    p.hits = hits_u;
    p.p_hat = double(hits_u) / double(config.trials);
    const stats::Interval ci = stats::wilson_ci(hits_u, config.trials);
    p.ci_lo = ci.lo;
    p.ci_hi = ci.hi;
    p.gauss_hits = hits_h;
    p.gauss_p_hat = double(hits_h) / double(config.trials);
    rep.points.push_back(p);
  }

  // log p vs log f regressions; zero-hit points dropped with a warning.
  std::vector<double> x, yu, wu, yh, wh, xh;
  for (const SmallballPoint& p : rep.points) {
    if (p.hits > 0) {
      x.push_back(std::log(p.f_value));
      yu.push_back(std::log(p.p_hat));
      wu.push_back(log_p_weight(p.p_hat, p.trials));
    } else {
      std::ostringstream os;
      os << "eps = " << p.eps << ": zero hits; dropped from the regression";
      rep.warnings.push_back(os.str());
    }
    if (p.gauss_hits > 0) {
      xh.push_back(std::log(p.f_value));
      yh.push_back(std::log(p.gauss_p_hat));
      wh.push_back(log_p_weight(p.gauss_p_hat, p.trials));
    }
  }
  if (x.size() >= 2) {
    const stats::WlsFit f = stats::wls_line(x, yu, wu);
    rep.slope = f.slope;
    rep.slope_se = f.se_slope;
  } else {
    rep.warnings.push_back("fewer than 2 usable eps; no nonlinear slope");
  }
  if (xh.size() >= 2) {
    const stats::WlsFit f = stats::wls_line(xh, yh, wh);
    rep.gauss_slope = f.slope;
    rep.gauss_slope_se = f.se_slope;
  } else {
    rep.warnings.push_back("fewer than 2 usable eps; no gaussian slope");
  }
  return rep;
}

}  // namespace slowheat::exponent
