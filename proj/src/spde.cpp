#include "slowheat/spde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slowheat/errors.hpp"
#include "slowheat/rng.hpp"
#include "slowheat/stats.hpp"

namespace slowheat::spde {

SigmaSpec SigmaSpec::constant(double c) {
  SigmaSpec s;
  s.kind = Kind::constant;
  s.a = c;
  s.lipschitz = 0.0;
  s.bound = std::abs(c);
  s.sigma_at_one = c;
  return s;
}

SigmaSpec SigmaSpec::linear(double slope, double intercept) {
  SigmaSpec s;
  s.kind = Kind::linear;
  s.a = slope;
  s.b = intercept;
  s.lipschitz = std::abs(slope);
  s.bound = std::nullopt;
  s.sigma_at_one = slope + intercept;
  return s;
}

SigmaSpec SigmaSpec::bounded_sin(double amplitude, double frequency) {
  SigmaSpec s;
  s.kind = Kind::bounded_sin;
  s.a = amplitude;
  s.b = frequency;
  s.lipschitz = std::abs(amplitude * frequency);
  s.bound = std::abs(amplitude);
  s.sigma_at_one = amplitude * std::sin(frequency);
  return s;
}

SigmaSpec SigmaSpec::clamped(const SigmaSpec& base, double lo, double hi) {
  if (base.kind == Kind::clamped)
    throw validation_error("SigmaSpec: clamped base must be a simple catalog entry");
  if (!(lo < hi)) throw validation_error("SigmaSpec: clamp range must be non-empty");
  SigmaSpec s = base;
  s.kind = Kind::clamped;
  s.base = base.kind;
  s.clamp_lo = lo;
  s.clamp_hi = hi;
  // Frozen outside [lo, hi], so the range is the base range over the closed
  // interval; for the monotone entries the sup sits at an endpoint.
  switch (base.kind) {
    case Kind::constant:
      s.bound = std::abs(base.a);
      break;
    case Kind::linear:
      s.bound = std::max(std::abs(base(lo)), std::abs(base(hi)));
      break;
    case Kind::bounded_sin:
      s.bound = std::abs(base.a);  // conservative; exact sup not needed
      break;
    default:
      break;
  }
  s.sigma_at_one = base(std::clamp(1.0, lo, hi));
  return s;
}

double SigmaSpec::operator()(double x) const {
  switch (kind) {
    case Kind::constant:
      return a;
    case Kind::linear:
      return a * x + b;
    case Kind::bounded_sin:
      return a * std::sin(b * x);
    case Kind::clamped: {
      const double xc = std::clamp(x, clamp_lo, clamp_hi);
      switch (base) {
        case Kind::constant:
          return a;
        case Kind::linear:
          return a * xc + b;
        case Kind::bounded_sin:
          return a * std::sin(b * xc);
        default:
          throw validation_error("SigmaSpec: invalid clamped base");
      }
    }
  }
  throw validation_error("SigmaSpec: invalid kind");
}

SigmaSpec SigmaSpec::truncated() const {
  if (kind == Kind::clamped) {
    SigmaSpec s = *this;
    s.clamp_lo = std::max(clamp_lo, -2.0);
    s.clamp_hi = std::min(clamp_hi, 2.0);
    return s;
  }
  return clamped(*this, -2.0, 2.0);
}

void SigmaSpec::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw validation_error("SigmaSpec: non-finite parameters");
  if (sigma_at_one == 0.0)
    throw validation_error("SigmaSpec: sigma(1) must be nonzero");
  if (kind == Kind::clamped && !(clamp_lo < clamp_hi))
    throw validation_error("SigmaSpec: clamp range must be non-empty");
}

std::string SigmaSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::constant:
      os << "constant(" << a << ")";
      break;
    case Kind::linear:
      os << "linear(" << a << "," << b << ")";
      break;
    case Kind::bounded_sin:
      os << "bounded_sin(" << a << "," << b << ")";
      break;
    case Kind::clamped: {
      SigmaSpec inner = *this;
      inner.kind = base;
      os << "clamped(" << inner.describe() << "," << clamp_lo << "," << clamp_hi
         << ")";
      break;
    }
  }
  return os.str();
}

double SpdeConfig::default_dt(double dx) {
  if (!(dx > 0.0)) throw validation_error("default_dt: dx must be positive");
  int e = 0;
  std::frexp(dx * dx / 4.0, &e);  // mantissa in [0.5, 1)
  return std::ldexp(1.0, e - 1);
}

namespace {

long cell_count(const SpdeConfig& config) {
  const double n_real = 2.0 * config.half_width / config.dx;
  return std::lround(n_real);
}

}  // namespace

void SpdeConfig::validate() const {
  if (!(dx > 0.0)) throw validation_error("SpdeConfig: dx must be positive");
  if (!(dt > 0.0)) throw validation_error("SpdeConfig: dt must be positive");
  if (!(horizon > 0.0))
    throw validation_error("SpdeConfig: horizon must be positive");
  if (!(half_width > 0.0))
    throw validation_error("SpdeConfig: half_width must be positive");
  if (dt > dx * dx / 4.0 * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "SpdeConfig: stability requires dt <= dx^2/4, got dt/dx^2 = "
       << dt / (dx * dx);
    throw validation_error(os.str());
  }
  const double n_real = 2.0 * half_width / dx;
  const long n = std::lround(n_real);
  if (std::abs(n_real - double(n)) > 1e-9 * std::max(1.0, n_real) || n < 4 ||
      n % 2 != 0)
    throw validation_error(
        "SpdeConfig: 2*half_width/dx must be an even integer >= 4");
  if (!(analysis_half_width >= 0.0) || analysis_half_width >= half_width)
    throw validation_error(
        "SpdeConfig: analysis_half_width must lie in [0, half_width)");
  sigma.validate();
  if (localized_analysis &&
      !(localization_alpha > 0.0 && localization_alpha < 1.0))
    throw validation_error("SpdeConfig: localization_alpha must lie in (0,1)");
  double buffer = 4.0 * std::sqrt(horizon);
  if (localized_analysis)
    buffer = 3.0 * std::sqrt(horizon) +
             std::pow(horizon, 0.5 * (1.0 - localization_alpha));
  if (half_width < analysis_half_width + buffer - 1e-12) {
    std::ostringstream os;
    os << "SpdeConfig: half_width " << half_width
       << " too small for boundary buffer; need >= "
       << analysis_half_width + buffer;
    throw validation_error(os.str());
  }
  if (checkpoints.empty())
    throw validation_error("SpdeConfig: need at least one checkpoint");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (!(checkpoints[i] > 0.0) ||
        checkpoints[i] > horizon * (1.0 + 1e-12))
      throw validation_error("SpdeConfig: checkpoints must lie in (0, horizon]");
    if (i > 0 && !(checkpoints[i] > checkpoints[i - 1]))
      throw validation_error("SpdeConfig: checkpoints must strictly increase");
  }
}

CheckpointPlan plan_checkpoints(const SpdeConfig& config) {
  CheckpointPlan plan;
  const long max_step = long(config.horizon / config.dt * (1.0 + 1e-12));
  for (double c : config.checkpoints) {
    long s = std::lround(c / config.dt);
    s = std::clamp<long>(s, 1, std::max<long>(max_step, 1));
    plan.steps.push_back(s);
    plan.times.push_back(double(s) * config.dt);
    plan.snap_err.push_back(std::abs(c - double(s) * config.dt));
  }
  for (std::size_t i = 1; i < plan.steps.size(); ++i)
    if (plan.steps[i] <= plan.steps[i - 1])
      throw validation_error(
          "plan_checkpoints: checkpoints collide after snapping to dt");
  return plan;
}

namespace {

template <class S>
void advance(const std::vector<double>& f, std::vector<double>& out,
             const double* noise, double cfl, double amp, const S& s) {
  const std::size_t n = f.size();
  for (std::size_t j = 1; j + 1 < n; ++j)
    out[j] = f[j] + cfl * (f[j + 1] - 2.0 * f[j] + f[j - 1]) +
             s(f[j]) * (amp * noise[j - 1]);
  out.front() = f.front();
  out.back() = f.back();
}

void advance_sigma(const SigmaSpec& spec, const std::vector<double>& f,
                   std::vector<double>& out, const double* noise, double cfl,
                   double amp) {
  const double a = spec.a, b = spec.b;
  const double lo = spec.clamp_lo, hi = spec.clamp_hi;
  const SigmaSpec::Kind eff =
      spec.kind == SigmaSpec::Kind::clamped ? spec.base : spec.kind;
  const bool clamp = spec.kind == SigmaSpec::Kind::clamped;
  switch (eff) {
    case SigmaSpec::Kind::constant:
      advance(f, out, noise, cfl, amp, [a](double) { return a; });
      return;
    case SigmaSpec::Kind::linear:
      if (clamp)
        advance(f, out, noise, cfl, amp,
                [a, b, lo, hi](double x) { return a * std::clamp(x, lo, hi) + b; });
      else
        advance(f, out, noise, cfl, amp, [a, b](double x) { return a * x + b; });
      return;
    case SigmaSpec::Kind::bounded_sin:
      if (clamp)
        advance(f, out, noise, cfl, amp, [a, b, lo, hi](double x) {
          return a * std::sin(b * std::clamp(x, lo, hi));
        });
      else
        advance(f, out, noise, cfl, amp,
                [a, b](double x) { return a * std::sin(b * x); });
      return;
    default:
      throw validation_error("advance_sigma: invalid catalog entry");
  }
}

void advance_unit(const std::vector<double>& f, std::vector<double>& out,
                  const double* noise, double cfl, double amp) {
  advance(f, out, noise, cfl, amp, [](double) { return 1.0; });
}

void check_finite(const std::vector<double>& f, long step, const char* name) {
  for (double v : f)
    if (!std::isfinite(v))
      throw numerical_error(std::string("spde: non-finite value in field ") +
                            name + " at step " + std::to_string(step));
}

std::vector<std::size_t> tracked_indices(const SpdeConfig& config,
                                         long n_cells,
                                         std::vector<double>* positions) {
  const std::size_t center = std::size_t(n_cells / 2);
  const long k_max = std::lround(config.analysis_half_width / config.dx);
  std::vector<std::size_t> idx;
  for (long k = -k_max; k <= k_max; ++k) {
    const long j = long(center) + k;
    if (j < 1 || j >= n_cells) continue;  // boundary cells never tracked
    idx.push_back(std::size_t(j));
    if (positions)
      positions->push_back(-config.half_width + double(j) * config.dx);
  }
  return idx;
}

}  // namespace

std::vector<double> step_field(const std::vector<double>& f,
                               const std::vector<double>& noise, double cfl,
                               double amp, const SigmaSpec& sigma) {
  if (f.size() < 3) throw validation_error("step_field: need >= 3 cells");
  if (!(cfl > 0.0) || cfl > 0.25 * (1.0 + 1e-12))
    throw validation_error("step_field: stability requires cfl in (0, 1/4]");
  std::vector<double> out(f.size());
  step_field_into(f, out, noise, cfl, amp, sigma);
  return out;
}

void step_field_into(const std::vector<double>& f, std::vector<double>& out,
                     const std::vector<double>& noise, double cfl, double amp,
                     const SigmaSpec& sigma) {
  if (noise.size() + 2 != f.size() || out.size() != f.size())
    throw validation_error("step_field_into: buffer size mismatch");
  advance_sigma(sigma, f, out, noise.data(), cfl, amp);
}

std::size_t CoupledRun::center_site() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < site_positions.size(); ++i)
    if (std::abs(site_positions[i]) < std::abs(site_positions[best])) best = i;
  return best;
}

CoupledRun run_coupled(const SpdeConfig& config) {
  config.validate();
  const CheckpointPlan plan = plan_checkpoints(config);
  const long n_cells = cell_count(config);
  const std::size_t center = std::size_t(n_cells / 2);

  CoupledRun run;
  run.meta = {config.dx,      config.dt,
              config.horizon, config.half_width,
              config.sigma.sigma_at_one,
              config.sigma.bound.has_value()};
  const std::vector<std::size_t> tracked =
      tracked_indices(config, n_cells, &run.site_positions);
  run.times = plan.times;
  run.snap_err = plan.snap_err;
  const std::size_t n_ck = plan.steps.size();
  run.u.reserve(n_ck * tracked.size());
  run.ubar.reserve(n_ck * tracked.size());
  run.h.reserve(n_ck * tracked.size());
  run.lin_err.reserve(n_ck * tracked.size());

  const SigmaSpec sig_bar = config.sigma.truncated();
  const double cfl = config.cfl();
  const double amp = std::sqrt(config.dt / config.dx);
  const double s1 = config.sigma.sigma_at_one;

  std::vector<double> u(std::size_t(n_cells) + 1, 1.0), un(u);
  std::vector<double> ub(std::size_t(n_cells) + 1, 1.0), ubn(ub);
  std::vector<double> h(std::size_t(n_cells) + 1, 0.0), hn(h);
  std::vector<double> noise(std::size_t(n_cells) - 1);
  rng::NormalStream ns(config.master_seed, config.stream);

  double run_sup = 0.0;
  std::size_t next_ck = 0;
  const long last_step = plan.steps.back();
  for (long step = 1; step <= last_step; ++step) {
    ns.fill(noise.data(), noise.size());
    advance_sigma(config.sigma, u, un, noise.data(), cfl, amp);
    advance_sigma(sig_bar, ub, ubn, noise.data(), cfl, amp);
    advance_unit(h, hn, noise.data(), cfl, amp);
    u.swap(un);
    ub.swap(ubn);
    h.swap(hn);
    run_sup = std::max(run_sup, std::abs(u[center] - 1.0 - s1 * h[center]));
    if ((step & 255) == 0 &&
        !std::isfinite(u[center] + ub[center] + h[center]))
      throw numerical_error("run_coupled: non-finite field at step " +
                            std::to_string(step));
    if (next_ck < n_ck && step == plan.steps[next_ck]) {
      check_finite(u, step, "u");
      check_finite(ub, step, "ubar");
      check_finite(h, step, "h");
      for (std::size_t j : tracked) {
        run.u.push_back(u[j]);
        run.ubar.push_back(ub[j]);
        run.h.push_back(h[j]);
        run.lin_err.push_back(u[j] - 1.0 - s1 * h[j]);
      }
      run.run_sup_lin_err.push_back(run_sup);
      ++next_ck;
    }
  }
  return run;
}

FieldStats simulate_field(const SpdeConfig& config, double window_lo,
                          double window_hi) {
  config.validate();
  if (!(window_lo > 0.0) || !(window_hi >= window_lo) ||
      window_hi > config.horizon * (1.0 + 1e-12))
    throw validation_error("simulate_field: window must lie in (0, horizon]");
  const CheckpointPlan plan = plan_checkpoints(config);
  bool any_inside = false;
  for (double t : plan.times)
    any_inside = any_inside || (t >= window_lo && t <= window_hi);
  if (!any_inside)
    throw validation_error("simulate_field: window outside checkpoints");

  const long n_cells = cell_count(config);
  FieldStats fs;
  fs.meta = {config.dx,      config.dt,
             config.horizon, config.half_width,
             config.sigma.sigma_at_one,
             config.sigma.bound.has_value()};
  const std::vector<std::size_t> tracked =
      tracked_indices(config, n_cells, &fs.positions);
  fs.window_lo = window_lo;
  fs.window_hi = window_hi;
  fs.stat.assign(tracked.size(), 0.0);

  const double cfl = config.cfl();
  const double amp = std::sqrt(config.dt / config.dx);
  std::vector<double> u(std::size_t(n_cells) + 1, 1.0), un(u);
  std::vector<double> noise(std::size_t(n_cells) - 1);
  rng::NormalStream ns(config.master_seed, config.stream);

  std::size_t next_ck = 0;
  const std::size_t center = std::size_t(n_cells / 2);
  const long last_step = plan.steps.back();
  for (long step = 1; step <= last_step; ++step) {
    ns.fill(noise.data(), noise.size());
    advance_sigma(config.sigma, u, un, noise.data(), cfl, amp);
    u.swap(un);
    if ((step & 255) == 0 && !std::isfinite(u[center]))
      throw numerical_error("simulate_field: non-finite field at step " +
                            std::to_string(step));
    if (next_ck < plan.steps.size() && step == plan.steps[next_ck]) {
      const double t = plan.times[next_ck];
      if (t >= window_lo && t <= window_hi) {
        check_finite(u, step, "u");
        const double wt = std::pow(t, 0.25);
        for (std::size_t k = 0; k < tracked.size(); ++k)
          fs.stat[k] =
              std::max(fs.stat[k], std::abs(u[tracked[k]] - 1.0) / wt);
      }
      ++next_ck;
    }
  }
  return fs;
}

namespace {

Profile profile_impl(const std::vector<CoupledRun>& runs, bool truncation) {
  if (runs.size() < 100)
    throw validation_error(
        "profile: need >= 100 replicas for norm estimation");
  const CoupledRun& first = runs.front();
  for (const CoupledRun& r : runs)
    if (r.times != first.times || r.site_positions != first.site_positions)
      throw validation_error("profile: replicas disagree on checkpoint layout");
  const std::size_t c = first.center_site();
  const std::size_t n_sites = first.site_positions.size();
  const std::size_t nb = std::clamp<std::size_t>(runs.size() / 10, 2, 50);

  Profile prof;
  std::vector<double> sq(runs.size()), sup(runs.size());
  std::vector<double> lx, ly, lw;
  for (std::size_t k = 0; k < first.times.size(); ++k) {
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const double e = truncation
                           ? runs[r].u[k * n_sites + c] -
                                 runs[r].ubar[k * n_sites + c]
                           : runs[r].lin_err[k * n_sites + c];
      sq[r] = e * e;
      if (!truncation) sup[r] = runs[r].run_sup_lin_err[k];
    }
    const stats::BatchStat bs = stats::batch_se(sq, nb);
    ProfilePoint p;
    p.t = first.times[k];
    if (bs.mean > 0.0) {
      p.norm = std::sqrt(bs.mean);
      p.se_log = bs.se / (2.0 * bs.mean);
    } else {
      prof.warnings.push_back("zero norm at t=" + std::to_string(p.t) +
                              "; point excluded from slope fit");
    }
    p.ratio = p.norm / std::pow(p.t, 0.25);
    if (!truncation) {
      const stats::BatchStat ss = stats::batch_se(sup, nb);
      p.sup_mean = ss.mean;
      p.sup_se = ss.se;
    }
    prof.points.push_back(p);
    if (p.norm > 0.0 && bs.se > 0.0) {
      lx.push_back(std::log(p.t));
      ly.push_back(std::log(p.norm));
      lw.push_back(1.0 / (p.se_log * p.se_log));
    }
  }
  if (lx.size() >= 2) {
    const stats::WlsFit fit = stats::wls_line(lx, ly, lw);
    prof.slope = fit.slope;
    prof.slope_se = fit.se_slope;
  } else {
    prof.warnings.push_back("fewer than 2 usable checkpoints; no slope fit");
  }
  return prof;
}

}  // namespace

Profile linearization_profile(const std::vector<CoupledRun>& runs) {
  return profile_impl(runs, false);
}

Profile truncation_profile(const std::vector<CoupledRun>& runs) {
  if (!runs.empty() && runs.front().meta.sigma_bounded)
    throw validation_error(
        "truncation_profile: sigma is bounded, truncation never bites");
  return profile_impl(runs, true);
}

}  // namespace slowheat::spde
