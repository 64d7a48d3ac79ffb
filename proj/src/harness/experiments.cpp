#include "slowheat/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "slowheat/errors.hpp"
#include "slowheat/exponent.hpp"
#include "slowheat/gaussfield.hpp"
#include "slowheat/harness/io.hpp"
#include "slowheat/harness/svg.hpp"
#include "slowheat/kernels.hpp"
#include "slowheat/slowset.hpp"
#include "slowheat/spde.hpp"
#include "slowheat/stats.hpp"
#include "slowheat/version.hpp"

namespace slowheat::harness {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw validation_error(path + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) bad(path, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known) bad(path + "." + item.key(), "unknown key");
  }
}

double jnum(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) bad(path + "." + key, "required");
  const json& v = obj.at(key);
  if (!v.is_number()) bad(path + "." + key, "expected a number");
  return v.get<double>();
}

double jnum_or(const json& obj, const std::string& path, const char* key,
               double dflt) {
  return obj.contains(key) ? jnum(obj, path, key) : dflt;
}

long jlong(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) bad(path + "." + key, "required");
  const json& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    bad(path + "." + key, "expected an integer");
  return v.get<long>();
}

long jlong_or(const json& obj, const std::string& path, const char* key,
              long dflt) {
  return obj.contains(key) ? jlong(obj, path, key) : dflt;
}

std::vector<double> jvec(const json& obj, const std::string& path,
                         const char* key) {
  if (!obj.contains(key)) bad(path + "." + key, "required");
  const json& v = obj.at(key);
  if (!v.is_array() || v.empty())
    bad(path + "." + key, "expected a non-empty array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& e : v) {
    if (!e.is_number()) bad(path + "." + key, "expected a non-empty array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

spde::SigmaSpec parse_sigma(const json& j, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  const std::string kind = j.value("kind", std::string());
  if (kind == "constant") {
    check_keys(j, path, {"kind", "value"});
    return spde::SigmaSpec::constant(jnum(j, path, "value"));
  }
  if (kind == "linear") {
    check_keys(j, path, {"kind", "slope", "intercept"});
    return spde::SigmaSpec::linear(jnum(j, path, "slope"),
                                   jnum(j, path, "intercept"));
  }
  if (kind == "bounded_sin") {
    check_keys(j, path, {"kind", "amplitude", "frequency"});
    return spde::SigmaSpec::bounded_sin(jnum(j, path, "amplitude"),
                                        jnum(j, path, "frequency"));
  }
  if (kind == "clamped") {
    check_keys(j, path, {"kind", "lo", "hi", "base"});
    if (!j.contains("base")) bad(path + ".base", "required");
    return spde::SigmaSpec::clamped(parse_sigma(j.at("base"), path + ".base"),
                                    jnum(j, path, "lo"), jnum(j, path, "hi"));
  }
  bad(path + ".kind", "unknown nonlinearity '" + kind + "'");
}

std::vector<double> parse_checkpoints(const json& j, const std::string& path) {
  if (j.is_array()) {
    std::vector<double> out;
    for (const json& e : j) {
      if (!e.is_number()) bad(path, "expected numbers");
      out.push_back(e.get<double>());
    }
    if (out.empty()) bad(path, "expected a non-empty array");
    return out;
  }
  if (j.is_object()) {
    check_keys(j, path, {"from", "to", "per_octave"});
    return gaussfield::build_grid(jnum(j, path, "from"), jnum(j, path, "to"),
                                  int(jlong(j, path, "per_octave")))
        .times;
  }
  bad(path, "expected an array or {from, to, per_octave}");
}

std::uint64_t resolve_seed(const json& config, const RunOptions& opts) {
  if (opts.seed_overridden) return opts.master_seed;
  if (config.contains("seed")) {
    const json& s = config.at("seed");
    if (!s.is_number_unsigned() &&
        !(s.is_number_integer() && s.get<long long>() >= 0))
      bad("seed", "expected a non-negative integer");
    return s.get<std::uint64_t>();
  }
  return opts.master_seed;
}

CsvWriter make_csv(const RunManifest& m) {
  CsvWriter w;
  w.meta("tool_version", m.tool_version);
  w.meta("experiment", m.experiment);
  w.meta("master_seed", std::to_string(m.master_seed));
  w.meta("config_digest", m.config_digest);
  return w;
}

void emit(RunManifest& m, const RunOptions& opts, const std::string& name,
          const CsvWriter& w) {
  w.write(opts.out_dir / name);
  m.outputs.push_back(name);
}

void emit(RunManifest& m, const RunOptions& opts, const std::string& name,
          const PlotSpec& spec) {
  write_line_plot(spec, opts.out_dir / name);
  m.outputs.push_back(name);
}

// Dashed power-law guide through (x_ref, y_ref) with the given log-log slope.
Series slope_guide(const std::vector<double>& xs, double x_ref, double y_ref,
                   double slope, const std::string& label) {
  Series s;
  s.label = label;
  s.color = "#d73a49";
  s.dashed = true;
  for (double x : xs) {
    s.x.push_back(x);
    s.y.push_back(y_ref * std::pow(x / x_ref, slope));
  }
  return s;
}

// ---------------------------------------------------------------- cov ----

void run_cov(const json& c, const RunOptions& opts, RunManifest& m) {
  check_keys(c, "cov", {"experiment", "seed", "points"});
  if (!c.contains("points")) bad("cov.points", "required");
  const json& pts = c.at("points");
  if (!pts.is_array() || pts.empty())
    bad("cov.points", "expected a non-empty array");

  CsvWriter w = make_csv(m);
  w.header({"t", "s", "x", "y", "cov_h"});
  json sample = json::array();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string p = "cov.points[" + std::to_string(i) + "]";
    check_keys(pts[i], p, {"t", "s", "x", "y"});
    const double t = jnum(pts[i], p, "t"), s = jnum(pts[i], p, "s");
    const double x = jnum(pts[i], p, "x"), y = jnum(pts[i], p, "y");
    const double v = kernels::cov_h(t, x, s, y);
    w.row_values({t, s, x, y, v});
    if (sample.size() < 8)
      sample.push_back({{"t", t}, {"s", s}, {"x", x}, {"y", y}, {"cov", v}});
  }
  emit(m, opts, "cov.csv", w);
  m.summary["n_points"] = pts.size();
  m.summary["sample"] = sample;
}

// ------------------------------------------------------- localize-check ----

void run_localize(const json& c, const RunOptions& opts, RunManifest& m) {
  check_keys(c, "localize-check", {"experiment", "seed", "t_values", "alphas"});
  const auto ts = jvec(c, "localize-check", "t_values");
  const auto alphas = jvec(c, "localize-check", "alphas");

  CsvWriter w = make_csv(m);
  w.header({"t", "alpha", "var_h", "var_h_alpha", "l2_defect", "bound",
            "within_bound"});
  bool all_within = true;
  double max_ratio = 0.0;
  for (double t : ts)
    for (double a : alphas) {
      const double vh = kernels::var_h(t);
      const double va = kernels::var_h_alpha(t, a);
      const double l2 = kernels::localization_l2(t, a);
      const double bd = kernels::localization_bound(t, a);
      const bool ok = l2 >= 0.0 && l2 <= bd;
      all_within = all_within && ok;
      if (bd > 0.0) max_ratio = std::max(max_ratio, l2 / bd);
      w.row_values({t, a, vh, va, l2, bd, ok ? 1.0 : 0.0});
    }
  emit(m, opts, "localize.csv", w);
  m.summary["all_within"] = all_within;
  m.summary["max_bound_ratio"] = max_ratio;
}

// ---------------------------------------------------------- sample-h ----

void run_sample_h(const json& c, const RunOptions& opts, RunManifest& m) {
  check_keys(c, "sample-h",
             {"experiment", "seed", "grid", "paths", "thetas", "batches"});
  if (!c.contains("grid")) bad("sample-h.grid", "required");
  const json& g = c.at("grid");
  check_keys(g, "sample-h.grid", {"a", "b", "points_per_octave", "times"});
  gaussfield::TimeGrid grid =
      g.contains("times")
          ? gaussfield::custom_grid(jvec(g, "sample-h.grid", "times"))
          : gaussfield::build_grid(jnum(g, "sample-h.grid", "a"),
                                   jnum(g, "sample-h.grid", "b"),
                                   int(jlong(g, "sample-h.grid", "points_per_octave")));
  const long paths = jlong(c, "sample-h", "paths");
  if (paths < 1) bad("sample-h.paths", "must be positive");
  long n_batches = jlong_or(c, "sample-h", "batches", 100);
  n_batches = std::clamp<long>(n_batches, 1, paths);
  const long bs = paths / n_batches;

  const gaussfield::CovFactor factor = gaussfield::factor_covariance(grid);
  const gaussfield::PathBatch batch =
      gaussfield::sample_paths(factor, paths, m.master_seed, /*stream=*/1);

  // Entrywise empirical second moments with batch-mean standard errors.
  const long n = long(grid.times.size());
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(n, n);
  for (long b = 0; b < n_batches; ++b) {
    const Eigen::MatrixXd block = batch.values.middleRows(b * bs, bs);
    const Eigen::MatrixXd g_b = (block.transpose() * block) / double(bs);
    mean += g_b;
    sq += g_b.cwiseProduct(g_b);
  }
  mean /= double(n_batches);
  double max_abs_z = 0.0;
  CsvWriter w = make_csv(m);
  w.header({"i", "j", "t_i", "t_j", "exact", "empirical", "se", "z"});
  for (long i = 0; i < n; ++i)
    for (long j = i; j < n; ++j) {
      const double emp = mean(i, j);
      double var = sq(i, j) / double(n_batches) - emp * emp;
      if (n_batches > 1) var *= double(n_batches) / double(n_batches - 1);
      const double se = std::sqrt(std::max(var, 0.0) / double(n_batches));
      const double exact =
          kernels::cov_h_temporal(grid.times[std::size_t(i)], grid.times[std::size_t(j)]);
      const double z = se > 0.0 ? std::abs(emp - exact) / se : 0.0;
      max_abs_z = std::max(max_abs_z, z);
      w.row_values({double(i), double(j), grid.times[std::size_t(i)],
                    grid.times[std::size_t(j)], exact, emp, se, z});
    }
  emit(m, opts, "sample_h_cov.csv", w);

  json survival = json::array();
  if (c.contains("thetas")) {
    const auto thetas = jvec(c, "sample-h", "thetas");
    CsvWriter sw = make_csv(m);
    sw.header({"theta", "trials", "hits", "p_hat", "ci_lo", "ci_hi"});
    for (double theta : thetas) {
      const auto ind = gaussfield::survival_indicator(batch, theta);
      long hits = 0;
      for (std::uint8_t v : ind) hits += v;
      const auto ci = stats::wilson_ci(hits, paths);
      const double p = double(hits) / double(paths);
      sw.row_values({theta, double(paths), double(hits), p, ci.lo, ci.hi});
      survival.push_back({{"theta", theta},
                          {"hits", hits},
                          {"trials", paths},
                          {"p_hat", p},
                          {"ci_lo", ci.lo},
                          {"ci_hi", ci.hi}});
    }
    emit(m, opts, "sample_h_survival.csv", sw);
  }

  PlotSpec plot;
  plot.title = "Linearization field variance: exact vs sampled";
  plot.x_label = "t";
  plot.y_label = "variance";
  plot.log_x = true;
  plot.log_y = true;
  Series exact_s, emp_s;
  exact_s.label = "exact";
  emp_s.label = "sampled";
  emp_s.color = "#d73a49";
  emp_s.markers = true;
  for (long i = 0; i < n; ++i) {
    exact_s.x.push_back(grid.times[std::size_t(i)]);
    exact_s.y.push_back(kernels::var_h(grid.times[std::size_t(i)]));
    emp_s.x.push_back(grid.times[std::size_t(i)]);
    emp_s.y.push_back(mean(i, i));
  }
  plot.series = {exact_s, emp_s};
  emit(m, opts, "sample_h_var.svg", plot);

  m.summary["n_points"] = grid.times.size();
  m.summary["paths"] = paths;
  m.summary["batches"] = n_batches;
  m.summary["jitter_applied"] = factor.jitter_applied;
  m.summary["max_abs_z"] = max_abs_z;
  m.summary["survival"] = survival;
}

// ---------------------------------------------------------- simulate ----

spde::SpdeConfig parse_spde(const json& c, const std::string& path,
                            std::uint64_t seed) {
  spde::SpdeConfig cfg;
  cfg.sigma = parse_sigma(c.at("sigma"), path + ".sigma");
  cfg.dx = jnum(c, path, "dx");
  cfg.dt = c.contains("dt") ? jnum(c, path, "dt")
                            : spde::SpdeConfig::default_dt(cfg.dx);
  cfg.horizon = jnum(c, path, "horizon");
  cfg.half_width = jnum(c, path, "half_width");
  cfg.analysis_half_width = jnum_or(c, path, "analysis_half_width", 0.0);
  cfg.master_seed = seed;
  return cfg;
}

void run_simulate(const json& c, const RunOptions& opts, RunManifest& m) {
  check_keys(c, "simulate",
             {"experiment", "seed", "sigma", "dx", "dt", "horizon",
              "half_width", "analysis_half_width", "replicas", "checkpoints",
              "profile"});
  if (!c.contains("sigma")) bad("simulate.sigma", "required");
  spde::SpdeConfig cfg = parse_spde(c, "simulate", m.master_seed);
  if (!c.contains("checkpoints")) bad("simulate.checkpoints", "required");
  cfg.checkpoints = parse_checkpoints(c.at("checkpoints"), "simulate.checkpoints");
  const long replicas = jlong(c, "simulate", "replicas");
  if (replicas < 1) bad("simulate.replicas", "must be positive");
  const std::string which = c.value("profile", std::string("linearization"));
  if (which != "linearization" && which != "truncation" && which != "both")
    bad("simulate.profile", "expected linearization, truncation, or both");
  cfg.validate();

  std::vector<spde::CoupledRun> runs;
  runs.reserve(std::size_t(replicas));
  for (long r = 0; r < replicas; ++r) {
    cfg.stream = std::uint64_t(r);
    runs.push_back(spde::run_coupled(cfg));
  }

  json profiles = json::array();
  const auto emit_profile = [&](const std::string& name,
                                const spde::Profile& p) {
    CsvWriter w = make_csv(m);
    w.header({"t", "norm", "se_log", "ratio", "sup_mean", "sup_se"});
    std::vector<double> ts, norms;
    for (const spde::ProfilePoint& pt : p.points) {
      w.row_values({pt.t, pt.norm, pt.se_log, pt.ratio, pt.sup_mean, pt.sup_se});
      if (pt.norm > 0.0) {
        ts.push_back(pt.t);
        norms.push_back(pt.norm);
      }
    }
    emit(m, opts, "simulate_" + name + ".csv", w);

    if (ts.size() >= 2) {
      PlotSpec plot;
      plot.title = name + " error norm";
      plot.x_label = "t";
      plot.y_label = "L2 norm";
      plot.log_x = true;
      plot.log_y = true;
      Series data;
      data.label = "measured";
      data.markers = true;
      data.x = ts;
      data.y = norms;
      plot.series = {data, slope_guide(ts, ts.back(), norms.back(), p.slope,
                                       "slope fit")};
      emit(m, opts, "simulate_" + name + ".svg", plot);
    }
    for (const std::string& msg : p.warnings) m.warnings.push_back(msg);
    profiles.push_back({{"name", name},
                        {"slope", p.slope},
                        {"slope_se", p.slope_se},
                        {"n_checkpoints", p.points.size()}});
  };

  if (which == "linearization" || which == "both")
    emit_profile("linearization", spde::linearization_profile(runs));
  if (which == "truncation" || which == "both")
    emit_profile("truncation", spde::truncation_profile(runs));

  m.summary["sigma"] = cfg.sigma.describe();
  m.summary["dx"] = cfg.dx;
  m.summary["dt"] = cfg.dt;
  m.summary["horizon"] = cfg.horizon;
  m.summary["replicas"] = replicas;
  m.summary["profiles"] = profiles;
}

// ---------------------------------------------------------- exponent ----

json curve_to_json(const exponent::ExponentCurve& curve) {
  json entries = json::array();
  for (const exponent::CurveEntry& e : curve.entries) {
    json row = {{"theta", e.theta},
                {"fitted", e.fitted},
                {"lambda_lower_bound", e.lambda_lower_bound},
                {"note", e.note}};
    if (e.fitted) {
      row["lambda_hat"] = e.fit.lambda_hat;
      row["se"] = e.fit.se;
      row["r_squared"] = e.fit.r_squared;
    }
    entries.push_back(row);
  }
  json tc = {{"available", curve.theta_c.available},
             {"note", curve.theta_c.note}};
  if (curve.theta_c.available) {
    tc["value"] = curve.theta_c.value;
    tc["lo"] = curve.theta_c.lo;
    tc["hi"] = curve.theta_c.hi;
  }
  return {{"entries", entries},
          {"theta_c", tc},
          {"checks",
           {{"monotone_ok", curve.checks.monotone_ok},
            {"convex_ok", curve.checks.convex_ok},
            {"all_fitted", curve.checks.all_fitted},
            {"violations", curve.checks.violations}}}};
}

void run_exponent(const json& c, const RunOptions& opts, RunManifest& m) {
  check_keys(c, "exponent",
             {"experiment", "seed", "thetas", "ratios", "grid_density",
              "trials", "small_theta_max", "large_theta_min"});
  auto thetas = jvec(c, "exponent", "thetas");
  std::sort(thetas.begin(), thetas.end());
  const auto ratios = jvec(c, "exponent", "ratios");
  const int density = int(jlong(c, "exponent", "grid_density"));
  const long trials = jlong(c, "exponent", "trials");

  const exponent::ExponentCurve curve = exponent::lambda_curve(
      thetas, ratios, density, trials, m.master_seed, /*stream=*/0);
  const exponent::AsymptoticReport asym = exponent::asymptotic_check(
      curve, jnum_or(c, "exponent", "small_theta_max", 0.4),
      jnum_or(c, "exponent", "large_theta_min", 1.5));

  CsvWriter cw = make_csv(m);
  cw.header({"theta", "fitted", "lambda_hat", "se", "r_squared",
             "lambda_lower_bound", "note"});
  for (const exponent::CurveEntry& e : curve.entries)
    cw.row({format_g17(e.theta), e.fitted ? "1" : "0",
            e.fitted ? format_g17(e.fit.lambda_hat) : "",
            e.fitted ? format_g17(e.fit.se) : "",
            e.fitted ? format_g17(e.fit.r_squared) : "",
            format_g17(e.lambda_lower_bound), e.note});
  emit(m, opts, "exponent_curve.csv", cw);

  CsvWriter rw = make_csv(m);
  rw.header({"theta", "ratio", "grid_density", "trials", "hits", "p_hat",
             "ci_lo", "ci_hi", "lower_bound_only"});
  for (const exponent::CurveEntry& e : curve.entries)
    for (const exponent::SurvivalRecord& r : e.records)
      rw.row_values({r.theta, r.ratio, double(r.grid_density), double(r.trials),
                     double(r.hits), r.p_hat, r.ci_lo, r.ci_hi,
                     r.lower_bound_only ? 1.0 : 0.0});
  emit(m, opts, "exponent_records.csv", rw);

  Series fitted;
  fitted.label = "lambda (fitted)";
  fitted.markers = true;
  for (const exponent::CurveEntry& e : curve.entries)
    if (e.fitted) {
      fitted.x.push_back(e.theta);
      fitted.y.push_back(e.fit.lambda_hat);
    }
  if (fitted.x.size() >= 2) {
    PlotSpec plot;
    plot.title = "Boundary-crossing exponent";
    plot.x_label = "theta";
    plot.y_label = "lambda";
    plot.log_y = true;
    plot.series = {fitted};
    emit(m, opts, "exponent_curve.svg", plot);
  }

  m.summary = curve_to_json(curve);
  m.summary["ratios"] = ratios;
  m.summary["grid_density"] = density;
  m.summary["trials"] = trials;
  json aj = {{"large_available", asym.large_available},
             {"small_available", asym.small_available},
             {"notes", asym.notes}};
  if (asym.large_available) {
    aj["large_slope"] = asym.large_slope;
    aj["large_se"] = asym.large_se;
  }
  if (asym.small_available) {
    aj["small_slope"] = asym.small_slope;
    aj["small_se"] = asym.small_se;
  }
  m.summary["asymptotics"] = aj;
}

// --------------------------------------------------------- smallball-u ----

void run_smallball(const json& c, const RunOptions& opts, RunManifest& m) {
  check_keys(c, "smallball-u",
             {"experiment", "seed", "theta", "eps", "f_exponent", "trials",
              "sigma", "checkpoint_density", "bottom_steps"});
  if (!c.contains("sigma")) bad("smallball-u.sigma", "required");
  exponent::SmallballConfig sc;
  sc.theta = jnum(c, "smallball-u", "theta");
  sc.eps_list = jvec(c, "smallball-u", "eps");
  sc.f_exponent = jnum_or(c, "smallball-u", "f_exponent", 0.5);
  sc.trials = jlong(c, "smallball-u", "trials");
  sc.sigma = parse_sigma(c.at("sigma"), "smallball-u.sigma");
  sc.checkpoint_density = int(jlong_or(c, "smallball-u", "checkpoint_density", 32));
  sc.bottom_steps = jlong_or(c, "smallball-u", "bottom_steps", 64);
  sc.master_seed = m.master_seed;
  sc.stream = 0;

  const exponent::SmallballReport rep = exponent::smallball_u(sc);

  CsvWriter w = make_csv(m);
  w.header({"eps", "f_value", "window_lo", "window_hi", "dx", "dt", "trials",
            "hits", "p_hat", "ci_lo", "ci_hi", "gauss_hits", "gauss_p_hat"});
  Series spde_s, gauss_s;
  spde_s.label = "nonlinear field";
  spde_s.markers = true;
  gauss_s.label = "discrete linear field";
  gauss_s.color = "#d73a49";
  gauss_s.markers = true;
  gauss_s.dashed = true;
  for (const exponent::SmallballPoint& p : rep.points) {
    w.row_values({p.eps, p.f_value, p.window_lo, p.window_hi, p.dx, p.dt,
                  double(p.trials), double(p.hits), p.p_hat, p.ci_lo, p.ci_hi,
                  double(p.gauss_hits), p.gauss_p_hat});
    if (p.p_hat > 0.0) {
      spde_s.x.push_back(p.f_value);
      spde_s.y.push_back(p.p_hat);
    }
    if (p.gauss_p_hat > 0.0) {
      gauss_s.x.push_back(p.f_value);
      gauss_s.y.push_back(p.gauss_p_hat);
    }
  }
  emit(m, opts, "smallball.csv", w);

  if (spde_s.x.size() >= 2) {
    PlotSpec plot;
    plot.title = "Small-ball survival vs window shape";
    plot.x_label = "f(eps)";
    plot.y_label = "survival probability";
    plot.log_x = true;
    plot.log_y = true;
    plot.series = {spde_s};
    if (gauss_s.x.size() >= 2) plot.series.push_back(gauss_s);
    emit(m, opts, "smallball.svg", plot);
  }

  for (const std::string& msg : rep.warnings) m.warnings.push_back(msg);
  m.summary["theta"] = rep.theta;
  m.summary["f_exponent"] = rep.f_exponent;
  m.summary["slope"] = rep.slope;
  m.summary["slope_se"] = rep.slope_se;
  m.summary["gauss_slope"] = rep.gauss_slope;
  m.summary["gauss_slope_se"] = rep.gauss_slope_se;
  m.summary["sigma"] = sc.sigma.describe();
  m.summary["trials"] = sc.trials;
}

// ------------------------------------------------------------ slowset ----

json comparison_to_json(const slowset::DimensionComparison& cmp) {
  return {{"dim_est", cmp.dim_est},       {"dim_se", cmp.dim_se},
          {"theory", cmp.theory},         {"theory_se", cmp.theory_se},
          {"gap", cmp.gap},               {"gap_se", cmp.gap_se},
          {"theta_c_known", cmp.theta_c_known},
          {"theta_at_least_theta_c", cmp.theta_at_least_theta_c},
          {"note", cmp.note}};
}

void run_slowset(const json& c, const RunOptions& opts, RunManifest& m) {
  check_keys(c, "slowset",
             {"experiment", "seed", "theta", "sigma", "dx", "dt", "horizon",
              "half_width", "analysis_half_width", "window", "replicas",
              "n_max", "level_range", "lambda"});
  if (!c.contains("sigma")) bad("slowset.sigma", "required");
  const double theta = jnum(c, "slowset", "theta");
  spde::SpdeConfig cfg = parse_spde(c, "slowset", m.master_seed);
  if (!c.contains("window")) bad("slowset.window", "required");
  const json& win = c.at("window");
  check_keys(win, "slowset.window", {"lo", "hi"});
  const double win_lo = jnum(win, "slowset.window", "lo");
  const double win_hi = jnum(win, "slowset.window", "hi");
  cfg.checkpoints = gaussfield::build_grid(win_lo, win_hi, 8).times;
  const long replicas = jlong(c, "slowset", "replicas");
  if (replicas < 1) bad("slowset.replicas", "must be positive");
  std::optional<std::pair<int, int>> level_range;
  if (c.contains("level_range")) {
    const auto lr = jvec(c, "slowset", "level_range");
    if (lr.size() != 2) bad("slowset.level_range", "expected [lo, hi]");
    level_range = {int(lr[0]), int(lr[1])};
  }
  cfg.validate();

  // Per-replica pipeline; replicas stay separate all the way down.
  std::vector<slowset::SlowSetCensus> censuses;
  std::vector<slowset::DimensionEstimate> dims;
  std::vector<slowset::PointSet> sets;
  int n_max = 0;
  CsvWriter sites = make_csv(m);
  sites.header({"replica", "position"});
  for (long r = 0; r < replicas; ++r) {
    cfg.stream = std::uint64_t(r);
    const spde::FieldStats stats = spde::simulate_field(cfg, win_lo, win_hi);
    const slowset::PointSet set =
        slowset::detect_slow(stats, theta, cfg.sigma.sigma_at_one);
    if (r == 0) {
      n_max = int(jlong_or(c, "slowset", "n_max",
                           long(std::floor(-std::log2(set.resolution) + 1e-9))));
    }
    for (double p : set.points) sites.row_values({double(r), p});
    censuses.push_back(slowset::box_census(set, n_max));
    dims.push_back(slowset::dim_fit(censuses.back(), level_range));
    sets.push_back(set);
  }
  emit(m, opts, "slowset_sites.csv", sites);

  CsvWriter cw = make_csv(m);
  cw.header({"replica", "level", "count"});
  for (long r = 0; r < replicas; ++r)
    for (std::size_t lev = 0; lev < censuses[std::size_t(r)].counts.size(); ++lev)
      cw.row_values({double(r), double(lev),
                     double(censuses[std::size_t(r)].counts[lev])});
  emit(m, opts, "slowset_census.csv", cw);

  CsvWriter dw = make_csv(m);
  dw.header({"replica", "slope", "slope_raw", "se", "r_squared", "n_lo", "n_hi"});
  json dim_rows = json::array();
  std::vector<double> slopes;
  for (long r = 0; r < replicas; ++r) {
    const slowset::DimensionEstimate& d = dims[std::size_t(r)];
    dw.row_values({double(r), d.slope, d.slope_raw, d.se, d.r_squared,
                   double(d.n_lo), double(d.n_hi)});
    dim_rows.push_back({{"replica", r},
                        {"slope", d.slope},
                        {"slope_raw", d.slope_raw},
                        {"se", d.se},
                        {"r_squared", d.r_squared},
                        {"n_lo", d.n_lo},
                        {"n_hi", d.n_hi}});
    slopes.push_back(d.slope);
  }
  emit(m, opts, "slowset_dim.csv", dw);

  // Aggregate estimate across replicas, labeled as such (spread of the
  // per-replica slopes, not a pooled census).
  slowset::DimensionEstimate agg;
  agg.slope_raw = stats::mean(slopes);
  agg.slope = std::clamp(agg.slope_raw, 0.0, 1.0);
  agg.se = replicas > 1 ? std::sqrt(stats::sample_variance(slopes) /
                                    double(replicas))
                        : dims[0].se;
  agg.n_lo = dims[0].n_lo;
  agg.n_hi = dims[0].n_hi;

  // Reference exponent at this theta: either injected or a dedicated ladder.
  std::optional<exponent::ExponentFit> lam;
  std::optional<double> theta_c;
  json lam_block;
  if (c.contains("lambda")) {
    const json& lj = c.at("lambda");
    if (lj.contains("value")) {
      check_keys(lj, "slowset.lambda", {"value", "se"});
      exponent::ExponentFit ef;
      ef.theta = theta;
      ef.lambda_hat = jnum(lj, "slowset.lambda", "value");
      ef.se = jnum_or(lj, "slowset.lambda", "se", 0.0);
      lam = ef;
      lam_block = {{"source", "injected"},
                   {"lambda_hat", ef.lambda_hat},
                   {"se", ef.se}};
    } else {
      check_keys(lj, "slowset.lambda",
                 {"thetas", "ratios", "grid_density", "trials"});
      std::vector<double> thetas =
          lj.contains("thetas") ? jvec(lj, "slowset.lambda", "thetas")
                                : std::vector<double>{theta};
      if (std::find(thetas.begin(), thetas.end(), theta) == thetas.end())
        thetas.push_back(theta);
      std::sort(thetas.begin(), thetas.end());
      const exponent::ExponentCurve curve = exponent::lambda_curve(
          thetas, jvec(lj, "slowset.lambda", "ratios"),
          int(jlong(lj, "slowset.lambda", "grid_density")),
          jlong(lj, "slowset.lambda", "trials"), m.master_seed,
          /*stream=*/0x100000);
      for (const exponent::CurveEntry& e : curve.entries)
        if (std::abs(e.theta - theta) < 1e-12) {
          if (e.fitted) {
            lam = e.fit;
            lam_block = {{"source", "ladder"},
                         {"lambda_hat", e.fit.lambda_hat},
                         {"se", e.fit.se}};
          } else {
            lam_block = {{"source", "ladder"},
                         {"refused", true},
                         {"lambda_lower_bound", e.lambda_lower_bound},
                         {"note", e.note}};
            m.warnings.push_back("lambda ladder refused at theta = " +
                                 format_g17(theta) + "; " + e.note);
          }
        }
      if (curve.theta_c.available) theta_c = curve.theta_c.value;
    }
  } else {
    lam_block = {{"source", "none"}};
    m.warnings.push_back(
        "no lambda reference configured; dimension comparison skipped");
  }

  json per_replica_cmp = json::array();
  if (lam) {
    for (const slowset::DimensionEstimate& d : dims)
      per_replica_cmp.push_back(
          comparison_to_json(slowset::dimension_vs_theory(d, *lam, theta_c)));
    m.summary["comparison"] =
        comparison_to_json(slowset::dimension_vs_theory(agg, *lam, theta_c));
  }

  // log2 counts vs level, one series per replica (first few), plus the
  // aggregate fit and the theory reference when available.
  PlotSpec plot;
  plot.title = "Slow-set box census";
  plot.x_label = "level";
  plot.y_label = "log2 count";
  const char* palette[] = {"#1f6feb", "#2da44e", "#bf8700", "#8250df",
                           "#cf222e", "#116329", "#0550ae", "#57606a"};
  for (long r = 0; r < std::min<long>(replicas, 8); ++r) {
    Series s;
    s.label = "replica " + std::to_string(r);
    s.color = palette[r % 8];
    s.markers = true;
    const auto& counts = censuses[std::size_t(r)].counts;
    for (std::size_t lev = 0; lev < counts.size(); ++lev) {
      s.x.push_back(double(lev));
      s.y.push_back(std::log2(double(std::max<long>(counts[lev], 1))));
    }
    plot.series.push_back(s);
  }
  {
    Series fit;
    fit.label = "fit slope " + format_g17(agg.slope).substr(0, 6);
    fit.color = "#000000";
    fit.dashed = true;
    for (int lev = agg.n_lo; lev <= agg.n_hi; ++lev) {
      fit.x.push_back(double(lev));
      fit.y.push_back(agg.slope * double(lev - agg.n_lo));
    }
    if (fit.x.size() >= 2) plot.series.push_back(fit);
  }
  if (lam) {
    const double ref = std::clamp(1.0 - 2.0 * lam->lambda_hat, 0.0, 1.0);
    Series rs;
    rs.label = "reference 1 - 2 lambda";
    rs.color = "#d73a49";
    rs.dashed = true;
    for (int lev = agg.n_lo; lev <= agg.n_hi; ++lev) {
      rs.x.push_back(double(lev));
      rs.y.push_back(ref * double(lev - agg.n_lo));
    }
    if (rs.x.size() >= 2) plot.series.push_back(rs);
  }
  emit(m, opts, "slowset.svg", plot);

  m.summary["theta"] = theta;
  m.summary["replicas"] = replicas;
  m.summary["resolution"] = sets[0].resolution;
  m.summary["n_max"] = n_max;
  m.summary["window"] = {{"lo", win_lo}, {"hi", win_hi}};
  m.summary["dimension_per_replica"] = dim_rows;
  m.summary["dimension_aggregate"] = {{"slope", agg.slope},
                                      {"slope_raw", agg.slope_raw},
                                      {"se", agg.se}};
  m.summary["lambda"] = lam_block;
  if (lam) m.summary["comparison_per_replica"] = per_replica_cmp;
  if (theta_c) m.summary["theta_c"] = *theta_c;
}

}  // namespace

RunManifest run_experiment(const json& config, const RunOptions& opts) {
  if (!config.is_object()) bad("config", "expected a JSON object");
  const std::string exp = config.value("experiment", std::string());
  if (exp.empty()) bad("experiment", "required");

  RunManifest m;
  m.tool_version = kToolVersion;
  m.experiment = exp;
  m.master_seed = resolve_seed(config, opts);
  m.config_digest = hex64(fnv1a64(config.dump()));
  m.started = timestamp_utc();
  if (opts.threads > 1)
    m.warnings.push_back(
        "threads flag accepted for config stability; replicas run serially");
  std::filesystem::create_directories(opts.out_dir);

  if (exp == "cov")
    run_cov(config, opts, m);
  else if (exp == "localize-check")
    run_localize(config, opts, m);
  else if (exp == "sample-h")
    run_sample_h(config, opts, m);
  else if (exp == "simulate")
    run_simulate(config, opts, m);
  else if (exp == "exponent")
    run_exponent(config, opts, m);
  else if (exp == "smallball-u")
    run_smallball(config, opts, m);
  else if (exp == "slowset")
    run_slowset(config, opts, m);
  else
    bad("experiment", "unknown experiment '" + exp + "'");

  m.finished = timestamp_utc();
  write_manifest(m, opts.out_dir);
  return m;
}

namespace {

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string pm(const json& j, const char* value_key, const char* se_key) {
  if (!j.contains(value_key)) return "n/a";
  std::string out = fmt6(j.value(value_key, 0.0));
  if (j.contains(se_key)) out += " +/- " + fmt6(j.value(se_key, 0.0));
  return out;
}

void report_section(std::ostringstream& doc, const RunManifest& m) {
  const json& s = m.summary;
  doc << "\n## " << m.experiment << "\n\n";
  doc << "seed " << m.master_seed << ", config digest " << m.config_digest
      << "\n\n";
  if (m.experiment == "cov") {
    doc << "Covariance evaluations: " << s.value("n_points", 0) << "\n";
    if (s.contains("sample")) {
      doc << "\n| t | s | x | y | cov |\n|---|---|---|---|---|\n";
      for (const json& row : s["sample"])
        doc << "| " << fmt6(row.value("t", 0.0)) << " | "
            << fmt6(row.value("s", 0.0)) << " | " << fmt6(row.value("x", 0.0))
            << " | " << fmt6(row.value("y", 0.0)) << " | "
            << fmt6(row.value("cov", 0.0)) << " |\n";
    }
  } else if (m.experiment == "localize-check") {
    doc << "All localization defects within the closed-form bound: "
        << (s.value("all_within", false) ? "yes" : "NO") << "\n";
    doc << "Max defect/bound ratio: " << fmt6(s.value("max_bound_ratio", 0.0))
        << "\n";
  } else if (m.experiment == "sample-h") {
    doc << "Paths: " << s.value("paths", 0L)
        << "; max |z| over covariance entries: "
        << fmt6(s.value("max_abs_z", 0.0)) << "\n";
    if (s.contains("survival") && !s["survival"].empty()) {
      doc << "\n| theta | hits/trials | p_hat | 95% CI |\n|---|---|---|---|\n";
      for (const json& row : s["survival"])
        doc << "| " << fmt6(row.value("theta", 0.0)) << " | "
            << row.value("hits", 0L) << "/" << row.value("trials", 0L) << " | "
            << fmt6(row.value("p_hat", 0.0)) << " | ["
            << fmt6(row.value("ci_lo", 0.0)) << ", "
            << fmt6(row.value("ci_hi", 0.0)) << "] |\n";
    }
  } else if (m.experiment == "simulate") {
    doc << "sigma: " << s.value("sigma", std::string("?")) << "; dx "
        << fmt6(s.value("dx", 0.0)) << ", replicas " << s.value("replicas", 0L)
        << "\n";
    if (s.contains("profiles"))
      for (const json& p : s["profiles"])
        doc << "- " << p.value("name", std::string("?")) << " slope: "
            << pm(p, "slope", "slope_se") << "\n";
  } else if (m.experiment == "exponent") {
    if (s.contains("entries")) {
      doc << "| theta | lambda | note |\n|---|---|---|\n";
      for (const json& e : s["entries"]) {
        doc << "| " << fmt6(e.value("theta", 0.0)) << " | ";
        if (e.value("fitted", false))
          doc << pm(e, "lambda_hat", "se");
        else
          doc << ">= " << fmt6(e.value("lambda_lower_bound", 0.0))
              << " (refused)";
        doc << " | " << e.value("note", std::string()) << " |\n";
      }
    }
    if (s.contains("theta_c")) {
      const json& tc = s["theta_c"];
      if (tc.value("available", false))
        doc << "\ntheta_c: " << fmt6(tc.value("value", 0.0)) << " in ["
            << fmt6(tc.value("lo", 0.0)) << ", " << fmt6(tc.value("hi", 0.0))
            << "]\n";
      else
        doc << "\ntheta_c: unavailable (" << tc.value("note", std::string())
            << ")\n";
    }
    if (s.contains("checks")) {
      const json& ch = s["checks"];
      doc << "Checks: monotone "
          << (ch.value("monotone_ok", false) ? "ok" : "VIOLATED") << ", convex "
          << (ch.value("convex_ok", false) ? "ok" : "VIOLATED") << "\n";
    }
    if (s.contains("asymptotics")) {
      const json& a = s["asymptotics"];
      if (a.value("large_available", false))
        doc << "Large-theta slope (log lambda vs theta^2): "
            << pm(a, "large_slope", "large_se") << "\n";
      if (a.value("small_available", false))
        doc << "Small-theta slope (log lambda vs log theta): "
            << pm(a, "small_slope", "small_se") << "\n";
    }
  } else if (m.experiment == "smallball-u") {
    doc << "theta " << fmt6(s.value("theta", 0.0)) << ", f exponent "
        << fmt6(s.value("f_exponent", 0.0)) << ", trials "
        << s.value("trials", 0L) << "\n";
    doc << "- nonlinear slope: " << pm(s, "slope", "slope_se") << "\n";
    doc << "- discrete linear slope: " << pm(s, "gauss_slope", "gauss_slope_se")
        << "\n";
  } else if (m.experiment == "slowset") {
    doc << "theta " << fmt6(s.value("theta", 0.0)) << ", replicas "
        << s.value("replicas", 0L) << ", resolution "
        << fmt6(s.value("resolution", 0.0)) << "\n";
    if (s.contains("dimension_aggregate"))
      doc << "- box dimension (across replicas): "
          << pm(s["dimension_aggregate"], "slope", "se") << "\n";
    if (s.contains("lambda"))
      doc << "- lambda reference: " << pm(s["lambda"], "lambda_hat", "se")
          << "\n";
    if (s.contains("comparison")) {
      const json& cmp = s["comparison"];
      doc << "- theory 1 - 2 lambda: " << pm(cmp, "theory", "theory_se")
          << "; gap: " << pm(cmp, "gap", "gap_se") << "\n";
      doc << "- " << cmp.value("note", std::string()) << "\n";
    }
  }
  if (!m.warnings.empty()) {
    doc << "\nWarnings:\n";
    for (const std::string& wmsg : m.warnings) doc << "- " << wmsg << "\n";
  }
}

}  // namespace

RunManifest run_report(const std::filesystem::path& dir,
                       const RunOptions& opts) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::exists(dir))
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.size() > 14 &&
          name.substr(name.size() - 14) == "_manifest.json" &&
          name != "report_manifest.json")
        files.push_back(entry.path());
    }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw validation_error("report: no run manifests found in " +
                           dir.string());

  RunManifest rep;
  rep.tool_version = kToolVersion;
  rep.experiment = "report";
  rep.master_seed = opts.master_seed;
  rep.config_digest = hex64(fnv1a64(dir.string()));
  rep.started = timestamp_utc();

  std::vector<RunManifest> runs;
  std::vector<std::string> missing;
  for (const auto& f : files) {
    try {
      runs.push_back(manifest_from_json(json::parse(read_text_file(f))));
    } catch (const std::exception& e) {
      rep.warnings.push_back("could not parse " + f.filename().string() +
                             ": " + e.what());
      continue;
    }
    for (const std::string& out : runs.back().outputs)
      if (!std::filesystem::exists(dir / out))
        missing.push_back(runs.back().experiment + ": " + out);
  }

  std::ostringstream doc;
  doc << "# Slow-point toolkit report\n\n";
  doc << "Assembled from " << runs.size() << " run manifest"
      << (runs.size() == 1 ? "" : "s") << ".\n";
  for (const RunManifest& m : runs) report_section(doc, m);
  if (!missing.empty()) {
    doc << "\n## Missing upstream artifacts\n\n";
    for (const std::string& item : missing) doc << "- " << item << "\n";
  }
  for (const std::string& item : missing)
    rep.warnings.push_back("missing artifact " + item);

  std::filesystem::create_directories(opts.out_dir);
  write_text_file(opts.out_dir / "report.md", doc.str());
  rep.outputs.push_back("report.md");
  json found = json::array();
  for (const RunManifest& m : runs) found.push_back(m.experiment);
  rep.summary["experiments"] = found;
  rep.summary["missing_artifacts"] = missing;
  rep.finished = timestamp_utc();
  write_manifest(rep, opts.out_dir);
  return rep;
}

}  // namespace slowheat::harness
