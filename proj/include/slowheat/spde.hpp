#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace slowheat::spde {

// Nonlinearity catalog.  Every entry knows its Lipschitz constant, its sup
// bound when one exists, and its value at 1 (which must be nonzero for any
// run config, since the linearization error is defined against sigma(1)).
struct SigmaSpec {
  enum class Kind { constant, linear, bounded_sin, clamped };
  Kind kind = Kind::constant;
  // constant: sigma(x) = a
  // linear: sigma(x) = a*x + b
  // bounded_sin: sigma(x) = a*sin(b*x)
  // clamped: base sigma evaluated at x clamped to [clamp_lo, clamp_hi]
  double a = 0.0, b = 0.0;
  double clamp_lo = 0.0, clamp_hi = 0.0;
  Kind base = Kind::constant;  // base catalog entry for clamped

  double lipschitz = 0.0;
  std::optional<double> bound;  // sup |sigma| when finite
  double sigma_at_one = 0.0;

  static SigmaSpec constant(double c);
  static SigmaSpec linear(double slope, double intercept);
  static SigmaSpec bounded_sin(double amplitude, double frequency);
  static SigmaSpec clamped(const SigmaSpec& base, double lo, double hi);

  double operator()(double x) const;

  // The truncated nonlinearity: frozen outside [-2, 2].
  SigmaSpec truncated() const;

  void validate() const;
  std::string describe() const;
};

struct SpdeConfig {
  double half_width = 0.0;  // domain [-L, L]
  double dx = 0.0;
  double dt = 0.0;
  double horizon = 0.0;  // T
  SigmaSpec sigma;
  std::vector<double> checkpoints;  // strictly increasing, in (0, T]
  std::uint64_t master_seed = 0;
  std::uint64_t stream = 0;
  // Sites within |x| <= analysis_half_width are recorded at checkpoints.
  double analysis_half_width = 0.0;
  // Localized analyses need extra buffer for the spatial window t^((1-alpha)/2).
  bool localized_analysis = false;
  double localization_alpha = 0.5;

  // Throws validation_error; messages carry the failing field.  The buffer
  // rule is L >= analysis + 4 sqrt(T), plus the localization window term when
  // localized_analysis is set, so boundary effects cannot reach analyzed
  // sites over the horizon.
  void validate() const;

  double cfl() const { return dt / (dx * dx); }

  // Largest power of two <= dx^2/4; keeps dyadic checkpoints exactly on-step.
  static double default_dt(double dx);
};

// One explicit step for a single field: out_j = f_j + cfl*(f_{j+1} - 2 f_j +
// f_{j-1}) + sigma(f_j)*amp*xi_j on interior cells, boundary copied.  The
// low-level op behind the integrators, exposed for direct property checks.
std::vector<double> step_field(const std::vector<double>& f,
                               const std::vector<double>& noise, double cfl,
                               double amp, const SigmaSpec& sigma);

// Buffer-reusing variant for hot loops; out must already match f's size.
void step_field_into(const std::vector<double>& f, std::vector<double>& out,
                     const std::vector<double>& noise, double cfl, double amp,
                     const SigmaSpec& sigma);

struct CheckpointPlan {
  std::vector<long> steps;      // strictly increasing, >= 1
  std::vector<double> times;    // steps * dt
  std::vector<double> snap_err; // |requested - snapped|
};

// Snap each requested checkpoint to the nearest step multiple (distance
// recorded, collisions rejected).
CheckpointPlan plan_checkpoints(const SpdeConfig& config);

struct RunMeta {
  double dx = 0.0, dt = 0.0, horizon = 0.0, half_width = 0.0;
  double sigma_at_one = 0.0;
  bool sigma_bounded = false;
};

// One replica of the coupled evolution: u (sigma), ubar (sigma truncated),
// and h (additive noise, zero initial data) on one shared noise sequence.
struct CoupledRun {
  RunMeta meta;
  std::vector<double> site_positions;  // tracked sites (analysis interval)
  std::vector<double> times;           // snapped checkpoint times
  std::vector<double> snap_err;
  // Row-major [checkpoint][site]:
  std::vector<double> u, ubar, h, lin_err;  // lin_err = u - 1 - sigma(1) h
  // Running sup of |lin_err| at the center site, sampled every step.
  std::vector<double> run_sup_lin_err;

  double at(const std::vector<double>& field, std::size_t ckpt,
            std::size_t site) const {
    return field[ckpt * site_positions.size() + site];
  }
  std::size_t center_site() const;  // index of the site nearest x = 0
};

CoupledRun run_coupled(const SpdeConfig& config);

// Per-site band statistic max over checkpoints in the window of
// |u(t,x) - 1| / t^(1/4); evolves u only.
struct FieldStats {
  RunMeta meta;
  std::vector<double> positions;  // interior analysis sites
  std::vector<double> stat;
  double window_lo = 0.0, window_hi = 0.0;
};

FieldStats simulate_field(const SpdeConfig& config, double window_lo,
                          double window_hi);

struct ProfilePoint {
  double t = 0.0;
  double norm = 0.0;     // L2 norm over replicas at the center site
  double se_log = 0.0;   // batch standard error of log norm
  double ratio = 0.0;    // norm / t^(1/4)
  double sup_mean = 0.0; // running-sup statistic (linearization profile only)
  double sup_se = 0.0;
};

struct Profile {
  std::vector<ProfilePoint> points;
  double slope = 0.0;     // weighted log-log slope of norm vs t
  double slope_se = 0.0;
  std::vector<std::string> warnings;
};

// ||u - 1 - sigma(1) h||_2 at the center site per checkpoint, with the
// running-sup statistic and a weighted log-log slope.  Needs >= 100 replicas.
Profile linearization_profile(const std::vector<CoupledRun>& runs);

// ||u - ubar||_2 at the center site per checkpoint.  Requires an unbounded
// nonlinearity (otherwise the truncation never bites and the profile is 0).
Profile truncation_profile(const std::vector<CoupledRun>& runs);

}  // namespace slowheat::spde
