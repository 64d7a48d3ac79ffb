#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "slowheat/errors.hpp"
#include "slowheat/exponent.hpp"
#include "slowheat/spde.hpp"

using namespace slowheat;
using exponent::SurvivalRecord;

namespace {

SurvivalRecord synthetic_record(double theta, double ratio, double p_hat) {
  SurvivalRecord r;
  r.theta = theta;
  r.ratio = ratio;
  r.grid_density = 16;
  r.trials = 100000;
  r.hits = std::lround(p_hat * 100000.0);
  r.p_hat = p_hat;
  return r;
}

}  // namespace

TEST_CASE("fit_lambda recovers an exact power law") {
  // p = 0.3 R^-0.7: the intercept is absorbed, the slope is the exponent.
  std::vector<SurvivalRecord> recs;
  for (double r : {2.0, 4.0, 8.0, 16.0})
    recs.push_back(synthetic_record(1.0, r, 0.3 * std::pow(r, -0.7)));
  const exponent::ExponentFit fit = exponent::fit_lambda(recs);
  CHECK(fit.theta == 1.0);
  CHECK(fit.lambda_hat == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.se > 0.0);
  REQUIRE(fit.ratios_used.size() == 4);
  CHECK(fit.ratios_used.front() == 2.0);
  CHECK(fit.ratios_used.back() == 16.0);
}

TEST_CASE("fit_lambda refuses starved rungs by name") {
  std::vector<SurvivalRecord> recs = {synthetic_record(1.0, 2.0, 0.5),
                                      synthetic_record(1.0, 4.0, 0.25),
                                      synthetic_record(1.0, 8.0, 0.125)};
  recs[1].hits = 29;
  recs[2].hits = 5;
  CHECK_THROWS_WITH_AS(
      exponent::fit_lambda(recs),
      "fit_lambda: refused, fewer than 30 hits at R = {4,8}; increase the "
      "trial budget",
      numerical_error);

  CHECK_THROWS_WITH_AS(
      exponent::fit_lambda({recs[0], recs[0]}),
      "fit_lambda: need >= 3 records", validation_error);

  std::vector<SurvivalRecord> mixed = {synthetic_record(1.0, 2.0, 0.5),
                                       synthetic_record(1.1, 4.0, 0.25),
                                       synthetic_record(1.0, 8.0, 0.125)};
  CHECK_THROWS_WITH_AS(exponent::fit_lambda(mixed),
                       "fit_lambda: records mix different thetas",
                       validation_error);

  // Survival growing with R is not a decay exponent.
  std::vector<SurvivalRecord> rising = {synthetic_record(1.0, 2.0, 0.1),
                                        synthetic_record(1.0, 4.0, 0.2),
                                        synthetic_record(1.0, 8.0, 0.4)};
  CHECK_THROWS_AS(exponent::fit_lambda(rising), numerical_error);
}

TEST_CASE("theta_c interpolation hits a synthetic crossing") {
  // lambda = 1/theta crosses 1/2 at theta = 2, a knot of the interpolant.
  const std::vector<double> thetas = {1.0, 2.0, 4.0};
  const std::vector<double> lambdas = {1.0, 0.5, 0.25};
  const std::vector<double> ses = {0.01, 0.01, 0.01};
  const exponent::ThetaC tc =
      exponent::theta_c_from_points(thetas, lambdas, ses);
  REQUIRE(tc.available);
  CHECK(tc.value == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(tc.lo <= tc.value);
  CHECK(tc.hi >= tc.value);
  CHECK(tc.lo > 1.0);
  CHECK(tc.hi < 4.0);

  // No crossing inside the fitted range: honest note instead of a number.
  const exponent::ThetaC none =
      exponent::theta_c_from_points({1.0, 2.0}, {0.4, 0.3}, {0.01, 0.01});
  CHECK_FALSE(none.available);
  CHECK(none.note.find("not bracketed") != std::string::npos);

  const exponent::ThetaC single = exponent::theta_c_from_points({1.0}, {0.6}, {0.01});
  CHECK_FALSE(single.available);
  CHECK(single.note.find("fewer than 2") != std::string::npos);

  CHECK_THROWS_AS(exponent::theta_c_from_points({1.0, 2.0}, {0.5}, {0.1, 0.1}),
                  validation_error);
}

TEST_CASE("asymptotic_check recovers synthetic regime slopes") {
  exponent::ExponentCurve curve;
  auto add = [&curve](double theta, double lambda, bool fitted) {
    exponent::CurveEntry e;
    e.theta = theta;
    e.fitted = fitted;
    e.fit.theta = theta;
    e.fit.lambda_hat = lambda;
    e.fit.se = 0.01 * lambda;  // constant relative error: equal weights
    curve.entries.push_back(e);
  };
  add(0.05, 0.0, false);  // unfitted entries are skipped
  for (double th : {0.1, 0.2, 0.3, 0.4}) add(th, std::pow(th, -4.0), true);
  for (double th : {1.5, 2.0, 2.5, 3.0}) add(th, std::exp(-0.8 * th * th), true);

  const exponent::AsymptoticReport rep =
      exponent::asymptotic_check(curve, 0.4, 1.5);
  REQUIRE(rep.small_available);
  CHECK(rep.small_slope == doctest::Approx(-4.0).epsilon(1e-9));
  REQUIRE(rep.large_available);
  CHECK(rep.large_slope == doctest::Approx(-0.8).epsilon(1e-9));

  // Regimes without three fitted points degrade to a note, not an error.
  const exponent::AsymptoticReport partial =
      exponent::asymptotic_check(curve, 0.05, 10.0);
  CHECK_FALSE(partial.small_available);
  CHECK_FALSE(partial.large_available);
  REQUIRE(partial.notes.size() == 2);
  CHECK(partial.notes[0].find("small-theta regime") != std::string::npos);
  CHECK(partial.notes[1].find("large-theta regime") != std::string::npos);
}

TEST_CASE("single-point survival matches the gaussian band probability") {
  // On the one-point grid {1} the statistic is |H(1)| / 1 with H(1) normal of
  // sd (2 pi)^(-1/4); theta equal to that sd gives P(|Z| <= 1) = 0.6826895.
  const double theta = 0.6316187777460644;
  const SurvivalRecord rec =
      exponent::estimate_survival(theta, 1.0, 8, 50000, 0x5eed5eedULL, 21);
  CHECK(rec.trials == 50000);
  CHECK(rec.hits >= 0);
  CHECK(rec.hits <= rec.trials);
  CHECK(rec.p_hat == doctest::Approx(0.6826894921370859).epsilon(0.013));
  CHECK(rec.ci_lo < rec.p_hat);
  CHECK(rec.ci_hi > rec.p_hat);
  CHECK_FALSE(rec.lower_bound_only);

  CHECK_THROWS_AS(exponent::estimate_survival(-1.0, 2.0, 8, 100, 0, 0),
                  validation_error);
  CHECK_THROWS_AS(exponent::estimate_survival(1.0, 0.5, 8, 100, 0, 0),
                  validation_error);
  CHECK_THROWS_AS(exponent::estimate_survival(1.0, 2.0, 8, 0, 0, 0),
                  validation_error);
}

TEST_CASE("lambda_curve couples rungs and thetas monotonically") {
  const std::vector<double> thetas = {0.8, 1.2};
  const std::vector<double> ratios = {2.0, 4.0, 8.0};
  const exponent::ExponentCurve curve =
      exponent::lambda_curve(thetas, ratios, 8, 3000, 0x5eed5eedULL, 3);

  REQUIRE(curve.entries.size() == 2);
  CHECK(curve.ratios == ratios);
  CHECK(curve.trials == 3000);
  for (const exponent::CurveEntry& e : curve.entries) {
    REQUIRE(e.records.size() == 3);
    // One shared prefix-max statistic per path: survival can only shrink as
    // the window grows.
    CHECK(e.records[0].hits >= e.records[1].hits);
    CHECK(e.records[1].hits >= e.records[2].hits);
    for (const SurvivalRecord& r : e.records) {
      CHECK(r.theta == e.theta);
      CHECK(r.trials == 3000);
    }
  }
  // Wider band, more survivors, rung by rung.
  for (std::size_t k = 0; k < ratios.size(); ++k)
    CHECK(curve.entries[1].records[k].hits >= curve.entries[0].records[k].hits);

  // Determinism: an identical call reproduces every count.
  const exponent::ExponentCurve again =
      exponent::lambda_curve(thetas, ratios, 8, 3000, 0x5eed5eedULL, 3);
  for (std::size_t i = 0; i < curve.entries.size(); ++i)
    for (std::size_t k = 0; k < ratios.size(); ++k)
      CHECK(curve.entries[i].records[k].hits ==
            again.entries[i].records[k].hits);
}

TEST_CASE("lambda_curve validates its ladder") {
  CHECK_THROWS_AS(exponent::lambda_curve({}, {2.0, 4.0, 8.0}, 8, 100, 0, 0),
                  validation_error);
  CHECK_THROWS_AS(
      exponent::lambda_curve({1.2, 0.8}, {2.0, 4.0, 8.0}, 8, 100, 0, 0),
      validation_error);
  CHECK_THROWS_AS(exponent::lambda_curve({1.0}, {}, 8, 100, 0, 0),
                  validation_error);
  CHECK_THROWS_AS(exponent::lambda_curve({1.0}, {2.0, 4.0, 8.0}, 8, 0, 0, 0),
                  validation_error);
  // 3 is not a point of the 2^(k/8) ladder.
  CHECK_THROWS_WITH_AS(
      exponent::lambda_curve({1.0}, {2.0, 3.0, 8.0}, 8, 100, 0, 0),
      "lambda_curve: ratio does not land on the ladder grid", validation_error);
}

TEST_CASE("smallball geometry is derived from each epsilon") {
  exponent::SmallballConfig cfg;
  cfg.theta = 1.0;
  cfg.eps_list = {std::ldexp(1.0, -4), std::ldexp(1.0, -6)};
  cfg.f_exponent = 0.5;
  cfg.trials = 600;
  cfg.sigma = spde::SigmaSpec::bounded_sin(1.0 / std::sin(1.0), 1.0);
  cfg.checkpoint_density = 4;
  cfg.bottom_steps = 4;
  cfg.master_seed = 0x5eed5eedULL;
  cfg.stream = 11;

  const exponent::SmallballReport rep = exponent::smallball_u(cfg);
  CHECK(rep.theta == 1.0);
  CHECK(rep.f_exponent == 0.5);
  REQUIRE(rep.points.size() == 2);
  for (const exponent::SmallballPoint& p : rep.points) {
    CHECK(p.f_value == doctest::Approx(std::sqrt(p.eps)).epsilon(1e-15));
    CHECK(p.dx == doctest::Approx(2.0 * std::sqrt(p.dt)).epsilon(1e-15));
    CHECK(p.dt <= p.eps * p.f_value / double(cfg.bottom_steps));
    CHECK(p.window_lo == doctest::Approx(p.eps * p.f_value).epsilon(1e-12));
    CHECK(p.window_hi == doctest::Approx(p.eps).epsilon(1e-12));
    CHECK(p.trials == 600);
    CHECK(p.hits >= 0);
    CHECK(p.hits <= p.trials);
    CHECK(p.p_hat == doctest::Approx(double(p.hits) / 600.0));
    CHECK(p.gauss_hits >= 0);
    CHECK(p.gauss_hits <= p.trials);
  }
  // Longer windows kill more paths; both fields decay, so both log-slopes
  // against log f come out positive (well separated at this sample size).
  CHECK(rep.points[0].hits > rep.points[1].hits);
  CHECK(rep.slope > 0.0);
  CHECK(rep.gauss_slope > 0.0);

  const exponent::SmallballReport again = exponent::smallball_u(cfg);
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    CHECK(rep.points[i].hits == again.points[i].hits);
    CHECK(rep.points[i].gauss_hits == again.points[i].gauss_hits);
  }
}

TEST_CASE("smallball validates its knobs") {
  exponent::SmallballConfig cfg;
  cfg.eps_list = {0.25};
  cfg.sigma = spde::SigmaSpec::constant(1.0);
  cfg.trials = 10;

  exponent::SmallballConfig bad = cfg;
  bad.theta = 0.0;
  CHECK_THROWS_AS(exponent::smallball_u(bad), validation_error);
  bad = cfg;
  bad.f_exponent = 1.0;
  CHECK_THROWS_AS(exponent::smallball_u(bad), validation_error);
  bad = cfg;
  bad.eps_list = {};
  CHECK_THROWS_AS(exponent::smallball_u(bad), validation_error);
  bad = cfg;
  bad.eps_list = {1.5};
  CHECK_THROWS_AS(exponent::smallball_u(bad), validation_error);
  bad = cfg;
  bad.trials = 0;
  CHECK_THROWS_AS(exponent::smallball_u(bad), validation_error);
  bad = cfg;
  bad.bottom_steps = 1;
  CHECK_THROWS_AS(exponent::smallball_u(bad), validation_error);
  bad = cfg;
  bad.sigma = spde::SigmaSpec::constant(0.0);
  CHECK_THROWS_AS(exponent::smallball_u(bad), validation_error);
}
