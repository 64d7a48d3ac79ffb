#include <doctest.h>

#include <cmath>
#include <vector>

#include "slowheat/errors.hpp"
#include "slowheat/stats.hpp"

using namespace slowheat;

TEST_CASE("wilson interval behaves at the edges") {
  const auto mid = stats::wilson_ci(50, 100);
  CHECK(mid.lo > 0.40);
  CHECK(mid.hi < 0.60);
  CHECK(mid.lo < 0.5);
  CHECK(mid.hi > 0.5);

  const auto none = stats::wilson_ci(0, 100);
  CHECK(none.lo == 0.0);
  CHECK(none.hi > 0.0);
  CHECK(none.hi < 0.05);

  const auto all = stats::wilson_ci(100, 100);
  CHECK(all.hi == 1.0);
  CHECK(all.lo < 1.0);
  CHECK(all.lo > 0.95);

  // Textbook value: 8/10 with z = 1.96 gives roughly [0.49, 0.94].
  const auto text = stats::wilson_ci(8, 10);
  CHECK(text.lo == doctest::Approx(0.4901625).epsilon(1e-3));
  CHECK(text.hi == doctest::Approx(0.9433178).epsilon(1e-3));

  CHECK_THROWS_AS(stats::wilson_ci(5, 0), validation_error);
  CHECK_THROWS_AS(stats::wilson_ci(11, 10), validation_error);
}

TEST_CASE("weighted least squares recovers exact lines") {
  const std::vector<double> x = {0.0, 1.0, 2.0, 3.0, 4.0};
  std::vector<double> y;
  for (double xi : x) y.push_back(3.5 - 0.75 * xi);
  const std::vector<double> w = {1.0, 2.0, 0.5, 4.0, 1.5};
  const auto fit = stats::wls_line(x, y, w);
  CHECK(fit.intercept == doctest::Approx(3.5).epsilon(1e-14));
  CHECK(fit.slope == doctest::Approx(-0.75).epsilon(1e-14));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  // Known-variance standard error: unit weights over x = 0..4 give
  // se_slope = 1/sqrt(Sxx) = 1/sqrt(10).
  const auto unit = stats::wls_line(x, y, {1, 1, 1, 1, 1});
  CHECK(unit.se_slope == doctest::Approx(1.0 / std::sqrt(10.0)).epsilon(1e-12));

  CHECK_THROWS_AS(stats::wls_line(x, y, {1, 1, -1, 1, 1}), validation_error);
  CHECK_THROWS_AS(stats::wls_line({1.0, 1.0}, {0.0, 1.0}, {1.0, 1.0}),
                  validation_error);
}

TEST_CASE("ordinary least squares scales errors by residuals") {
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  const std::vector<double> y = {2.0, 4.1, 5.9, 8.0};
  const auto fit = stats::ols_line(x, y);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(0.02));
  CHECK(fit.se_slope > 0.0);
  CHECK(fit.r_squared > 0.99);
  // Exact data give zero residual error.
  const auto exact = stats::ols_line({0.0, 1.0, 2.0}, {1.0, 3.0, 5.0});
  CHECK(exact.slope == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(exact.se_slope == doctest::Approx(0.0));
}

TEST_CASE("monotone cubic interpolation and solving") {
  // Strictly decreasing data; the interpolant must stay decreasing.
  const std::vector<double> x = {1.0, 2.0, 4.0, 8.0};
  const std::vector<double> y = {1.0, 0.5, 0.25, 0.125};
  stats::MonotoneCubic mc(x, y);
  CHECK(mc(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mc(8.0) == doctest::Approx(0.125).epsilon(1e-14));
  double prev = mc(1.0);
  for (double t = 1.05; t <= 8.0; t += 0.05) {
    const double v = mc(t);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
  // Data are samples of 1/x; the crossing of 0.5 is exactly at a node.
  const auto root = mc.solve(0.5);
  REQUIRE(root.has_value());
  CHECK(*root == doctest::Approx(2.0).epsilon(1e-9));
  // Values outside the data range are not bracketed.
  CHECK_FALSE(mc.solve(2.0).has_value());
  CHECK_FALSE(mc.solve(0.01).has_value());
  CHECK_THROWS_AS(stats::MonotoneCubic({1.0, 1.0}, {0.0, 1.0}),
                  validation_error);
}

TEST_CASE("batch means standard error") {
  // Constant values: zero spread.
  const auto flat = stats::batch_se(std::vector<double>(100, 2.5), 10);
  CHECK(flat.mean == doctest::Approx(2.5));
  CHECK(flat.se == doctest::Approx(0.0));
  // Alternating values: batch means of size 2 are constant as well.
  std::vector<double> alt;
  for (int i = 0; i < 100; ++i) alt.push_back(i % 2 ? 1.0 : -1.0);
  const auto a = stats::batch_se(alt, 50);
  CHECK(a.mean == doctest::Approx(0.0));
  CHECK(a.se == doctest::Approx(0.0));
  // A linear drift has a known batch-mean spread.
  std::vector<double> lin;
  for (int i = 0; i < 100; ++i) lin.push_back(double(i));
  const auto l = stats::batch_se(lin, 10);
  CHECK(l.mean == doctest::Approx(49.5));
  CHECK(l.se > 0.0);
  CHECK_THROWS_AS(stats::batch_se(lin, 1), validation_error);
  CHECK_THROWS_AS(stats::batch_se(lin, 101), validation_error);
}

TEST_CASE("mean and sample variance") {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  CHECK(stats::mean(v) == doctest::Approx(2.5));
  CHECK(stats::sample_variance(v) == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
}
