#include <doctest.h>

#include <cmath>
#include <vector>

#include "slowheat/errors.hpp"
#include "slowheat/gaussfield.hpp"
#include "slowheat/kernels.hpp"

using namespace slowheat;

TEST_CASE("geometric grid construction") {
  const auto g = gaussfield::build_grid(1.0, 4.0, 1);
  REQUIRE(g.times.size() == 3);
  CHECK(g.times[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.times[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g.times[2] == doctest::Approx(4.0).epsilon(1e-15));

  const auto big = gaussfield::build_grid(1.0, 1024.0, 32);
  CHECK(big.times.size() == 321);
  CHECK(big.times.front() == 1.0);
  CHECK(big.times.back() == 1024.0);
  const double ratio = std::pow(2.0, 1.0 / 32.0);
  for (std::size_t i = 1; i < big.times.size(); ++i)
    CHECK(big.times[i] / big.times[i - 1] ==
          doctest::Approx(ratio).epsilon(1e-10));

  CHECK_THROWS_AS(gaussfield::build_grid(0.0, 1.0, 4), validation_error);
  CHECK_THROWS_AS(gaussfield::build_grid(2.0, 1.0, 4), validation_error);
  CHECK_THROWS_AS(gaussfield::build_grid(1.0, 2.0, 0), validation_error);
  CHECK_THROWS_AS(gaussfield::custom_grid({2.0, 1.0}), validation_error);
  CHECK_THROWS_AS(gaussfield::custom_grid({}), validation_error);
}

TEST_CASE("covariance factor: closed-form cases") {
  const auto single = gaussfield::factor_covariance(gaussfield::custom_grid({1.0}));
  REQUIRE(single.lower.rows() == 1);
  // sqrt(var_h(1)) = (2 pi)^(-1/4)
  CHECK(single.lower(0, 0) ==
        doctest::Approx(0.6316187777460644).epsilon(1e-12));
  CHECK(single.jitter_applied == 0.0);

  const auto two = gaussfield::factor_covariance(gaussfield::custom_grid({1.0, 2.0}));
  const Eigen::MatrixXd m = two.lower * two.lower.transpose();
  CHECK(m(0, 0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(m(1, 1) == doctest::Approx(0.5641895835477563).epsilon(1e-12));
  CHECK(m(0, 1) == doctest::Approx(0.20650772012904176).epsilon(1e-12));
}

TEST_CASE("covariance factor reproduces the matrix on a working grid") {
  const auto grid = gaussfield::build_grid(1.0, 32.0, 3);
  REQUIRE(grid.times.size() == 16);
  const auto f = gaussfield::factor_covariance(grid);
  const Eigen::MatrixXd m = f.lower * f.lower.transpose();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      const double exact =
          kernels::cov_h_temporal(grid.times[std::size_t(i)],
                                  grid.times[std::size_t(j)]);
      CHECK(std::abs(m(i, j) - exact) <= 1e-8 * std::abs(exact));
    }
}

TEST_CASE("path sampling is deterministic in (seed, stream)") {
  const auto f = gaussfield::factor_covariance(gaussfield::build_grid(1.0, 8.0, 2));
  const auto a = gaussfield::sample_paths(f, 50, 123, 9);
  const auto b = gaussfield::sample_paths(f, 50, 123, 9);
  const auto c = gaussfield::sample_paths(f, 50, 123, 10);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  CHECK_THROWS_AS(gaussfield::sample_paths(f, 0, 1, 1), validation_error);
}

TEST_CASE("sampled variance matches the closed form") {
  const auto f = gaussfield::factor_covariance(gaussfield::custom_grid({1.0}));
  const long n = 40000;
  const auto batch = gaussfield::sample_paths(f, n, 0x5eed5eedULL, 2);
  const double var = batch.values.col(0).squaredNorm() / double(n);
  const double expect = 0.3989422804014327;
  // 5-sigma band on the sample variance of a Gaussian.
  CHECK(std::abs(var - expect) <= 5.0 * expect * std::sqrt(2.0 / double(n)));
}

TEST_CASE("survival indicator: single-point oracle and theta monotonicity") {
  const auto f = gaussfield::factor_covariance(gaussfield::custom_grid({1.0}));
  const long n = 50000;
  const auto batch = gaussfield::sample_paths(f, n, 0x5eed5eedULL, 3);
  const auto ind = gaussfield::survival_indicator(batch, 0.631619);
  long hits = 0;
  for (auto v : ind) hits += v;
  const double p = double(hits) / double(n);
  const double se = std::sqrt(0.682689 * (1.0 - 0.682689) / double(n));
  CHECK(std::abs(p - 0.682689) <= 4.0 * se);

  // Wider bands keep every surviving path, pathwise.
  const auto g32 = gaussfield::build_grid(1.0, 32.0, 3);
  const auto fb = gaussfield::factor_covariance(g32);
  const auto pb = gaussfield::sample_paths(fb, 2000, 7, 4);
  const auto narrow = gaussfield::survival_indicator(pb, 0.4);
  const auto wide = gaussfield::survival_indicator(pb, 0.8);
  for (std::size_t i = 0; i < narrow.size(); ++i)
    if (narrow[i]) CHECK(wide[i] == 1);
}

TEST_CASE("parabolic scaling of the grid covariance") {
  const auto grid = gaussfield::build_grid(0.5, 8.0, 2);
  CHECK(gaussfield::scaling_check(1.0, grid) == 0.0);
  CHECK(gaussfield::scaling_check(4.0, grid) <= 1e-12);
  CHECK(gaussfield::scaling_check(0.25, grid) <= 1e-12);
  CHECK_THROWS_AS(gaussfield::scaling_check(0.0, grid), validation_error);
}
