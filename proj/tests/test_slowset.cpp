#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "slowheat/errors.hpp"
#include "slowheat/slowset.hpp"

using namespace slowheat;
using slowset::PointSet;
using slowset::SlowSetCensus;

TEST_CASE("detect_slow thresholds and maps sites onto the unit interval") {
  spde::FieldStats fs;
  fs.meta.dx = 0.25;
  fs.positions = {-0.5, -0.25, 0.0, 0.25, 0.5};
  fs.stat = {0.2, 0.05, 0.01, 0.3, 0.04};

  const PointSet set = slowset::detect_slow(fs, 0.1, 1.0);
  CHECK(set.points == std::vector<double>{0.25, 0.5, 1.0});
  CHECK(set.resolution == 0.25);  // dx over the analysis span

  // The threshold scales with |sigma(1)|.
  const PointSet wide = slowset::detect_slow(fs, 0.1, -2.0);
  CHECK(wide.points == std::vector<double>{0.0, 0.25, 0.5, 1.0});

  CHECK_THROWS_AS(slowset::detect_slow(fs, 0.0, 1.0), validation_error);
  CHECK_THROWS_AS(slowset::detect_slow(fs, 0.1, 0.0), validation_error);
  spde::FieldStats bad = fs;
  bad.stat.pop_back();
  CHECK_THROWS_AS(slowset::detect_slow(bad, 0.1, 1.0), validation_error);

  // A single surviving site degrades to the trivial unit-resolution set.
  spde::FieldStats solo;
  solo.meta.dx = 0.25;
  solo.positions = {0.125};
  solo.stat = {0.01};
  const PointSet p = slowset::detect_slow(solo, 1.0, 1.0);
  CHECK(p.points == std::vector<double>{0.0});
  CHECK(p.resolution == 1.0);
}

TEST_CASE("box_census counts dyadic intervals with a left-closed first box") {
  PointSet set;
  set.resolution = std::ldexp(1.0, -6);

  set.points = {0.3};
  SlowSetCensus census = slowset::box_census(set, 6);
  REQUIRE(census.counts.size() == 7);
  for (long c : census.counts) CHECK(c == 1);

  // 0 belongs to the first box; 0.5 sits at the closed right end of box 0 at
  // level 1, so 0.25 shares it while 0.75 does not.
  set.points = {0.0};
  CHECK(slowset::box_census(set, 3).counts ==
        std::vector<long>{1, 1, 1, 1});
  set.points = {0.25, 0.5};
  CHECK(slowset::box_census(set, 1).counts[1] == 1);
  set.points = {0.5, 0.75};
  CHECK(slowset::box_census(set, 1).counts[1] == 2);

  // Full occupancy at the native resolution.
  set.points.clear();
  for (int k = 0; k < 16; ++k) set.points.push_back((k + 0.5) / 16.0);
  set.resolution = 1.0 / 16.0;
  census = slowset::box_census(set, 4);
  CHECK(census.counts == std::vector<long>{1, 2, 4, 8, 16});

  // An empty detection yields an all-zero census rather than an error.
  set.points.clear();
  CHECK(slowset::box_census(set, 2).counts == std::vector<long>{0, 0, 0});
}

TEST_CASE("box_census occupancy nests across levels") {
  PointSet set;
  set.resolution = std::ldexp(1.0, -10);
  std::uint64_t s = 12345;
  for (int i = 0; i < 200; ++i) {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    set.points.push_back(double(s >> 11) * 0x1.0p-53);
  }
  const SlowSetCensus census = slowset::box_census(set, 10);
  CHECK(census.counts[0] == 1);
  for (std::size_t n = 0; n + 1 < census.counts.size(); ++n) {
    CHECK(census.counts[n + 1] >= census.counts[n]);      // refining splits
    CHECK(census.counts[n + 1] <= 2 * census.counts[n]);  // at most in two
  }
}

TEST_CASE("box_census validates resolution and range") {
  PointSet set;
  set.points = {0.5};
  set.resolution = 0.125;
  CHECK_THROWS_AS(slowset::box_census(set, -1), validation_error);
  try {
    slowset::box_census(set, 4);  // 2^-4 is finer than the native spacing
    FAIL("expected a resolution rejection");
  } catch (const validation_error& e) {
    CHECK(std::string(e.what()).find("native resolution") != std::string::npos);
  }
  set.resolution = 0.0;
  CHECK_THROWS_AS(slowset::box_census(set, 2), validation_error);
  set.resolution = 0.125;
  set.points = {1.2};
  CHECK_THROWS_AS(slowset::box_census(set, 3), validation_error);
}

TEST_CASE("dim_fit recovers exact occupancy slopes") {
  SlowSetCensus full;
  full.counts = {1, 2, 4, 8, 16};
  const slowset::DimensionEstimate one =
      slowset::dim_fit(full, std::make_pair(0, 4));
  CHECK(one.slope == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(one.se == doctest::Approx(0.0));
  CHECK(one.n_lo == 0);
  CHECK(one.n_hi == 4);

  SlowSetCensus point;
  point.counts = {1, 1, 1, 1, 1};
  const slowset::DimensionEstimate zero =
      slowset::dim_fit(point, std::make_pair(0, 4));
  CHECK(zero.slope == 0.0);

  CHECK_THROWS_AS(slowset::dim_fit(full, std::make_pair(0, 5)),
                  validation_error);
  CHECK_THROWS_AS(slowset::dim_fit(full, std::make_pair(-1, 3)),
                  validation_error);
  CHECK_THROWS_AS(slowset::dim_fit(full, std::make_pair(2, 2)),
                  validation_error);
  CHECK_THROWS_AS(slowset::dim_fit(SlowSetCensus{}), validation_error);
}

TEST_CASE("dim_fit auto mode refuses a census with no usable window") {
  SlowSetCensus sparse;
  sparse.counts = {1, 2, 4, 5, 8, 9};
  CHECK_THROWS_WITH_AS(
      slowset::dim_fit(sparse),
      "dim_fit: no admissible level window (counts: 1 2 4 5 8 9); pass an "
      "explicit level range",
      numerical_error);
}

TEST_CASE("middle-thirds endpoints measure at the reference dimension") {
  // Eight refinement rounds of [0, 1] keeping the outer thirds; the 512
  // interval endpoints form a spacing-3^-8 set whose box dimension should
  // fit near log 2 / log 3.
  std::vector<double> lefts = {0.0};
  double w = 1.0;
  for (int round = 0; round < 8; ++round) {
    std::vector<double> next;
    for (double l : lefts) {
      next.push_back(l);
      next.push_back(l + 2.0 * w / 3.0);
    }
    lefts.swap(next);
    w /= 3.0;
  }
  PointSet set;
  for (double l : lefts) {
    set.points.push_back(l);
    set.points.push_back(l + w);
  }
  set.resolution = w;
  REQUIRE(set.points.size() == 512);

  const SlowSetCensus census = slowset::box_census(set, 12);
  CHECK(census.counts ==
        std::vector<long>{1, 2, 4, 6, 10, 16, 28, 42, 70, 102, 154, 240, 362});

  // Auto mode drops the sparse head and the saturated level 4 (10 > 2^3).
  const slowset::DimensionEstimate est = slowset::dim_fit(census);
  CHECK(est.n_lo == 5);
  CHECK(est.n_hi == 12);
  CHECK(est.slope == doctest::Approx(0.6328946340013328).epsilon(1e-12));
  CHECK(std::abs(est.slope - std::log(2.0) / std::log(3.0)) < 0.03);
  CHECK(est.r_squared > 0.995);
}

TEST_CASE("dimension_vs_theory propagates uncertainties and gates") {
  slowset::DimensionEstimate est;
  est.slope = 0.8;
  est.se = 0.05;
  exponent::ExponentFit lam;
  lam.theta = 1.4;
  lam.lambda_hat = 0.1;
  lam.se = 0.01;

  const slowset::DimensionComparison cmp =
      slowset::dimension_vs_theory(est, lam, 1.19);
  CHECK(cmp.dim_est == 0.8);
  CHECK(cmp.theory == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(cmp.theory_se == doctest::Approx(0.02).epsilon(1e-15));
  CHECK(cmp.gap == doctest::Approx(0.0));
  CHECK(cmp.gap_se ==
        doctest::Approx(std::sqrt(0.05 * 0.05 + 0.02 * 0.02)).epsilon(1e-12));
  CHECK(cmp.theta_c_known);
  CHECK(cmp.theta_at_least_theta_c);
  CHECK(cmp.note.find("exploratory comparison at finite resolution") !=
        std::string::npos);

  // Below the critical band the theory predicts emptiness; the note says so.
  lam.theta = 1.0;
  const slowset::DimensionComparison below =
      slowset::dimension_vs_theory(est, lam, 1.19);
  CHECK_FALSE(below.theta_at_least_theta_c);
  CHECK(below.note.find("below theta_c") != std::string::npos);

  lam.lambda_hat = 0.6;  // 1 - 2 lambda < 0
  const slowset::DimensionComparison neg =
      slowset::dimension_vs_theory(est, lam, 1.19);
  CHECK(neg.theory < 0.0);
  CHECK(neg.note.find("emptiness predicted") != std::string::npos);

  const slowset::DimensionComparison no_tc =
      slowset::dimension_vs_theory(est, lam, std::nullopt);
  CHECK_FALSE(no_tc.theta_c_known);
  CHECK(no_tc.note.find("gate check skipped") != std::string::npos);
}
