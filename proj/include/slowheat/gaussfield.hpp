#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace slowheat::gaussfield {

struct TimeGrid {
  std::vector<double> times;  // strictly increasing, all > 0
  enum class Spacing { geometric, custom } spacing = Spacing::custom;
  int points_per_octave = 0;  // meaningful for geometric grids

  void validate() const;  // throws validation_error on violation
};

// Geometric grid from a to b inclusive with the requested per-octave density.
TimeGrid build_grid(double a, double b, int points_per_octave);

TimeGrid custom_grid(std::vector<double> times);

struct CovFactor {
  TimeGrid grid;
  Eigen::MatrixXd lower;      // L with L L^T = M (+ jitter I)
  double jitter_applied = 0.0;
};

// Cholesky factor of M[i][j] = cov_h_temporal(t_i, t_j), with a jitter ladder
// (1e-12 then 1e-10 of the max diagonal) for near-singular dense grids.
// Verifies entrywise reproduction to 1e-8 relative before returning.
CovFactor factor_covariance(const TimeGrid& grid, std::size_t size_cap = 8192);

struct PathBatch {
  TimeGrid grid;
  Eigen::MatrixXd values;  // n_paths x n_points
  std::uint64_t master_seed = 0;
  std::uint64_t stream = 0;
};

// values = Z L^T with Z standard normal; row i drawn from the substream
// (stream, i), so the batch is independent of any evaluation order.
PathBatch sample_paths(const CovFactor& factor, long n_paths,
                       std::uint64_t master_seed, std::uint64_t stream);

// Per-path indicator of |value| <= theta * t^(1/4) at every grid point.
std::vector<std::uint8_t> survival_indicator(const PathBatch& batch,
                                             double theta);

// Max over grid pairs of |cov(c t_i, c t_j) - sqrt(c) cov(t_i, t_j)|.
double scaling_check(double c, const TimeGrid& grid);

}  // namespace slowheat::gaussfield
