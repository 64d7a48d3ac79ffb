#include "slowheat/gaussfield.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "slowheat/errors.hpp"
#include "slowheat/kernels.hpp"
#include "slowheat/rng.hpp"

namespace slowheat::gaussfield {

void TimeGrid::validate() const {
  if (times.empty()) throw validation_error("TimeGrid: empty grid");
  if (!(times.front() > 0.0))
    throw validation_error("TimeGrid: times must be positive");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw validation_error("TimeGrid: times must be strictly increasing");
  if (spacing == Spacing::geometric && times.size() >= 2) {
    const double r0 = times[1] / times[0];
    for (std::size_t i = 1; i + 1 < times.size(); ++i)
      if (std::abs(times[i + 1] / times[i] - r0) > 1e-12 * r0)
        throw validation_error("TimeGrid: geometric tag on non-geometric grid");
  }
}

TimeGrid build_grid(double a, double b, int points_per_octave) {
  if (!(a > 0.0)) throw validation_error("build_grid: a must be positive");
  if (!(b >= a)) throw validation_error("build_grid: need b >= a");
  if (points_per_octave < 1)
    throw validation_error("build_grid: density must be >= 1");
  TimeGrid g;
  g.spacing = TimeGrid::Spacing::geometric;
  g.points_per_octave = points_per_octave;
  if (b == a) {
    g.times = {a};
    return g;
  }
  const double octaves = std::log2(b / a);
  const long steps = std::lround(octaves * points_per_octave);
  // Non-dyadic spans still get a true geometric grid hitting both endpoints.
  const long n = std::max<long>(steps, 1);
  const double ratio = std::pow(b / a, 1.0 / double(n));
  g.times.reserve(std::size_t(n) + 1);
  for (long k = 0; k <= n; ++k)
    g.times.push_back(a * std::pow(ratio, double(k)));
  g.times.front() = a;  // exact endpoints
  g.times.back() = b;
  g.validate();
  return g;
}

TimeGrid custom_grid(std::vector<double> times) {
  TimeGrid g;
  g.spacing = TimeGrid::Spacing::custom;
  g.times = std::move(times);
  g.validate();
  return g;
}

namespace {

Eigen::MatrixXd covariance_matrix(const TimeGrid& grid) {
  const auto n = Eigen::Index(grid.times.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double c = kernels::cov_h_temporal(grid.times[std::size_t(i)],
                                               grid.times[std::size_t(j)]);
      m(i, j) = c;
      m(j, i) = c;
    }
  return m;
}

}  // namespace

CovFactor factor_covariance(const TimeGrid& grid, std::size_t size_cap) {
  grid.validate();
  if (grid.times.size() > size_cap)
    throw validation_error("factor_covariance: grid exceeds size cap");
  const Eigen::MatrixXd m = covariance_matrix(grid);
  const double max_diag = m.diagonal().maxCoeff();
  const double m_max = m.cwiseAbs().maxCoeff();
  for (double jitter_scale : {0.0, 1e-12, 1e-10}) {
    const double jitter = jitter_scale * max_diag;
    Eigen::MatrixXd shifted = m;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd lower = llt.matrixL();
    const double rep_err =
        ((lower * lower.transpose() - m).cwiseAbs().maxCoeff()) / m_max;
    if (rep_err > 1e-8) continue;
    CovFactor f;
    f.grid = grid;
    f.lower = std::move(lower);
    f.jitter_applied = jitter;
    return f;
  }
  throw numerical_error(
      "factor_covariance: factorization failed (n=" +
      std::to_string(grid.times.size()) +
      ", max diag=" + std::to_string(max_diag) +
      ", min diag=" + std::to_string(m.diagonal().minCoeff()) +
      ") after maximum jitter");
}

PathBatch sample_paths(const CovFactor& factor, long n_paths,
                       std::uint64_t master_seed, std::uint64_t stream) {
  if (n_paths < 1) throw validation_error("sample_paths: n_paths must be >= 1");
  const auto n_pts = Eigen::Index(factor.grid.times.size());
  Eigen::MatrixXd z(Eigen::Index(n_paths), n_pts);
  for (Eigen::Index i = 0; i < Eigen::Index(n_paths); ++i) {
    rng::NormalStream ns(master_seed,
                         rng::substream(stream, std::uint64_t(i)));
    for (Eigen::Index j = 0; j < n_pts; ++j) z(i, j) = ns.next();
  }
  PathBatch b;
  b.grid = factor.grid;
  b.values.noalias() = z * factor.lower.transpose();
  b.master_seed = master_seed;
  b.stream = stream;
  return b;
}

std::vector<std::uint8_t> survival_indicator(const PathBatch& batch,
                                             double theta) {
  if (!(theta > 0.0))
    throw validation_error("survival_indicator: theta must be positive");
  const auto n_paths = batch.values.rows();
  const auto n_pts = batch.values.cols();
  std::vector<double> band(static_cast<std::size_t>(n_pts));
  for (Eigen::Index j = 0; j < n_pts; ++j)
    band[std::size_t(j)] =
        theta * std::pow(batch.grid.times[std::size_t(j)], 0.25);
  std::vector<std::uint8_t> out(std::size_t(n_paths), 1);
  for (Eigen::Index i = 0; i < n_paths; ++i)
    for (Eigen::Index j = 0; j < n_pts; ++j)
      if (std::abs(batch.values(i, j)) > band[std::size_t(j)]) {
        out[std::size_t(i)] = 0;
        break;
      }
  return out;
}

double scaling_check(double c, const TimeGrid& grid) {
  if (!(c > 0.0)) throw validation_error("scaling_check: c must be positive");
  grid.validate();
  const double root_c = std::sqrt(c);
  double worst = 0.0;
  for (double ti : grid.times)
    for (double tj : grid.times) {
      const double dev = std::abs(kernels::cov_h_temporal(c * ti, c * tj) -
                                  root_c * kernels::cov_h_temporal(ti, tj));
      worst = std::max(worst, dev);
    }
  return worst;
}

}  // namespace slowheat::gaussfield
