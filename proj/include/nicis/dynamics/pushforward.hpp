#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "nicis/skew_product/phi_series.hpp"

namespace nicis {

struct CellGrid {
  int cols = 50;
  int rows = 20;
  double Y = 2.0;
};

struct CoverageReport {
  std::size_t n_terms = 0;
  std::uint64_t samples = 0;
  CellGrid grid;
  std::vector<std::uint64_t> counts;         // rows * cols, row-major, row 0 at y = -Y
  std::vector<std::uint64_t> column_totals;  // every sample binned by x alone
  std::uint64_t outside = 0;                 // samples with |h| > Y
  double covered_fraction = 0.0;
  double chi2 = 0.0;
  double chi2_critical = 0.0;  // 0.99 quantile, cols - 1 degrees of freedom
  bool chi2_pass = false;
  bool marginal_3sigma_pass = false;

  std::uint64_t count(int row, int col) const { return counts[static_cast<std::size_t>(row) * grid.cols + col]; }
};

inline double covered_fraction(const std::vector<std::uint64_t>& counts) {
  if (counts.empty()) return 0.0;
  const auto hit = std::count_if(counts.begin(), counts.end(), [](std::uint64_t c) { return c > 0; });
  return static_cast<double>(hit) / static_cast<double>(counts.size());
}

// Bins (x, h_N(x)) for uniform x; one report per truncation N (the same x draws are reused for every N).
inline std::vector<CoverageReport> pushforward_histogram(const RotationNumber& alpha,
                                                         const std::vector<std::size_t>& n_values,
                                                         const CellGrid& grid, std::uint64_t sample_count,
                                                         std::uint64_t seed) {
  if (grid.cols < 2 || grid.rows < 1 || !(grid.Y > 0)) throw std::invalid_argument("bad cell grid");
  std::size_t n_max = 0;
  for (auto n : n_values) n_max = std::max(n_max, n);
  const PhiSeries full = n_max > 0 ? PhiSeries::build(alpha, n_max) : PhiSeries::zero(alpha);
  std::vector<CoverageReport> out;
  boost::math::chi_squared dist(grid.cols - 1);
  const double critical = boost::math::quantile(dist, 0.99);
  for (auto n : n_values) {
    const PhiSeries phi = full.truncated(n);
    const HarmonicSum& h = phi.h_harmonics();
    CoverageReport r;
    r.n_terms = n;
    r.samples = sample_count;
    r.grid = grid;
    r.counts.assign(static_cast<std::size_t>(grid.rows) * grid.cols, 0);
    r.column_totals.assign(grid.cols, 0);
    std::mt19937_64 rng(seed);
    for (std::uint64_t s = 0; s < sample_count; ++s) {
      const u128 raw = (static_cast<u128>(rng()) << 64) | rng();
      const Angle x = Angle::from_raw(raw);
      const int col = static_cast<int>((x.hi64() >> 32) * static_cast<std::uint64_t>(grid.cols) >> 32);
      ++r.column_totals[col];
      const double y = h.eval(x);
      const double t = (y + grid.Y) / (2.0 * grid.Y) * grid.rows;
      if (t < 0.0 || t >= grid.rows) {
        ++r.outside;
        continue;
      }
      ++r.counts[static_cast<std::size_t>(t) * grid.cols + col];
    }
    r.covered_fraction = covered_fraction(r.counts);
    const double expected = static_cast<double>(sample_count) / grid.cols;
    const double p = 1.0 / grid.cols;
    const double sigma = std::sqrt(static_cast<double>(sample_count) * p * (1.0 - p));
    r.marginal_3sigma_pass = true;
    for (auto c : r.column_totals) {
      const double d = static_cast<double>(c) - expected;
      r.chi2 += d * d / expected;
      if (std::fabs(d) > 3.0 * sigma) r.marginal_3sigma_pass = false;
    }
    r.chi2_critical = critical;
    r.chi2_pass = r.chi2 < critical;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace nicis
