#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "nicis/skew_product/skew_product.hpp"

namespace nicis {

struct DensityResult {
  double best_eps = std::numeric_limits<double>::infinity();  // inf if no ladder level was reached
  std::vector<double> per_trial;
  double Y = 1.0;
  std::int64_t horizon = 0;
};

// Finest eps on the ladder Y * 2^(-l/2) such that an orbit of (x, 0) visits every
// eps x eps cell of S^1 x [-Y, Y]; that makes the orbit eps-dense in the sup metric.
inline DensityResult dense_orbit_search(const SkewProduct& F, double Y, std::int64_t horizon, int trials,
                                        std::uint64_t seed = 1, int levels = 24) {
  if (!(Y > 0) || horizon < 1 || trials < 1) throw std::invalid_argument("bad dense_orbit_search arguments");
  struct Level {
    double eps;
    std::uint64_t nx, ny;
    std::vector<std::uint8_t> hit;
    std::uint64_t remaining;
  };
  DensityResult res;
  res.Y = Y;
  res.horizon = horizon;
  std::mt19937_64 rng(seed);
  const HarmonicSum& h = F.phi().h_harmonics();
  for (int t = 0; t < trials; ++t) {
    std::vector<Level> lv;
    for (int l = 0; l <= levels; ++l) {
      const double eps = Y * std::pow(2.0, -0.5 * l);
      const auto nx = static_cast<std::uint64_t>(std::ceil(1.0 / eps - 1e-12));
      const auto ny = static_cast<std::uint64_t>(std::ceil(2.0 * Y / eps - 1e-12));
      if (nx * ny > (1ULL << 26)) break;
      lv.push_back({eps, nx, ny, std::vector<std::uint8_t>(nx * ny, 0), nx * ny});
    }
    const Angle x0 = Angle::from_raw((static_cast<u128>(rng()) << 64) | rng());
    const double h0 = h.eval(x0);
    HarmonicStream s(h, x0, F.alpha());
    Angle x = x0;
    for (std::int64_t m = 0; m < horizon; ++m) {
      const double y = s.value() - h0;
      if (y >= -Y && y < Y) {
        const double xd = x.to_double();
        for (auto& L : lv) {
          if (L.remaining == 0) continue;
          const auto ix = std::min<std::uint64_t>(static_cast<std::uint64_t>(xd * L.nx), L.nx - 1);
          const auto iy = std::min<std::uint64_t>(static_cast<std::uint64_t>((y + Y) / (2.0 * Y) * L.ny), L.ny - 1);
          auto& cell = L.hit[iy * L.nx + ix];
          if (!cell) {
            cell = 1;
            --L.remaining;
          }
        }
      }
      s.advance();
      x += F.alpha();
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& L : lv)
      if (L.remaining == 0) best = std::min(best, L.eps);
    res.per_trial.push_back(best);
    res.best_eps = std::min(res.best_eps, best);
  }
  return res;
}

// Distinct gap lengths of {j alpha : 0 <= j < m} on the circle, ascending (three-distance check).
inline std::vector<double> circle_orbit_gaps(Angle alpha, std::uint64_t m) {
  std::vector<u128> pts(m);
  Angle x;
  for (std::uint64_t j = 0; j < m; ++j) {
    pts[j] = x.raw();
    x += alpha;
  }
  std::sort(pts.begin(), pts.end());
  std::vector<u128> gaps;
  for (std::uint64_t j = 0; j < m; ++j) gaps.push_back(pts[(j + 1) % m] - pts[j]);
  std::sort(gaps.begin(), gaps.end());
  gaps.erase(std::unique(gaps.begin(), gaps.end()), gaps.end());
  std::vector<double> out;
  for (u128 g : gaps) out.push_back(Angle::from_raw(g).to_double());
  if (m == 1) out = {1.0};
  return out;
}

// Circle-factor density of a rigid rotation orbit: half the largest gap.
inline double circle_density(Angle alpha, std::uint64_t m) {
  auto g = circle_orbit_gaps(alpha, m);
  return g.back() / 2.0;
}

}  // namespace nicis
