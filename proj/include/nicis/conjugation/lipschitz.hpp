#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "nicis/conjugation/kmap.hpp"
#include "nicis/fixed_point.hpp"
#include "nicis/parallel.hpp"

namespace nicis {

struct LipschitzOptions {
  double fd_step = 1e-6;
  std::size_t refine_top = 8;   // local pattern search around this many grid maxima
  double refine_start = 4e-3;   // initial search radius
  double refine_stop = 1e-5;
  int refine_max_moves = 64;
  double x_scale = 1.0;         // x radii and steps are multiplied by this (1/q on a q-fold lift)
};

namespace detail {

inline double op_norm2(double a, double b, double c, double d) {
  const double s = a * a + b * b + c * c + d * d, det = a * d - b * c;
  return std::sqrt(0.5 * (s + std::sqrt(std::max(0.0, s * s - 4.0 * det * det))));
}

// Central-difference Jacobian norm of f at p; x displacements read on the lift.
template <class F>
double stretch_at(const F& f, const AnnulusPoint& p, double h, double x_scale = 1.0) {
  auto at = [&](double dx, double dy) { return f(AnnulusPoint{p.x.advanced(dx), p.y + dy}); };
  const double hx = h * x_scale;
  const AnnulusPoint xp = at(hx, 0), xm = at(-hx, 0), yp = at(0, h), ym = at(0, -h);
  const double a = xp.x.minus(xm.x) / (2 * hx), c = (xp.y - xm.y) / (2 * hx);
  const double b = yp.x.minus(ym.x) / (2 * h), d = (yp.y - ym.y) / (2 * h);
  return op_norm2(a, b, c, d);
}

}  // namespace detail

// L(f): largest finite-difference operator norm over the grid, sharpened by a pattern search
// around the best grid points. An area-preserving map has L >= 1; a smaller estimate is a bug.
template <class F>
double lipschitz_estimate(const F& f, const std::vector<AnnulusPoint>& grid, const LipschitzOptions& opt = {}) {
  if (grid.empty()) throw std::invalid_argument("empty Lipschitz grid");
  std::vector<double> s(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { s[i] = detail::stretch_at(f, grid[i], opt.fd_step, opt.x_scale); });
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t top = std::min(opt.refine_top, grid.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(top), order.end(),
                    [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  std::vector<double> refined(top);
  parallel_for(top, [&](std::size_t t) {
    AnnulusPoint p = grid[order[t]];
    double best = s[order[t]];
    int moves = 0;
    for (double r = opt.refine_start; r >= opt.refine_stop && moves < opt.refine_max_moves;) {
      bool moved = false;
      const double rx = r * opt.x_scale;
      for (auto [dx, dy] : {std::pair{rx, 0.0}, std::pair{-rx, 0.0}, std::pair{0.0, r}, std::pair{0.0, -r}}) {
        const AnnulusPoint c{p.x.advanced(dx), std::clamp(p.y + dy, -1.0, 1.0)};
        const double v = detail::stretch_at(f, c, opt.fd_step, opt.x_scale);
        if (v > best) {
          best = v;
          p = c;
          moved = true;
          ++moves;
          break;
        }
      }
      if (!moved) r *= 0.5;
    }
    refined[t] = best;
  });
  double L = *std::max_element(s.begin(), s.end());
  for (double v : refined) L = std::max(L, v);
  if (L < 1.0 - 1e-6)
    throw std::logic_error("Lipschitz estimate " + std::to_string(L) + " < 1 for an area-preserving map");
  return std::max(L, 1.0);
}

// Grid for L(k): uniform in [0,1) x [-outer, outer], refined in the two transition strips.
inline std::vector<AnnulusPoint> kmap_lipschitz_grid(const KMap& k, std::size_t nx = 48, std::size_t ny = 32,
                                                     std::size_t ny_strip = 48) {
  std::vector<AnnulusPoint> g;
  const double d = k.cutoff().d(), outer = k.cutoff().outer();
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(nx);
    for (std::size_t j = 0; j < ny; ++j)
      g.push_back(AnnulusPoint::make(x, -outer + 2.0 * outer * (static_cast<double>(j) + 0.5) / static_cast<double>(ny)));
    for (std::size_t j = 0; j < ny_strip; ++j) {
      const double y = d - k.c() + (outer - d + k.c()) * (static_cast<double>(j) + 0.5) / static_cast<double>(ny_strip);
      g.push_back(AnnulusPoint::make(x, y));
      g.push_back(AnnulusPoint::make(x, -y));
    }
  }
  return g;
}

// Grid over one fundamental cell [0, 1/q) of a q-fold lift.
inline std::vector<AnnulusPoint> lifted_lipschitz_grid(const KMap& k, double q, std::size_t nx = 48,
                                                       std::size_t ny = 32, std::size_t ny_strip = 48) {
  auto g = kmap_lipschitz_grid(k, nx, ny, ny_strip);
  for (auto& p : g) p.x = LiftedAngle::from_double(p.x.to_double() / q);
  return g;
}

}  // namespace nicis
