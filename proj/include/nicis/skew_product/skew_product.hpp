#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "nicis/fixed_point.hpp"
#include "nicis/skew_product/harmonic.hpp"
#include "nicis/skew_product/phi_series.hpp"

namespace nicis {

struct OrbitSample {
  std::int64_t m;
  Angle x;          // x_m = x_0 + m alpha
  double dy;        // y_m - y_0
};

struct OrbitTrace {
  AnnulusPoint start;
  std::int64_t horizon = 0;
  std::vector<OrbitSample> samples;
  double y_min = 0.0;
  double y_max = 0.0;
};

// F(x, y) = (x + alpha, y + phi(x)).
class SkewProduct {
 public:
  explicit SkewProduct(PhiSeries phi) : phi_(std::move(phi)) {}

  const PhiSeries& phi() const { return phi_; }
  Angle alpha() const { return phi_.alpha(); }

  AnnulusPoint apply(const AnnulusPoint& p) const { return {p.x + alpha(), p.y + phi_.eval(p.x.frac)}; }

  AnnulusPoint apply_inverse(const AnnulusPoint& p) const {
    const LiftedAngle x = p.x - alpha();
    return {x, p.y - phi_.eval(x.frac)};
  }

  // m steps (m < 0 runs the inverse); a sample every record_stride steps plus the last one.
  OrbitTrace iterate(const AnnulusPoint& p, std::int64_t m, std::int64_t record_stride = 1) const {
    if (record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
    OrbitTrace tr;
    tr.start = p;
    tr.horizon = m;
    tr.y_min = tr.y_max = p.y;
    tr.samples.push_back({0, p.x.frac, 0.0});
    const std::int64_t steps = m >= 0 ? m : -m;
    const int dir = m >= 0 ? 1 : -1;
    // Forward: y_{i+1} = y_i + phi(x_i). Backward: y_{-(i+1)} = y_{-i} - phi(x_0 - (i+1) alpha).
    const Angle x0 = dir > 0 ? p.x.frac : p.x.frac - alpha();
    const Angle step = dir > 0 ? alpha() : -alpha();
    HarmonicStream s(phi_.phi_harmonics(), x0, step);
    CompensatedSum acc;
    for (std::int64_t i = 1; i <= steps; ++i) {
      acc.add(dir * s.value());
      s.advance();
      const double dy = acc.value();
      const double y = p.y + dy;
      tr.y_min = std::min(tr.y_min, y);
      tr.y_max = std::max(tr.y_max, y);
      if (i % record_stride == 0 || i == steps)
        tr.samples.push_back({dir * i, p.x.frac + alpha().times(static_cast<std::int64_t>(dir * i)), dy});
    }
    return tr;
  }

 private:
  PhiSeries phi_;
};

// sum_{i<m} phi(x + i alpha); for m < 0, -sum_{i=1}^{|m|} phi(x - i alpha).
inline double birkhoff_sum_direct(const PhiSeries& phi, Angle x, std::int64_t m) {
  if (m == 0) return 0.0;
  const int dir = m > 0 ? 1 : -1;
  const std::int64_t steps = m > 0 ? m : -m;
  const Angle x0 = dir > 0 ? x : x - phi.alpha();
  const Angle step = dir > 0 ? phi.alpha() : -phi.alpha();
  HarmonicStream s(phi.phi_harmonics(), x0, step);
  CompensatedSum acc;
  for (std::int64_t i = 0; i < steps; ++i) {
    acc.add(s.value());
    s.advance();
  }
  return dir * acc.value();
}

// h(x + m alpha) - h(x), any integer m (reduced mod 2^128).
inline double birkhoff_sum_closed(const PhiSeries& phi, Angle x, const BigInt& m) {
  const HarmonicSum& h = phi.h_harmonics();
  return h.eval(x + phi.alpha().times(m)) - h.eval(x);
}
inline double birkhoff_sum_closed(const PhiSeries& phi, Angle x, std::int64_t m) {
  const HarmonicSum& h = phi.h_harmonics();
  return h.eval(x + phi.alpha().times(m)) - h.eval(x);
}

inline AnnulusPoint involution(const AnnulusPoint& p) {
  return {LiftedAngle{-p.x.turns - (p.x.frac.raw() != 0 ? 1 : 0), -p.x.frac}, -p.y};
}

// max over sampled orbits and steps <= m of |J F J F (p) - p|.
inline double involution_residual(const SkewProduct& F, std::size_t sample_count, std::int64_t m,
                                  std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ydist(-1.0, 1.0);
  double worst = 0.0;
  for (std::size_t s = 0; s < sample_count; ++s) {
    const u128 raw = (static_cast<u128>(rng()) << 64) | rng();
    AnnulusPoint p{LiftedAngle{0, Angle::from_raw(raw)}, ydist(rng)};
    for (std::int64_t k = 0; k < m; ++k) {
      const AnnulusPoint q = involution(F.apply(involution(F.apply(p))));
      const double dx = std::fabs(q.x.minus(p.x));
      const double dy = std::fabs(q.y - p.y);
      worst = std::max(worst, std::max(dx, dy));
      p = F.apply(p);
    }
  }
  return worst;
}

// |trapezoid rule for the mean of phi| on `grid` equispaced points.
inline double mean_residual(const PhiSeries& phi, std::uint64_t grid) {
  if (grid < 1) throw std::invalid_argument("grid must be >= 1");
  const Angle step = Angle::from_raw(static_cast<u128>(-1) / grid + 1);
  HarmonicStream s(phi.phi_harmonics(), Angle{}, step);
  CompensatedSum acc;
  for (std::uint64_t i = 0; i < grid; ++i) {
    acc.add(s.value());
    s.advance();
  }
  return std::fabs(acc.value() / static_cast<double>(grid));
}

// Default grid 32 q_N, capped at 2^24 and nudged off multiples of the q_n.
inline std::uint64_t default_mean_grid(const PhiSeries& phi) {
  if (phi.n_terms() == 0) return 16;
  const BigInt target = 32 * phi.terms().back().q;
  std::uint64_t g = target > (1u << 24) ? (1u << 24) : static_cast<std::uint64_t>(target);
  auto divides_some = [&](std::uint64_t m) {
    for (const auto& t : phi.terms())
      if (t.q % m == 0) return true;
    return false;
  };
  while (divides_some(g)) ++g;
  return g;
}

inline double mean_residual(const PhiSeries& phi) { return mean_residual(phi, default_mean_grid(phi)); }

// Quadrature of |phi'| over one period (midpoint rule on `grid` points).
inline double total_variation(const PhiSeries& phi, std::uint64_t grid) {
  const Angle step = Angle::from_raw(static_cast<u128>(-1) / grid + 1);
  HarmonicStream s(phi.phi_harmonics(), Angle::from_raw(step.raw() >> 1), step);
  CompensatedSum acc;
  for (std::uint64_t i = 0; i < grid; ++i) {
    acc.add(std::fabs(s.derivative()));
    s.advance();
  }
  return acc.value() / static_cast<double>(grid);
}

// Grid resolving the highest frequency with ~64 points per oscillation, capped.
inline std::uint64_t default_variation_grid(const PhiSeries& phi, std::uint64_t cap = 1u << 25) {
  if (phi.n_terms() == 0) return 64;
  const BigInt target = 64 * phi.terms().back().q;
  return target > cap ? cap : static_cast<std::uint64_t>(target);
}

}  // namespace nicis
