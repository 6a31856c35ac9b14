#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nicis/skew_product/skew_product.hpp"

namespace nicis {

enum class Verdict { DenseLike, PositiveLike, NegativeLike, Undecided };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::DenseLike: return "DenseLike";
    case Verdict::PositiveLike: return "PositiveLike";
    case Verdict::NegativeLike: return "NegativeLike";
    case Verdict::Undecided: return "Undecided";
  }
  return "?";
}

inline Verdict mirror(Verdict v) {
  if (v == Verdict::PositiveLike) return Verdict::NegativeLike;
  if (v == Verdict::NegativeLike) return Verdict::PositiveLike;
  return v;
}

struct ClassificationReport {
  Angle x;
  Verdict verdict = Verdict::Undecided;
  double y_min = 0.0;
  double y_max = 0.0;
  std::vector<double> strip_returns;  // y at times m != 0 with ||m alpha|| < strip_eps, both directions
  std::int64_t horizon = 0;
  double strip_eps = 0.0;
  double a = 0.0;
  double b = 0.0;
  double strip_tol = 0.0;
};

// Verdict as a pure function of the recorded data.
inline Verdict derive_verdict(const ClassificationReport& r) {
  bool below = false, above = false, all_nonneg = true, all_nonpos = true;
  for (double y : r.strip_returns) {
    below = below || y < -r.a;
    above = above || y > r.a;
    all_nonneg = all_nonneg && y >= -r.strip_tol;
    all_nonpos = all_nonpos && y <= r.strip_tol;
  }
  if (below && above) return Verdict::DenseLike;
  const bool pos = all_nonneg && r.y_max > r.b;
  const bool neg = all_nonpos && r.y_min < -r.b;
  if (pos && !neg) return Verdict::PositiveLike;
  if (neg && !pos) return Verdict::NegativeLike;
  return Verdict::Undecided;
}

namespace detail {

// Scans (x,0) to +-horizon; y_m = h(x + m alpha) - h(x).
inline ClassificationReport scan_fiber(const SkewProduct& F, Angle x, std::int64_t horizon, double strip_eps) {
  ClassificationReport r;
  r.x = x;
  r.horizon = horizon;
  r.strip_eps = strip_eps;
  const HarmonicSum& h = F.phi().h_harmonics();
  const Angle alpha = F.alpha();
  const double h0 = h.eval(x);
  const u128 eps_raw = Angle::from_double(std::min(strip_eps, 0.5)).raw();
  HarmonicStream fwd(h, x, alpha), bwd(h, x, -alpha);
  Angle shift;
  for (std::int64_t m = 1; m <= horizon; ++m) {
    fwd.advance();
    bwd.advance();
    shift += alpha;
    const double yf = fwd.value() - h0;
    const double yb = bwd.value() - h0;
    r.y_min = std::min(r.y_min, std::min(yf, yb));
    r.y_max = std::max(r.y_max, std::max(yf, yb));
    if (shift.distance_raw() < eps_raw) {
      r.strip_returns.push_back(yf);
      r.strip_returns.push_back(yb);
    }
  }
  return r;
}

}  // namespace detail

// Finite-horizon proxy for the slice semigroup L_x.
inline ClassificationReport classify_fiber(const SkewProduct& F, Angle x, std::int64_t horizon, double a, double b,
                                           double strip_eps, double strip_tol = -1.0) {
  ClassificationReport r = detail::scan_fiber(F, x, horizon, strip_eps);
  r.a = a;
  r.b = b;
  r.strip_tol = strip_tol >= 0.0 ? strip_tol : a;
  r.verdict = derive_verdict(r);
  return r;
}

inline std::vector<double> limit_set_sample(const SkewProduct& F, Angle x, std::int64_t horizon, double strip_eps) {
  return detail::scan_fiber(F, x, horizon, strip_eps).strip_returns;
}

// Fraction of pairwise sums s = u + v (within [lo, hi] of the sample) lying within delta of a sample value.
inline double semigroup_closure_fraction(std::vector<double> sample, double delta, std::size_t max_pairs = 200000) {
  if (sample.size() < 2) return 1.0;
  std::sort(sample.begin(), sample.end());
  const double lo = sample.front(), hi = sample.back();
  std::size_t tested = 0, hit = 0;
  const std::size_t n = sample.size();
  const std::size_t stride = std::max<std::size_t>(1, n * n / max_pairs);
  for (std::size_t k = 0; k < n * n; k += stride) {
    const double s = sample[k / n] + sample[k % n];
    if (s < lo || s > hi) continue;  // beyond range counts as consistent, not tested
    ++tested;
    auto it = std::lower_bound(sample.begin(), sample.end(), s - delta);
    if (it != sample.end() && *it <= s + delta) ++hit;
  }
  return tested ? static_cast<double>(hit) / static_cast<double>(tested) : 1.0;
}

// Symmetric Hausdorff distance between two finite sets of reals.
inline double hausdorff_distance(std::vector<double> u, std::vector<double> v) {
  if (u.empty() || v.empty()) return u.empty() && v.empty() ? 0.0 : INFINITY;
  std::sort(u.begin(), u.end());
  std::sort(v.begin(), v.end());
  auto directed = [](const std::vector<double>& from, const std::vector<double>& to) {
    double worst = 0.0;
    for (double s : from) {
      auto it = std::lower_bound(to.begin(), to.end(), s);
      double d = INFINITY;
      if (it != to.end()) d = *it - s;
      if (it != to.begin()) d = std::min(d, s - *(it - 1));
      worst = std::max(worst, d);
    }
    return worst;
  };
  return std::max(directed(u, v), directed(v, u));
}

}  // namespace nicis
