#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "nicis/fixed_point.hpp"

namespace nicis {

// A map of the lifted annulus: apply() returns the image with x kept on the universal cover.
template <class Map>
concept LiftedAnnulusMap = requires(const Map& f, const AnnulusPoint& p) {
  { f.apply(p) } -> std::convertible_to<AnnulusPoint>;
};

struct RigidRotation {
  Angle alpha;
  AnnulusPoint apply(const AnnulusPoint& p) const { return {p.x + alpha, p.y}; }
};

struct RotationEstimate {
  double value = 0.0;
  double error_bar = 0.0;  // half the spread of the running average over the last decade of steps
  std::int64_t steps = 0;
};

// Average lifted x-displacement over m steps.
template <LiftedAnnulusMap Map>
RotationEstimate rotation_number_estimate(const Map& f, const AnnulusPoint& start, std::int64_t m) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  AnnulusPoint p = start;
  const std::int64_t from = std::max<std::int64_t>(1, m / 10);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, avg = 0.0;
  for (std::int64_t k = 1; k <= m; ++k) {
    p = f.apply(p);
    if (k >= from) {
      avg = p.x.minus(start.x) / static_cast<double>(k);
      lo = std::min(lo, avg);
      hi = std::max(hi, avg);
    }
  }
  return {avg, (hi - lo) / 2.0, m};
}

}  // namespace nicis
