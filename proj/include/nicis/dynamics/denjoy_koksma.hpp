#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "nicis/number_theory/returns.hpp"
#include "nicis/skew_product/skew_product.hpp"

namespace nicis {

struct DKEntry {
  BigInt q;
  double sup = 0.0;         // max over the grid of |phi_q|
  double crosscheck = 0.0;  // max |closed - direct| at the random check points (NaN if q too large to sum)
};

// sup over x_i = i/grid of |h(x_i + q alpha) - h(x_i)|, each q required to be a closest return time.
inline std::vector<DKEntry> denjoy_koksma_profile(const PhiSeries& phi, const std::vector<BigInt>& q_list,
                                                  std::uint64_t grid_size, std::uint64_t seed = 1,
                                                  std::uint64_t direct_cap = 10000000ULL) {
  if (grid_size < 1) throw std::invalid_argument("grid_size must be >= 1");
  std::vector<DKEntry> out;
  const Angle step = Angle::from_raw(static_cast<u128>(-1) / grid_size + 1);
  std::mt19937_64 rng(seed);
  for (const BigInt& q : q_list) {
    if (q < 1) throw std::invalid_argument("q must be positive");
    if (q <= BigInt(std::numeric_limits<std::int64_t>::max()) &&
        !is_closest_return(phi.rotation(), static_cast<std::uint64_t>(q)))
      throw std::invalid_argument("q = " + q.str() + " is not a closest return time");
    DKEntry e{q, 0.0, std::numeric_limits<double>::quiet_NaN()};
    const Angle shift = phi.alpha().times(q);
    HarmonicStream base(phi.h_harmonics(), Angle{}, step);
    HarmonicStream moved(phi.h_harmonics(), shift, step);
    for (std::uint64_t i = 0; i < grid_size; ++i) {
      e.sup = std::max(e.sup, std::fabs(moved.value() - base.value()));
      base.advance();
      moved.advance();
    }
    if (q <= direct_cap) {
      e.crosscheck = 0.0;
      std::uniform_int_distribution<std::uint64_t> pick(0, grid_size - 1);
      for (int k = 0; k < 10; ++k) {
        const Angle x = step.times(static_cast<u128>(pick(rng)));
        const auto qi = static_cast<std::int64_t>(q);
        e.crosscheck = std::max(e.crosscheck, std::fabs(birkhoff_sum_closed(phi, x, qi) -
                                                        birkhoff_sum_direct(phi, x, qi)));
      }
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace nicis
