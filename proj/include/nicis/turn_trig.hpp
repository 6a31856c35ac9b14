#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "nicis/fixed_point.hpp"

namespace nicis {

namespace detail {

struct TurnTable {
  static constexpr int kBits = 10;
  static constexpr int kSize = 1 << kBits;
  std::array<double, kSize> s{};
  std::array<double, kSize> c{};
  TurnTable() {
    const long double step = 6.283185307179586476925286766559005768L / kSize;
    for (int i = 0; i < kSize; ++i) {
      s[i] = static_cast<double>(std::sin(step * i));
      c[i] = static_cast<double>(std::cos(step * i));
    }
  }
};

inline const TurnTable& turn_table() {
  static const TurnTable t;
  return t;
}

}  // namespace detail

// sin and cos of 2*pi*t/2^64: table lookup on the top bits plus a short Taylor correction.
inline void sincos_turns(std::uint64_t t, double& s, double& c) {
  const auto& tb = detail::turn_table();
  constexpr int shift = 64 - detail::TurnTable::kBits;
  const auto idx = static_cast<unsigned>(t >> shift);
  const std::uint64_t rem = t & ((std::uint64_t{1} << shift) - 1);
  const double r = static_cast<double>(rem) * (kTwoPi / 18446744073709551616.0);
  const double r2 = r * r;
  const double sr = r * (1.0 - r2 / 6.0 * (1.0 - r2 / 20.0 * (1.0 - r2 / 42.0)));
  const double cr = 1.0 - r2 / 2.0 * (1.0 - r2 / 12.0 * (1.0 - r2 / 30.0 * (1.0 - r2 / 56.0)));
  s = tb.s[idx] * cr + tb.c[idx] * sr;
  c = tb.c[idx] * cr - tb.s[idx] * sr;
}

inline double sin_turns(std::uint64_t t) {
  double s, c;
  sincos_turns(t, s, c);
  return s;
}

inline double cos_turns(std::uint64_t t) {
  double s, c;
  sincos_turns(t, s, c);
  return c;
}

inline double sin_turns(Angle a) { return sin_turns(a.hi64()); }
inline double cos_turns(Angle a) { return cos_turns(a.hi64()); }

}  // namespace nicis
