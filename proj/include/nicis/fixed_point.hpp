#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace nicis {

using u128 = unsigned __int128;
using i128 = __int128;
using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 6.283185307179586476925286766559005768;

inline BigInt pow2_big(unsigned e) { return BigInt(1) << e; }

// Low 128 bits of a (possibly negative) big integer, two's complement.
inline u128 to_u128_mod(const BigInt& v) {
  BigInt m = v % pow2_big(128);
  if (m < 0) m += pow2_big(128);
  const auto lo = static_cast<std::uint64_t>(m & BigInt(~std::uint64_t{0}));
  const auto hi = static_cast<std::uint64_t>(m >> 64);
  return (static_cast<u128>(hi) << 64) | lo;
}

inline BigInt from_u128(u128 v) {
  BigInt r = BigInt(static_cast<std::uint64_t>(v >> 64));
  r <<= 64;
  r += static_cast<std::uint64_t>(v);
  return r;
}

// A point of R/Z as a 128-bit binary fraction of one turn.
class Angle {
 public:
  constexpr Angle() = default;

  static constexpr Angle from_raw(u128 raw) {
    Angle a;
    a.raw_ = raw;
    return a;
  }

  static Angle from_double(double x) {
    double f = x - std::floor(x);
    const double hi_d = std::floor(std::ldexp(f, 64));
    const double rem = std::ldexp(f, 64) - hi_d;
    u128 hi = static_cast<u128>(static_cast<std::uint64_t>(hi_d)) << 64;
    u128 lo = static_cast<std::uint64_t>(std::ldexp(rem, 64));
    return from_raw(hi | lo);
  }

  // Nearest 128-bit fraction to frac(r).
  static Angle from_rational(const BigRational& r) {
    BigInt num = boost::multiprecision::numerator(r);
    BigInt den = boost::multiprecision::denominator(r);
    BigInt scaled = (num * pow2_big(129)) / den;
    if (num * pow2_big(129) < scaled * den) scaled -= 1;  // floor for negatives
    scaled = (scaled + 1) >> 1;
    return from_raw(to_u128_mod(scaled));
  }

  constexpr u128 raw() const { return raw_; }
  constexpr std::uint64_t hi64() const { return static_cast<std::uint64_t>(raw_ >> 64); }

  double to_double() const {
    const double v = std::ldexp(static_cast<double>(hi64()), -64) +
                     std::ldexp(static_cast<double>(static_cast<std::uint64_t>(raw_)), -128);
    return v < 1.0 ? v : std::nextafter(1.0, 0.0);
  }

  // Signed representative in [-1/2, 1/2).
  double to_signed_double() const {
    const double v = to_double();
    return v >= 0.5 ? v - 1.0 : v;
  }

  // ||x||, distance to the nearest integer.
  double distance_to_zero() const { return Angle::from_raw(distance_raw()).to_double(); }
  constexpr u128 distance_raw() const {
    return (raw_ >> 127) ? static_cast<u128>(0) - raw_ : raw_;
  }

  constexpr Angle times(u128 k) const { return from_raw(raw_ * k); }
  constexpr Angle times(std::int64_t m) const {
    if (m >= 0) return times(static_cast<u128>(m));
    const u128 mag = static_cast<u128>(-(m + 1)) + 1;
    return from_raw(static_cast<u128>(0) - raw_ * mag);
  }
  Angle times(const BigInt& k) const { return times(to_u128_mod(k)); }

  constexpr Angle operator+(Angle o) const { return from_raw(raw_ + o.raw_); }
  constexpr Angle operator-(Angle o) const { return from_raw(raw_ - o.raw_); }
  constexpr Angle operator-() const { return from_raw(static_cast<u128>(0) - raw_); }
  constexpr Angle& operator+=(Angle o) {
    raw_ += o.raw_;
    return *this;
  }
  friend constexpr bool operator==(Angle a, Angle b) { return a.raw_ == b.raw_; }

  // Exact decimal expansion (the fraction has at most 128 significant decimals).
  std::string to_decimal(unsigned digits = 40) const {
    std::string out = "0.";
    BigInt r = from_u128(raw_);
    for (unsigned i = 0; i < digits; ++i) {
      r *= 10;
      BigInt d = r >> 128;
      out += static_cast<char>('0' + static_cast<int>(d));
      r -= d << 128;
      if (r == 0) break;
    }
    return out;
  }

 private:
  u128 raw_ = 0;
};

// A point of R as integer turns plus an Angle.
struct LiftedAngle {
  std::int64_t turns = 0;
  Angle frac;

  static LiftedAngle from_double(double x) {
    const double fl = std::floor(x);
    return {static_cast<std::int64_t>(fl), Angle::from_double(x - fl)};
  }
  double to_double() const { return static_cast<double>(turns) + frac.to_double(); }

  LiftedAngle operator+(Angle a) const {
    LiftedAngle r{turns, frac + a};
    if (r.frac.raw() < frac.raw()) ++r.turns;
    return r;
  }
  LiftedAngle operator-(Angle a) const {
    LiftedAngle r{turns, frac - a};
    if (r.frac.raw() > frac.raw()) --r.turns;
    return r;
  }

  // Shift by a real displacement; |d| below 2^62.
  LiftedAngle advanced(double d) const {
    const double whole = std::trunc(d);
    const double rest = d - whole;  // exact, same sign as d, |rest| < 1
    LiftedAngle r = rest >= 0 ? *this + Angle::from_double(rest) : *this - Angle::from_double(-rest);
    r.turns += static_cast<std::int64_t>(whole);
    return r;
  }

  // this - o as a real number.
  double minus(const LiftedAngle& o) const {
    const std::int64_t dt = turns - o.turns;
    const i128 df = static_cast<i128>(frac.raw() >> 1) - static_cast<i128>(o.frac.raw() >> 1);
    const double fd = std::ldexp(static_cast<double>(df), -127);
    return static_cast<double>(dt) + fd;
  }
};

struct AnnulusPoint {
  LiftedAngle x;
  double y = 0.0;

  static AnnulusPoint make(double x, double y) { return {LiftedAngle::from_double(x), y}; }
};

}  // namespace nicis
