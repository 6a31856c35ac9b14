#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "nicis/errors.hpp"
#include "nicis/fixed_point.hpp"
#include "nicis/number_theory/alpha_source.hpp"

namespace nicis {

struct Rational {
  BigInt p = 0;
  BigInt q = 1;

  Rational() = default;
  Rational(BigInt num, BigInt den) : p(std::move(num)), q(std::move(den)) {
    if (q == 0) throw std::invalid_argument("zero denominator");
    if (q < 0) {
      p = -p;
      q = -q;
    }
    BigInt g = boost::multiprecision::gcd(p, q);
    if (g > 1) {
      p /= g;
      q /= g;
    }
  }
  BigRational value() const { return BigRational(p, q); }
  double to_double() const { return static_cast<double>(value()); }
  std::string to_string() const { return p.str() + "/" + q.str(); }
  friend bool operator==(const Rational& a, const Rational& b) { return a.p == b.p && a.q == b.q; }
};

// Interval [lo, hi] with lo <= true value <= hi, exact rationals.
struct RationalInterval {
  BigRational lo;
  BigRational hi;
};

// Certified partial quotients a_1, a_2, ... shared by every real in the enclosure.
// A quotient is emitted only when both endpoints agree on it and the next complete quotient stays bounded.
inline std::vector<BigInt> certified_quotients(const Enclosure& e, std::size_t want) {
  std::vector<BigInt> out;
  BigRational lo = e.lo, hi = e.hi;
  // Skip a_0 = 0.
  if (!(lo >= 0 && hi <= 1)) return out;
  if (lo == 0) return out;
  BigRational L = 1 / hi, H = 1 / lo;
  while (out.size() < want) {
    BigInt a = boost::multiprecision::numerator(L) / boost::multiprecision::denominator(L);
    BigInt b = boost::multiprecision::numerator(H) / boost::multiprecision::denominator(H);
    const bool h_is_next_int = (H == BigRational(a + 1));
    if (a != b && !h_is_next_int) break;
    if (a < 1) break;
    BigRational lf = L - BigRational(a);
    BigRational hf = H - BigRational(a);
    if (lf == 0) break;  // next complete quotient unbounded
    out.push_back(a);
    if (h_is_next_int) break;
    BigRational nl = 1 / hf, nh = 1 / lf;
    L = nl;
    H = nh;
  }
  return out;
}

class RotationNumber {
 public:
  // Expands the source to `depth` partial quotients, refining the enclosure as needed.
  static RotationNumber expand(const AlphaSource& src, std::size_t depth) {
    unsigned bits = 256;
    while (bits < 64 * depth + 192) bits *= 2;
    for (;;) {
      Enclosure e = src.enclose(bits);
      std::vector<BigInt> qs = certified_quotients(e, depth + 1);
      if (qs.size() >= depth + 1 && e.hi - e.lo <= BigRational(BigInt(1), pow2_big(150))) {
        qs.resize(depth + 1);
        return RotationNumber(src, e, std::move(qs), depth);
      }
      auto mb = src.max_bits();
      if ((mb && bits >= *mb) || bits >= (1u << 20)) {
        if (mb && qs.size() >= depth + 1) {
          // digits fix the quotients but not 150 fractional bits; still fine for the fixed point
          qs.resize(depth + 1);
          return RotationNumber(src, e, std::move(qs), depth);
        }
        if (mb && qs.size() >= depth) {
          return RotationNumber(src, e, std::move(qs), depth);
        }
        throw InsufficientPrecision("alpha '" + src.spec() + "' determines only " +
                                    std::to_string(qs.size()) + " partial quotients; requested " +
                                    std::to_string(depth));
      }
      bits *= 2;
    }
  }

  static RotationNumber expand(std::string_view spec, std::size_t depth) {
    return expand(AlphaSource::parse(spec), depth);
  }

  const AlphaSource& source() const { return source_; }
  const std::string& spec() const { return source_.spec(); }
  std::size_t depth() const { return depth_; }

  // 128-bit fixed-point value used by every orbit engine.
  Angle value() const { return value_; }
  double value_double() const { return value_.to_double(); }
  const Enclosure& enclosure() const { return enclosure_; }

  // a_1 .. a_depth.
  std::vector<BigInt> partial_quotients() const {
    return std::vector<BigInt>(quotients_.begin(), quotients_.begin() + static_cast<long>(depth_));
  }
  // p_k/q_k for k = 0..depth, p_0/q_0 = 0/1.
  const std::vector<Rational>& convergents() const { return convergents_; }
  const Rational& convergent(std::size_t k) const { return convergents_.at(k); }

  // True if q_{k+1} is known so that the two-sided convergent bound applies to index k.
  bool has_successor(std::size_t k) const { return next_q_known(k); }

  // Certified interval for |alpha - p_k/q_k| from the neighbouring denominators, intersected with the enclosure.
  RationalInterval convergent_error(std::size_t k) const {
    const Rational& c = convergents_.at(k);
    RationalInterval enc = error_from_enclosure(c);
    if (!next_q_known(k)) return enc;
    const BigInt qn = successor_q(k);
    RationalInterval r{BigRational(BigInt(1), c.q * (c.q + qn)), BigRational(BigInt(1), c.q * qn)};
    if (enc.lo > r.lo) r.lo = enc.lo;
    if (enc.hi < r.hi) r.hi = enc.hi;
    return r;
  }

  // Certified interval for |alpha - r| from the enclosure alone.
  RationalInterval error_from_enclosure(const Rational& r) const {
    BigRational v = r.value();
    BigRational a = enclosure_.lo - v, b = enclosure_.hi - v;
    if (a >= 0) return {a, b};
    if (b <= 0) return {-b, -a};
    return {BigRational(0), a < 0 && -a > b ? -a : b};
  }

  RotationNumber deepened(std::size_t depth) const {
    if (depth <= depth_) return *this;
    RotationNumber r = expand(source_, depth);
    r.value_ = value_;  // the fixed-point value never changes once issued
    return r;
  }

  // Largest k with q_k known.
  std::size_t last_index() const { return depth_; }

 private:
  RotationNumber(const AlphaSource& src, const Enclosure& e, std::vector<BigInt> quotients,
                 std::size_t depth)
      : source_(src), enclosure_(e), quotients_(std::move(quotients)), depth_(depth) {
    BigInt pm2 = 1, qm2 = 0, pm1 = 0, qm1 = 1;
    convergents_.push_back(Rational(0, 1));
    for (std::size_t k = 0; k < quotients_.size(); ++k) {
      BigInt p = quotients_[k] * pm1 + pm2;
      BigInt q = quotients_[k] * qm1 + qm2;
      if (k < depth_) convergents_.push_back(Rational(p, q));
      else extra_q_ = q;
      pm2 = pm1;
      qm2 = qm1;
      pm1 = p;
      qm1 = q;
    }
    value_ = Angle::from_rational((enclosure_.lo + enclosure_.hi) / 2);
  }

  bool next_q_known(std::size_t k) const { return k + 1 < convergents_.size() || (k + 1 == convergents_.size() && extra_q_ > 0); }

  BigInt successor_q(std::size_t k) const {
    if (k + 1 < convergents_.size()) return convergents_[k + 1].q;
    if (k + 1 == convergents_.size() && extra_q_ > 0) return extra_q_;
    throw InsufficientPrecision("successor convergent not available");
  }

  AlphaSource source_;
  Enclosure enclosure_;
  std::vector<BigInt> quotients_;  // a_1..a_{depth} plus possibly a_{depth+1}
  std::size_t depth_ = 0;
  std::vector<Rational> convergents_;
  BigInt extra_q_ = 0;
  Angle value_;
};

inline RotationNumber cf_expand(std::string_view spec, std::size_t depth) {
  return RotationNumber::expand(spec, depth);
}

}  // namespace nicis
