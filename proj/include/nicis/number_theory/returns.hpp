#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nicis/errors.hpp"
#include "nicis/fixed_point.hpp"
#include "nicis/number_theory/continued_fraction.hpp"

namespace nicis {

inline double circle_distance(double x) { return std::fabs(x - std::nearbyint(x)); }

namespace detail {

// Closest return times up to q_max by scanning j*alpha in fixed point.
inline std::vector<std::uint64_t> closest_returns_by_scan(Angle alpha, std::uint64_t q_max) {
  std::vector<std::uint64_t> out;
  u128 best = ~static_cast<u128>(0);
  Angle x;
  for (std::uint64_t j = 1; j <= q_max; ++j) {
    x += alpha;
    const u128 d = x.distance_raw();
    if (d < best) {
      best = d;
      out.push_back(j);
    }
  }
  return out;
}

// Deepen until q_k exceeds the bound or the source runs out of digits.
inline RotationNumber deep_enough(const RotationNumber& alpha, const BigInt& q_bound) {
  RotationNumber a = alpha;
  while (a.convergents().back().q <= q_bound) {
    try {
      a = a.deepened(a.depth() * 2 + 8);
    } catch (const InsufficientPrecision&) {
      break;
    }
  }
  return a;
}

}  // namespace detail

inline constexpr std::uint64_t kScanCrossCheckLimit = 1u << 22;

// Times q <= q_max with ||j alpha|| > ||q alpha|| for 0 < j < q, ascending.
// Taken from the convergent denominators and, for q_max up to 2^22, re-derived by a direct scan.
inline std::vector<std::uint64_t> closest_return_times(const RotationNumber& alpha, std::uint64_t q_max) {
  if (q_max < 1) throw std::invalid_argument("q_max must be >= 1");
  RotationNumber a = detail::deep_enough(alpha, BigInt(q_max));
  std::vector<std::uint64_t> out;
  bool covered = false;
  for (const Rational& c : a.convergents()) {
    if (c.q > q_max) {
      covered = true;
      break;
    }
    const auto q = static_cast<std::uint64_t>(c.q);
    if (out.empty() || out.back() != q) out.push_back(q);
  }
  if (q_max <= kScanCrossCheckLimit) {
    auto scan = detail::closest_returns_by_scan(a.value(), q_max);
    if (scan != out) throw std::logic_error("closest-return scan disagrees with convergent denominators");
  } else if (!covered) {
    throw InsufficientPrecision("convergents do not reach q_max");
  }
  return out;
}

inline bool is_closest_return(const RotationNumber& alpha, std::uint64_t q) {
  if (q == 0) return false;
  if (q == 1) return true;
  if (q <= (1u << 24)) {
    const u128 target = alpha.value().times(static_cast<u128>(q)).distance_raw();
    Angle x;
    for (std::uint64_t j = 1; j < q; ++j) {
      x += alpha.value();
      if (x.distance_raw() <= target) return false;
    }
    return true;
  }
  RotationNumber a = detail::deep_enough(alpha, BigInt(q));
  for (const Rational& c : a.convergents())
    if (c.q == q) return true;
  return false;
}

// Smallest n3 > 0 with n3*alpha inside the shorter open arc bounded by n1*alpha and n2*alpha.
// Requires that no j <= n2 lands in that arc (then n3 - n2 is a closest return time).
inline std::uint64_t refine_return_step(const RotationNumber& alpha, std::uint64_t n1, std::uint64_t n2,
                                        std::uint64_t cap = 100000000ULL) {
  if (!(n1 < n2)) throw std::invalid_argument("refine_return_step needs n1 < n2");
  const Angle al = alpha.value();
  const Angle A = al.times(static_cast<u128>(n1));
  const Angle B = al.times(static_cast<u128>(n2));
  if (A == B) throw std::invalid_argument("n1*alpha and n2*alpha coincide");
  u128 fwd = (B - A).raw();
  Angle start = A;
  u128 len = fwd;
  if (fwd >> 127) {
    start = B;
    len = (A - B).raw();
  }
  Angle x;
  for (std::uint64_t j = 1; j <= cap; ++j) {
    x += al;
    const u128 off = (x - start).raw();
    if (off == 0 || off == len) {
      if (j != n1 && j != n2) throw std::logic_error("fixed-point collision with an arc endpoint");
      continue;
    }
    if (off < len) {
      if (j <= n2)
        throw std::invalid_argument("the arc between n1*alpha and n2*alpha already contains j*alpha for j <= n2");
      if (!is_closest_return(alpha, j - n2)) throw std::logic_error("n3 - n2 is not a closest return time");
      return j;
    }
  }
  throw HorizonExceeded("refine_return_step: no return within " + std::to_string(cap) + " steps");
}

namespace detail {

// +1 if lhs < rhs certified, -1 if lhs >= rhs certified, 0 undecided.
inline int compare_interval(const RationalInterval& v, const BigRational& bound) {
  if (v.hi < bound) return 1;
  if (v.lo >= bound) return -1;
  return 0;
}

inline BigRational exact_from_double(double v) {
  int e = 0;
  double m = std::frexp(v, &e);
  auto mi = static_cast<long long>(std::ldexp(m, 53));
  e -= 53;
  if (e >= 0) return BigRational(BigInt(mi) << e);
  return BigRational(BigInt(mi), pow2_big(static_cast<unsigned>(-e)));
}

}  // namespace detail

// Convergent p/q (k >= 1, q <= q_max) with |alpha - p/q| < eps / q^tau, or nullopt.
inline std::optional<Rational> liouville_witness(const RotationNumber& alpha, double tau, double eps,
                                                 const BigInt& q_max = BigInt(1) << 4000) {
  if (!(tau > 0) || !(eps > 0)) throw std::invalid_argument("tau and eps must be positive");
  RotationNumber a = alpha;
  const BigRational eps_r = detail::exact_from_double(eps);
  const bool integral_tau = std::floor(tau) == tau && tau < 1e6;
  for (std::size_t k = 1;; ++k) {
    if (k + 1 >= a.convergents().size()) {
      try {
        a = a.deepened(a.depth() * 2 + 8);
      } catch (const InsufficientPrecision&) {
        if (k >= a.convergents().size()) return std::nullopt;
      }
    }
    if (k >= a.convergents().size()) return std::nullopt;
    const Rational& c = a.convergent(k);
    if (c.q > q_max) return std::nullopt;
    RationalInterval err = a.convergent_error(k);
    if (integral_tau) {
      BigRational bound = eps_r / BigRational(boost::multiprecision::pow(c.q, static_cast<unsigned>(tau)));
      if (detail::compare_interval(err, bound) == 1) return c;
    } else {
      // Compare logarithms with a safety margin; undecided counts as failure.
      const double log_hi = std::log2(static_cast<double>(err.hi));
      const double log_bound = std::log2(eps) - tau * std::log2(static_cast<double>(c.q));
      if (std::isfinite(log_hi) && log_hi < log_bound - 1e-9 * std::fabs(log_bound) - 1e-12) return c;
    }
    if (a.convergents().size() > 4096) return std::nullopt;
  }
}

// Greedy earliest-feasible denominators q >= 2 with ||q alpha|| < 1/q and q_{n+1} > 10 q_n.
inline std::vector<BigInt> select_phi_denominators(const RotationNumber& alpha, std::size_t count) {
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  RotationNumber a = alpha;
  std::vector<BigInt> out;
  std::size_t k = 1;
  while (out.size() < count) {
    if (k + 1 >= a.convergents().size()) a = a.deepened(a.depth() * 2 + 8);  // may throw InsufficientPrecision
    const Rational& c = a.convergent(k);
    const BigInt& q = c.q;
    const bool big_enough = q >= 2 && (out.empty() || q > 10 * out.back());
    if (big_enough && (out.empty() || q != out.back())) {
      // ||q alpha|| <= |q alpha - p| = q |alpha - p/q|; require it below 1/q.
      RationalInterval err = a.convergent_error(k);
      if (BigRational(q) * err.hi < BigRational(BigInt(1), q)) out.push_back(q);
    }
    ++k;
  }
  return out;
}

// Row of the convergent table for CSV export.
struct ConvergentRow {
  std::size_t k;
  BigInt a;
  BigInt p;
  BigInt q;
};

inline std::vector<ConvergentRow> convergent_table(const RotationNumber& alpha) {
  std::vector<ConvergentRow> rows;
  auto quotients = alpha.partial_quotients();
  for (std::size_t k = 1; k < alpha.convergents().size(); ++k) {
    const Rational& c = alpha.convergent(k);
    rows.push_back({k, quotients[k - 1], c.p, c.q});
  }
  return rows;
}

}  // namespace nicis
