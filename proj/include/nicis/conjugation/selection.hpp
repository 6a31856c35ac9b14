#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nicis/errors.hpp"
#include "nicis/number_theory/continued_fraction.hpp"

namespace nicis {

enum class Mode { C0, Cinf };

inline const char* to_string(Mode m) { return m == Mode::C0 ? "c0" : "cinf"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "c0" || s == "C0") return Mode::C0;
  if (s == "cinf" || s == "Cinf" || s == "CINF") return Mode::Cinf;
  throw ConfigError("unknown mode '" + s + "' (expected c0 or cinf)");
}

enum class CertifiedBy { GridOrbit, LipschitzCriterion, NotCertified };

inline const char* to_string(CertifiedBy c) {
  switch (c) {
    case CertifiedBy::GridOrbit: return "GridOrbit";
    case CertifiedBy::LipschitzCriterion: return "LipschitzCriterion";
    default: return "NotCertified";
  }
}

struct BandCertificate {
  CertifiedBy by = CertifiedBy::NotCertified;
  BigInt q = 0;
  double lipschitz_threshold = 0.0;  // L(H_n) / (c_n - b_n)
  bool image_circles_ok = false;
  std::size_t orbits_checked = 0;    // grid path
  std::size_t orbits_hit = 0;
  double worst_orbit_max_y = 0.0;    // smallest over representatives of max |y| along the orbit
  std::string note;
  bool certified() const { return by != CertifiedBy::NotCertified; }
};

// Outcome of one exact comparison; Undecided when the certified error interval straddles the bound.
enum class Check { Pass, Fail, Undecided, NotEvaluated };

inline const char* to_string(Check c) {
  switch (c) {
    case Check::Pass: return "pass";
    case Check::Fail: return "fail";
    case Check::Undecided: return "undecided";
    default: return "not-evaluated";
  }
}

// interval < bound (strict) or interval <= bound.
inline Check compare_below(const RationalInterval& v, const BigRational& bound, bool strict) {
  if (strict ? v.hi < bound : v.hi <= bound) return Check::Pass;
  if (strict ? v.lo >= bound : v.lo > bound) return Check::Fail;
  return Check::Undecided;
}

struct SelectionInputs {
  std::size_t n = 1;             // stage index; alpha_{n+1} is being chosen
  BigRational eps;               // eps_n
  BigRational C;                 // C_n = L(k_1) ... L(k_n)
  std::vector<BigInt> qs;        // q_1 .. q_n
  Rational alpha_n;              // current approximant
  Mode mode = Mode::C0;
  double cinf_safety = 1e3;      // C_4(n, n) surrogate = safety * 2 C_n
  std::size_t depth_cap = 60;    // convergent indices considered
};

struct CandidateRow {
  std::size_t k = 0;
  Rational r;
  RationalInterval error;        // certified |alpha - p/q|
  Check monotone = Check::NotEvaluated;
  Check bound22 = Check::NotEvaluated;
  Check mode_bound = Check::NotEvaluated;
  std::optional<BandCertificate> band;
};

struct Selection {
  bool feasible = false;
  Rational chosen;
  std::size_t k = 0;
  BandCertificate band;
  std::vector<CandidateRow> rows;
  std::string binding;           // set when infeasible
  bool surrogate_constant = false;
  std::string note;
};

using BandCertifier = std::function<BandCertificate(const BigInt& q)>;

namespace detail {

inline BigInt product(const std::vector<BigInt>& v) {
  BigInt p = 1;
  for (const auto& x : v) p *= x;
  return p;
}

inline BigRational pow_rat(const BigInt& b, unsigned e) { return BigRational(boost::multiprecision::pow(b, e)); }

// Certified |alpha - r|, using the convergent bound when r is a known convergent.
inline RationalInterval distance_interval(const RotationNumber& a, const Rational& r) {
  const auto& cs = a.convergents();
  for (std::size_t k = 0; k < cs.size(); ++k)
    if (cs[k] == r) return a.convergent_error(k);
  return a.error_from_enclosure(r);
}

}  // namespace detail

// Quadratic approximation bound eps_n / (2 C_n q_1...q_n q^2).
inline BigRational bound_22(const SelectionInputs& in, const BigInt& q) {
  return in.eps / (2 * in.C * BigRational(detail::product(in.qs)) * BigRational(q * q));
}

// Convergence bound of the mode: linear in 1/q for C0, power (n+1)^2 for Cinf with the surrogate C_4.
inline BigRational bound_mode(const SelectionInputs& in, const BigInt& q) {
  const BigRational two_n = BigRational(pow2_big(static_cast<unsigned>(in.n)));
  if (in.mode == Mode::C0) {
    const BigRational C4 = 2 * in.C;
    return 1 / (two_n * C4 * BigRational(detail::product(in.qs)) * BigRational(q));
  }
  const unsigned e = static_cast<unsigned>((in.n + 1) * (in.n + 1));
  const BigRational C4 = BigRational(in.cinf_safety) * 2 * in.C;
  BigRational den = two_n * C4 * detail::pow_rat(q, e);
  for (const auto& qi : in.qs) den *= detail::pow_rat(qi, e);
  return 1 / den;
}

// Smallest convergent of alpha passing the monotone clause, the quadratic bound, the mode bound and band certification.
// Binding labels keep the conventional constraint tags: (2.1) band/monotone, (2.2) quadratic, (2.3)/(2.3') mode.
// alpha is deepened in place when a candidate needs its successor denominator.
inline Selection choose_next_alpha(const SelectionInputs& in, RotationNumber& alpha, const BandCertifier& certify) {
  if (in.qs.size() != in.n) throw std::invalid_argument("choose_next_alpha: need q_1..q_n");
  Selection sel;
  sel.surrogate_constant = in.mode == Mode::Cinf;
  const RationalInterval current = detail::distance_interval(alpha, in.alpha_n);
  bool exhausted = false;
  for (std::size_t k = 1; k <= in.depth_cap; ++k) {
    if (k > alpha.depth()) {  // depth >= k gives p_k/q_k and q_{k+1}
      try {
        alpha = alpha.deepened(std::max(k, std::min(in.depth_cap, 2 * alpha.depth())));
      } catch (const InsufficientPrecision&) {
        exhausted = true;
        break;
      }
    }
    CandidateRow row;
    row.k = k;
    row.r = alpha.convergent(k);
    row.error = alpha.convergent_error(k);
    const BigInt& q = row.r.q;
    // |alpha - p/q| < |alpha - alpha_n|: compare the two certified intervals.
    if (row.r == in.alpha_n) row.monotone = Check::Fail;
    else row.monotone = row.error.hi < current.lo ? Check::Pass : (row.error.lo >= current.hi ? Check::Fail : Check::Undecided);
    row.bound22 = compare_below(row.error, bound_22(in, q), true);
    row.mode_bound = compare_below(row.error, bound_mode(in, q), false);
    const bool cheap_ok = row.monotone == Check::Pass && row.bound22 == Check::Pass && row.mode_bound == Check::Pass;
    if (cheap_ok) {
      row.band = certify(q);
      if (row.band->certified()) {
        sel.feasible = true;
        sel.chosen = row.r;
        sel.k = k;
        sel.band = *row.band;
        sel.rows.push_back(std::move(row));
        return sel;
      }
    }
    sel.rows.push_back(std::move(row));
  }
  if (sel.rows.empty()) {
    sel.binding = "precision";
    sel.note = "alpha determines no candidate convergent";
    return sel;
  }
  // Binding constraint: what fails at the deepest candidate examined.
  CandidateRow& last = sel.rows.back();
  if (!last.band) last.band = certify(last.r.q);
  auto failed = [](Check c) { return c != Check::Pass; };
  if (failed(last.bound22)) sel.binding = "(2.2)";
  else if (failed(last.mode_bound)) sel.binding = in.mode == Mode::C0 ? "(2.3')" : "(2.3)";
  else if (!last.band->certified()) sel.binding = "(2.1) band";
  else if (failed(last.monotone)) sel.binding = "(2.1) monotone";
  else sel.binding = "none";
  sel.note = exhausted ? "alpha precision exhausted at depth " + std::to_string(alpha.depth())
                       : "no convergent up to depth cap " + std::to_string(in.depth_cap) + " passes";
  return sel;
}

}  // namespace nicis
