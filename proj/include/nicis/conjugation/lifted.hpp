#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nicis/conjugation/kmap.hpp"
#include "nicis/fixed_point.hpp"
#include "nicis/number_theory/continued_fraction.hpp"

namespace nicis {

// h = lift of k to the cyclic q-fold cover that fixes x = 0: with x = (j + u) / q,
// h(x, y) = ((j + k_x(u, y)) / q, k_y(u, y)). Commutes with S_{1/q}.
class LiftedKMap {
 public:
  LiftedKMap(std::shared_ptr<const KMap> k, BigInt q) : k_(std::move(k)), q_(std::move(q)) {
    if (!k_) throw std::invalid_argument("null k-map");
    if (q_ < 1) throw std::invalid_argument("cover degree q must be >= 1");
    qd_ = static_cast<double>(q_);
  }

  const KMap& kmap() const { return *k_; }
  const BigInt& q() const { return q_; }

  AnnulusPoint apply(const AnnulusPoint& p) const { return run(p, +1); }
  AnnulusPoint apply_inverse(const AnnulusPoint& p) const { return run(p, -1); }

 private:
  AnnulusPoint run(const AnnulusPoint& p, int dir) const {
    if (std::fabs(p.y) >= k_->cutoff().outer()) return p;
    const double u = p.x.frac.times(q_).to_double();  // q x mod 1, exact before rounding to double
    const auto [u1, y1] = k_->flow(u, p.y, dir);
    return {p.x.advanced((u1 - u) / qd_), y1};
  }

  std::shared_ptr<const KMap> k_;
  BigInt q_;
  double qd_ = 1.0;
};

// H_n = h_1 o h_2 o ... o h_n.
class ConjugacyChain {
 public:
  ConjugacyChain() = default;
  explicit ConjugacyChain(std::vector<LiftedKMap> hs) : hs_(std::move(hs)) {}

  ConjugacyChain extended(LiftedKMap h) const {
    ConjugacyChain c = *this;
    c.hs_.push_back(std::move(h));
    return c;
  }

  std::size_t size() const { return hs_.size(); }
  const LiftedKMap& factor(std::size_t i) const { return hs_.at(i - 1); }  // 1-based, h_i

  AnnulusPoint apply(AnnulusPoint p) const {
    for (auto it = hs_.rbegin(); it != hs_.rend(); ++it) p = it->apply(p);
    return p;
  }
  AnnulusPoint apply_inverse(AnnulusPoint p) const {
    for (const auto& h : hs_) p = h.apply_inverse(p);
    return p;
  }

 private:
  std::vector<LiftedKMap> hs_;
};

// f = H o S_{p/q} o H^{-1}; powers are evaluated as H o S_{j p/q} o H^{-1}.
class ConjugatedRotation {
 public:
  ConjugatedRotation(ConjugacyChain H, Rational rotation)
      : H_(std::move(H)), rot_(std::move(rotation)), step_(Angle::from_rational(rot_.value())) {}

  const ConjugacyChain& chain() const { return H_; }
  const Rational& rotation() const { return rot_; }

  AnnulusPoint apply(const AnnulusPoint& p) const { return H_.apply(shift(H_.apply_inverse(p), step_)); }
  AnnulusPoint apply_inverse(const AnnulusPoint& p) const { return H_.apply(shift(H_.apply_inverse(p), -step_)); }

  // f^j(p) for j >= 0, as one conjugation of the rotation by j p / q.
  AnnulusPoint power(const AnnulusPoint& p, const BigInt& j) const { return power_from(H_.apply_inverse(p), j); }

  // f^j(H(w)) given w = H^{-1}(p), so that orbits cost one H^{-1}.
  AnnulusPoint power_from(const AnnulusPoint& w, const BigInt& j) const {
    return H_.apply(shift_lifted(w, j));
  }

 private:
  static AnnulusPoint shift(const AnnulusPoint& p, Angle a) { return {p.x + a, p.y}; }

  // Adds j p / q on the lift: whole turns from floor(j p / q), the remainder rounded to 2^-128.
  AnnulusPoint shift_lifted(const AnnulusPoint& w, const BigInt& j) const {
    const BigInt num = j * rot_.p;
    BigInt whole = num / rot_.q;
    BigInt rem = num - whole * rot_.q;
    if (rem < 0) {
      rem += rot_.q;
      whole -= 1;
    }
    AnnulusPoint r = shift(w, Angle::from_rational(BigRational(rem, rot_.q)));
    r.x.turns += static_cast<std::int64_t>(whole);
    return r;
  }

  ConjugacyChain H_;
  Rational rot_;
  Angle step_;
};

// Sup-metric displacement between two annulus points; x measured on the lift.
inline double lifted_distance(const AnnulusPoint& a, const AnnulusPoint& b) {
  return std::max(std::fabs(a.x.minus(b.x)), std::fabs(a.y - b.y));
}

// Same, with x compared on the circle.
inline double circle_point_distance(const AnnulusPoint& a, const AnnulusPoint& b) {
  const double dx = (a.x.frac - b.x.frac).distance_to_zero();
  return std::max(dx, std::fabs(a.y - b.y));
}

}  // namespace nicis
