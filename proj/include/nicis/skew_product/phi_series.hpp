#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "nicis/fixed_point.hpp"
#include "nicis/number_theory/continued_fraction.hpp"
#include "nicis/number_theory/returns.hpp"
#include "nicis/skew_product/harmonic.hpp"

namespace nicis {

struct PhiTerm {
  BigInt q;
  double coeff = 0.0;  // 2/n
  Angle beta;          // frac(q * alpha) in the engine's fixed point
};

// phi(x) = sum_n (2/n) [sin 2 pi q_n (x + alpha) - sin 2 pi q_n x]
class PhiSeries {
 public:
  static PhiSeries build(const RotationNumber& alpha, std::size_t n_terms) {
    if (n_terms < 1) throw std::invalid_argument("n_terms must be >= 1");
    return from_denominators(alpha, select_phi_denominators(alpha, n_terms));
  }

  // Keep terms while 4 pi/(n q_n) >= tol.
  static PhiSeries machine_precision(const RotationNumber& alpha, double tol = 1e-16) {
    std::size_t n = 4;
    for (;;) {
      auto qs = select_phi_denominators(alpha, n);
      for (std::size_t i = 0; i < qs.size(); ++i) {
        const double bound = 4.0 * kPi / (static_cast<double>(i + 1) * static_cast<double>(qs[i]));
        if (bound < tol) {
          qs.resize(i);
          return from_denominators(alpha, qs);
        }
      }
      n *= 2;
    }
  }

  static PhiSeries zero(const RotationNumber& alpha) { return from_denominators(alpha, {}); }

  // Arbitrary positive denominators, coefficients 2/n in the given order.
  static PhiSeries from_denominators(const RotationNumber& alpha, const std::vector<BigInt>& qs) {
    PhiSeries s;
    s.alpha_ = std::make_shared<const RotationNumber>(alpha);
    for (std::size_t i = 0; i < qs.size(); ++i) {
      if (qs[i] < 1) throw std::invalid_argument("denominators must be positive");
      s.terms_.push_back({qs[i], 2.0 / static_cast<double>(i + 1), alpha.value().times(qs[i])});
    }
    s.rebuild();
    return s;
  }

  // Negative control: term `index` uses the shift of (q + dq) instead of q.
  PhiSeries with_perturbed_shift(std::size_t index, std::int64_t dq) const {
    PhiSeries s = *this;
    PhiTerm& t = s.terms_.at(index);
    t.beta = alpha_->value().times(t.q + dq);
    s.perturbed_ = true;
    s.rebuild();
    return s;
  }

  PhiSeries truncated(std::size_t n) const {
    PhiSeries s = *this;
    if (n < s.terms_.size()) s.terms_.resize(n);
    s.rebuild();
    return s;
  }

  const RotationNumber& rotation() const { return *alpha_; }
  Angle alpha() const { return alpha_->value(); }
  const std::string& alpha_spec() const { return alpha_->spec(); }
  std::size_t n_terms() const { return terms_.size(); }
  const std::vector<PhiTerm>& terms() const { return terms_; }
  bool perturbed() const { return perturbed_; }

  std::vector<BigInt> qs() const {
    std::vector<BigInt> v;
    for (const auto& t : terms_) v.push_back(t.q);
    return v;
  }
  std::vector<double> coeffs() const {
    std::vector<double> v;
    for (const auto& t : terms_) v.push_back(t.coeff);
    return v;
  }

  // sup norm of term n (0-based): 2 c_n |sin(pi beta_n)|.
  double term_sup(std::size_t n) const { return std::fabs(phi_.weight.at(n)); }

  const HarmonicSum& phi_harmonics() const { return phi_; }
  const HarmonicSum& h_harmonics() const { return h_; }

  double eval(Angle x) const { return phi_.eval(x); }
  double eval(double x) const { return eval(Angle::from_double(x)); }
  double derivative(Angle x) const { return phi_.eval_derivative(x); }

 private:
  void rebuild() {
    phi_ = HarmonicSum{};
    h_ = HarmonicSum{};
    const Angle quarter = Angle::from_raw(static_cast<u128>(1) << 126);
    for (const auto& t : terms_) {
      const u128 qm = to_u128_mod(t.q);
      const double qd = static_cast<double>(t.q);
      // c[sin 2pi(qx+beta) - sin 2pi qx] = 2c sin(pi beta) sin 2pi(qx + beta/2 + 1/4)
      const Angle half_beta = Angle::from_raw(t.beta.raw() >> 1);
      const double amp = 2.0 * t.coeff * sin_turns(half_beta);
      phi_.q_mod.push_back(qm);
      phi_.offset.push_back(half_beta + quarter);
      phi_.weight.push_back(amp);
      phi_.dweight.push_back(amp * kTwoPi * qd);
      h_.q_mod.push_back(qm);
      h_.offset.push_back(Angle{});
      h_.weight.push_back(t.coeff);
      h_.dweight.push_back(t.coeff * kTwoPi * qd);
    }
  }

  std::shared_ptr<const RotationNumber> alpha_;
  std::vector<PhiTerm> terms_;
  HarmonicSum phi_, h_;
  bool perturbed_ = false;
};

// h(x) = sum_n (2/n) sin 2 pi q_n x at the truncation of the series it is made from.
class TransferFunction {
 public:
  explicit TransferFunction(const PhiSeries& phi) : phi_(phi) {}
  double eval(Angle x) const { return phi_.h_harmonics().eval(x); }
  double eval(double x) const { return eval(Angle::from_double(x)); }
  std::size_t n_terms() const { return phi_.n_terms(); }
  const HarmonicSum& harmonics() const { return phi_.h_harmonics(); }
  const PhiSeries& series() const { return phi_; }

 private:
  PhiSeries phi_;
};

inline PhiSeries build_phi(const RotationNumber& alpha, std::size_t n_terms) {
  return PhiSeries::build(alpha, n_terms);
}
inline double eval_phi(const PhiSeries& phi, Angle x) { return phi.eval(x); }
inline double eval_h(const TransferFunction& h, Angle x) { return h.eval(x); }

}  // namespace nicis
