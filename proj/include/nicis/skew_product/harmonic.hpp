#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "nicis/fixed_point.hpp"
#include "nicis/turn_trig.hpp"

namespace nicis {

// f(x) = sum_n weight_n * sin(2 pi (q_n x + offset_n)), integer q_n reduced mod 2^128.
// f'(x) = sum_n dweight_n * cos(2 pi (q_n x + offset_n)).
struct HarmonicSum {
  std::vector<u128> q_mod;
  std::vector<Angle> offset;
  std::vector<double> weight;
  std::vector<double> dweight;

  std::size_t size() const { return q_mod.size(); }

  double eval(Angle x) const {
    double acc = 0.0;
    for (std::size_t n = 0; n < q_mod.size(); ++n) acc += weight[n] * sin_turns(x.times(q_mod[n]) + offset[n]);
    return acc;
  }

  double eval_derivative(Angle x) const {
    double acc = 0.0;
    for (std::size_t n = 0; n < q_mod.size(); ++n) acc += dweight[n] * cos_turns(x.times(q_mod[n]) + offset[n]);
    return acc;
  }
};

// Values of a HarmonicSum along x_m = x0 + m*step by phasor rotation,
// re-anchored to the exact fixed-point phase every `resync` steps.
class HarmonicStream {
 public:
  HarmonicStream(const HarmonicSum& f, Angle x0, Angle step, int resync = 64)
      : f_(&f), x0_(x0), step_(step), resync_(resync) {
    const std::size_t n = f.size();
    re_.resize(n);
    im_.resize(n);
    wr_.resize(n);
    wi_.resize(n);
    for (std::size_t i = 0; i < n; ++i) sincos_turns(step.times(f.q_mod[i]).hi64(), wi_[i], wr_[i]);
    anchor();
  }

  std::int64_t index() const { return m_; }
  Angle position() const { return x0_ + step_.times(m_); }

  double value() const {
    const std::size_t n = re_.size();
    const double* __restrict w = f_->weight.data();
    const double* __restrict im = im_.data();
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * im[i];
    return acc;
  }

  double derivative() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < re_.size(); ++i) acc += f_->dweight[i] * re_[i];
    return acc;
  }

  void advance() {
    ++m_;
    if (m_ % resync_ == 0) {
      anchor();
      return;
    }
    const std::size_t n = re_.size();
    double* __restrict re = re_.data();
    double* __restrict im = im_.data();
    const double* __restrict wr = wr_.data();
    const double* __restrict wi = wi_.data();
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) {
      const double r = re[i] * wr[i] - im[i] * wi[i];
      const double s = re[i] * wi[i] + im[i] * wr[i];
      re[i] = r;
      im[i] = s;
    }
  }

 private:
  void anchor() {
    const Angle x = position();
    for (std::size_t i = 0; i < re_.size(); ++i)
      sincos_turns((x.times(f_->q_mod[i]) + f_->offset[i]).hi64(), im_[i], re_[i]);
  }

  const HarmonicSum* f_;
  Angle x0_, step_;
  int resync_;
  std::int64_t m_ = 0;
  std::vector<double> re_, im_, wr_, wi_;
};

// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) comp_ += (sum_ - t) + v;
    else comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace nicis
