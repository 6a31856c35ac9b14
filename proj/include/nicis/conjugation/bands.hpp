#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "nicis/fixed_point.hpp"

namespace nicis {

struct Band {
  BigRational a, b, c;
  double ad() const { return static_cast<double>(a); }
  double bd() const { return static_cast<double>(b); }
  double cd() const { return static_cast<double>(c); }
};

// Bands n = 1..size(); stage n also needs a_{n+1}, so a schedule with S bands drives S - 1 stages.
class BandSchedule {
 public:
  // a_n = 1 - 2^-n, b_n = a_n + 2^-(n+2), c_n = a_n + 3 * 2^-(n+3).
  static BandSchedule dyadic_default(std::size_t count) {
    std::vector<Band> v;
    for (std::size_t n = 1; n <= count; ++n) {
      const BigRational p(BigInt(1), pow2_big(static_cast<unsigned>(n)));
      const BigRational a = 1 - p;
      v.push_back({a, a + p / 4, a + 3 * p / 8});
    }
    return BandSchedule(std::move(v));
  }

  explicit BandSchedule(std::vector<Band> bands) : bands_(std::move(bands)) {
    if (bands_.empty()) throw std::invalid_argument("empty band schedule");
    for (std::size_t i = 0; i < bands_.size(); ++i) {
      const Band& B = bands_[i];
      if (!(B.a > 0 && B.a < B.b && B.b < B.c && B.c < 1))
        throw std::invalid_argument("band " + std::to_string(i + 1) + " violates 0 < a < b < c < 1");
      if (i + 1 < bands_.size() && !(B.c < bands_[i + 1].a))
        throw std::invalid_argument("band " + std::to_string(i + 1) + " violates c_n < a_{n+1}");
    }
  }

  std::size_t size() const { return bands_.size(); }
  std::size_t max_stages() const { return bands_.size() - 1; }
  const Band& band(std::size_t n) const { return bands_.at(n - 1); }
  const BigRational& next_a(std::size_t n) const { return bands_.at(n).a; }

  // eps_n = min_{k <= n} (b_k - a_k) / 2^(n - k + 1), exact.
  BigRational epsilon(std::size_t n) const {
    if (n < 1 || n > bands_.size()) throw std::out_of_range("epsilon index");
    BigRational best;
    for (std::size_t k = 1; k <= n; ++k) {
      const Band& B = band(k);
      BigRational v = (B.b - B.a) / BigRational(pow2_big(static_cast<unsigned>(n - k + 1)));
      if (k == 1 || v < best) best = v;
    }
    return best;
  }

 private:
  std::vector<Band> bands_;
};

}  // namespace nicis
