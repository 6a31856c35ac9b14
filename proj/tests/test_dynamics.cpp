#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nicis/dynamics/classify.hpp"
#include "nicis/dynamics/denjoy_koksma.hpp"
#include "nicis/dynamics/density.hpp"
#include "nicis/dynamics/pushforward.hpp"
#include "nicis/dynamics/rotation.hpp"
#include "nicis/number_theory/continued_fraction.hpp"
#include "nicis/skew_product/skew_product.hpp"

using namespace nicis;

namespace {

const RotationNumber& golden() {
  static const RotationNumber a = cf_expand("golden", 40);
  return a;
}

const PhiSeries& golden6() {
  static const PhiSeries p = build_phi(golden(), 6);
  return p;
}

std::vector<double> negated(std::vector<double> v) {
  for (auto& y : v) y = -y;
  return v;
}

}  // namespace

TEST(DenjoyKoksma, ProfileBoundedByVariationAndDecreasing) {
  const auto& p = golden6();
  const auto prof = denjoy_koksma_profile(p, p.qs(), 1u << 20);
  const double var = total_variation(p, default_variation_grid(p));
  ASSERT_EQ(prof.size(), 6u);
  for (const auto& e : prof) EXPECT_LE(e.sup, var);
  for (std::size_t i = 2; i < prof.size(); ++i) EXPECT_LT(prof[i].sup, prof[i - 1].sup) << "entry " << i + 1;
}

TEST(DenjoyKoksma, CrosscheckAgainstDirectSums) {
  const auto& p = golden6();
  for (const auto& e : denjoy_koksma_profile(p, p.qs(), 1u << 12)) {
    ASSERT_FALSE(std::isnan(e.crosscheck));
    EXPECT_LT(e.crosscheck, 1e-9);
  }
}

TEST(DenjoyKoksma, SingleTermAmplitude) {
  // phi_{q} for one term c sin: amplitude 2c |sin(pi q q_1 alpha)| <= 2c pi ||q q_1 alpha||.
  const auto p = build_phi(golden(), 1);
  const BigInt q1 = p.qs()[0];
  const auto e = denjoy_koksma_profile(p, {q1}, 1u << 16).front();
  const double t = golden().value().times(q1 * q1).distance_to_zero();
  EXPECT_LE(e.sup, 2 * 2 * M_PI * t + 1e-12);
  EXPECT_NEAR(e.sup, 2 * 2 * std::sin(M_PI * t), 1e-6);
}

TEST(DenjoyKoksma, RejectsNonClosestReturn) {
  EXPECT_THROW(denjoy_koksma_profile(golden6(), {BigInt(4)}, 64), std::invalid_argument);
}

TEST(Classify, ZeroPhiIsUndecided) {
  const SkewProduct F(PhiSeries::zero(golden()));
  const auto r = classify_fiber(F, Angle::from_double(0.3), 10000, 0.5, 1.0, 1e-3);
  EXPECT_EQ(r.verdict, Verdict::Undecided);
  EXPECT_EQ(r.y_min, 0.0);
  EXPECT_EQ(r.y_max, 0.0);
}

TEST(Classify, DeterministicAndVerdictIsDerived) {
  const SkewProduct F(golden6());
  std::mt19937_64 rng(9);
  for (int i = 0; i < 10; ++i) {
    const Angle x = Angle::from_raw((static_cast<u128>(rng()) << 64) | rng());
    const auto a = classify_fiber(F, x, 100000, 0.5, 1.0, 1e-3);
    const auto b = classify_fiber(F, x, 100000, 0.5, 1.0, 1e-3);
    EXPECT_EQ(a.verdict, b.verdict);
    EXPECT_EQ(a.strip_returns, b.strip_returns);
    EXPECT_EQ(derive_verdict(a), a.verdict);
  }
}

TEST(Classify, DeriveVerdictCases) {
  ClassificationReport r;
  r.a = 0.5;
  r.b = 1.0;
  r.strip_tol = 0.5;
  r.strip_returns = {-0.7, 0.8};
  EXPECT_EQ(derive_verdict(r), Verdict::DenseLike);
  r.strip_returns = {0.1, 0.9};
  r.y_max = 2.0;
  EXPECT_EQ(derive_verdict(r), Verdict::PositiveLike);
  r.strip_returns = {-0.1, -0.9};
  r.y_max = 0.0;
  r.y_min = -2.0;
  EXPECT_EQ(derive_verdict(r), Verdict::NegativeLike);
  EXPECT_EQ(mirror(Verdict::PositiveLike), Verdict::NegativeLike);
  EXPECT_EQ(mirror(Verdict::DenseLike), Verdict::DenseLike);
}

TEST(Classify, MirrorFiberHasNegatedLimitSet) {
  const SkewProduct F(golden6());
  std::mt19937_64 rng(10);
  for (int i = 0; i < 10; ++i) {
    const Angle x = Angle::from_raw((static_cast<u128>(rng()) << 64) | rng());
    const auto u = limit_set_sample(F, x, 100000, 1e-3);
    const auto v = limit_set_sample(F, -x, 100000, 1e-3);
    ASSERT_EQ(u.size(), v.size());
    EXPECT_LT(hausdorff_distance(negated(u), v), 1e-9);
    const auto cu = classify_fiber(F, x, 100000, 0.5, 1.0, 1e-3);
    const auto cv = classify_fiber(F, -x, 100000, 0.5, 1.0, 1e-3);
    EXPECT_EQ(cv.verdict, mirror(cu.verdict));
  }
}

TEST(Classify, ZeroPhiLimitSetIsZero) {
  const SkewProduct F(PhiSeries::zero(golden()));
  const auto s = limit_set_sample(F, Angle::from_double(0.1), 50000, 1e-2);
  ASSERT_FALSE(s.empty());
  for (double y : s) EXPECT_EQ(y, 0.0);
}

TEST(Classify, HausdorffAndClosureHelpers) {
  EXPECT_EQ(hausdorff_distance({0, 1}, {0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(hausdorff_distance({0, 1}, {0, 1.5}), 0.5);
  EXPECT_DOUBLE_EQ(semigroup_closure_fraction({-1, 0, 1}, 1e-9), 1.0);
}

TEST(Pushforward, ZeroTermsFillOneRow) {
  const auto reps = pushforward_histogram(golden(), {0}, CellGrid{}, 100000, 1);
  ASSERT_EQ(reps.size(), 1u);
  EXPECT_DOUBLE_EQ(reps[0].covered_fraction, 1.0 / 20);
  EXPECT_TRUE(reps[0].chi2_pass);
}

TEST(Pushforward, MoreTermsCoverMore) {
  const auto reps = pushforward_histogram(golden(), {10, 40}, CellGrid{}, 100000, 1);
  ASSERT_EQ(reps.size(), 2u);
  EXPECT_GT(reps[1].covered_fraction, reps[0].covered_fraction);
  EXPECT_TRUE(reps[1].chi2_pass);
  EXPECT_LT(reps[1].chi2, reps[1].chi2_critical);
  std::uint64_t total = 0;
  for (auto c : reps[1].column_totals) total += c;
  EXPECT_EQ(total, 100000u);
}

TEST(Pushforward, SameSeedSameCounts) {
  const auto a = pushforward_histogram(golden(), {5}, CellGrid{}, 20000, 42);
  const auto b = pushforward_histogram(golden(), {5}, CellGrid{}, 20000, 42);
  EXPECT_EQ(a[0].counts, b[0].counts);
}

TEST(Rotation, RigidRotationIsExact) {
  const RigidRotation R{golden().value()};
  const auto est = rotation_number_estimate(R, AnnulusPoint::make(0.2, 0.0), 100000);
  EXPECT_NEAR(est.value, golden().value_double(), 1.0 / 100000 + 1e-9);
}

TEST(Rotation, SkewProductHasRotationAlpha) {
  const SkewProduct F(golden6());
  const auto est = rotation_number_estimate(F, AnnulusPoint::make(0.7, 0.3), 100000);
  EXPECT_NEAR(est.value, golden().value_double(), 1.0 / 100000 + 1e-9);
  EXPECT_LT(est.error_bar, 1e-9);
}

TEST(Density, ZeroPhiNeverFillsPlane) {
  const SkewProduct F(PhiSeries::zero(golden()));
  const auto r = dense_orbit_search(F, 1.0, 100000, 2);
  EXPECT_TRUE(std::isinf(r.best_eps));
}

TEST(Density, SkewProductFillsCoarseCells) {
  const SkewProduct F(PhiSeries::machine_precision(golden()));
  const auto r = dense_orbit_search(F, 0.5, 1000000, 2);
  EXPECT_LE(r.best_eps, 0.5);
}

TEST(Density, LongerHorizonRefines) {
  // Each orbit stays on its own curve y = h(x) - h(x0), so single fibers saturate; best of 4 still improves.
  const SkewProduct F(PhiSeries::machine_precision(golden()));
  const auto r6 = dense_orbit_search(F, 0.5, 1000000, 4);
  const auto r7 = dense_orbit_search(F, 0.5, 10000000, 4);
  EXPECT_LT(r7.best_eps, r6.best_eps);
}

TEST(Density, ThreeDistanceTheorem) {
  for (const char* s : {"golden", "sqrt2-1", "series:factorial10"}) {
    const auto a = cf_expand(s, 12);
    for (std::uint64_t m : {2u, 7u, 50u, 1000u, 4321u}) {
      const auto g = circle_orbit_gaps(a.value(), m);
      EXPECT_LE(g.size(), 3u) << s << " m=" << m;
      if (g.size() == 3) EXPECT_NEAR(g[2], g[0] + g[1], 1e-15);
    }
  }
}
