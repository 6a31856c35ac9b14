// One line per criterion: "criterion N: PASS|FAIL <detail>". Argument N runs only criterion N.
#include <boost/multiprecision/cpp_dec_float.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "nicis/conjugation/scheme.hpp"
#include "nicis/dynamics/classify.hpp"
#include "nicis/dynamics/denjoy_koksma.hpp"
#include "nicis/dynamics/pushforward.hpp"
#include "nicis/dynamics/rotation.hpp"
#include "nicis/number_theory/returns.hpp"
#include "nicis/parallel.hpp"
#include "nicis/skew_product/skew_product.hpp"

using namespace nicis;
using Dec = boost::multiprecision::cpp_dec_float_100;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Timer {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const RotationNumber& golden() {
  static const RotationNumber a = cf_expand("golden", 40);
  return a;
}

Angle random_angle(std::mt19937_64& rng) { return Angle::from_raw((static_cast<u128>(rng()) << 64) | rng()); }

Outcome coboundary() {
  Timer t;
  const PhiSeries phi = build_phi(golden(), 6);
  const TransferFunction h(phi);
  std::mt19937_64 rng(1);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const Angle x = random_angle(rng);
    worst = std::max(worst, std::fabs(h.eval(x + phi.alpha()) - h.eval(x) - phi.eval(x)));
  }
  const double s = t.seconds();
  return {worst < 1e-12 && s < 1.0, "max residual " + g(worst) + " (< 1e-12), " + g(s) + " s (< 1 s)"};
}

Outcome symmetry_involution() {
  const PhiSeries phi = build_phi(golden(), 6);
  std::mt19937_64 rng(2);
  double sym = 0;
  for (int i = 0; i < 10000; ++i) {
    const Angle x = random_angle(rng);
    sym = std::max(sym, std::fabs(phi.eval(-x - phi.alpha()) - phi.eval(x)));
  }
  const double inv = involution_residual(SkewProduct(phi), 100, 1000, 2);
  return {sym < 1e-12 && inv < 1e-10, "symmetry " + g(sym) + " (< 1e-12), involution " + g(inv) + " (< 1e-10)"};
}

Outcome birkhoff_crosscheck() {
  Timer t;
  const PhiSeries phi = build_phi(golden(), 6);
  std::mt19937_64 rng(3);
  std::vector<Angle> xs(1000);
  for (auto& x : xs) x = random_angle(rng);
  std::vector<double> err(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) {
    err[i] = std::fabs(birkhoff_sum_direct(phi, xs[i], 1000000) - birkhoff_sum_closed(phi, xs[i], std::int64_t{1000000}));
  });
  const double worst = *std::max_element(err.begin(), err.end());
  const double s = t.seconds();
  return {worst < 1e-9 && s < 30.0, "max |direct - closed| " + g(worst) + " at m = 1e6 (< 1e-9), " + g(s) + " s (< 30 s)"};
}

Outcome denjoy_koksma() {
  const PhiSeries phi = build_phi(golden(), 6);
  const auto prof = denjoy_koksma_profile(phi, phi.qs(), 1u << 20);
  const double var = total_variation(phi, default_variation_grid(phi));
  bool bounded = true, decreasing = true;
  std::string vals;
  for (std::size_t i = 0; i < prof.size(); ++i) {
    bounded = bounded && prof[i].sup <= var;
    if (i >= 2) decreasing = decreasing && prof[i].sup < prof[i - 1].sup;
    vals += (i ? "," : "") + g(prof[i].sup);
  }
  const bool small = prof.size() >= 6 && prof[5].sup < 1e-2;
  return {bounded && decreasing && small, "sup|phi_q| = [" + vals + "], Var " + g(var) + ", bounded " +
                                              (bounded ? "yes" : "no") + ", decreasing " + (decreasing ? "yes" : "no") +
                                              ", 6th entry < 1e-2 " + (small ? "yes" : "no")};
}

Outcome classification() {
  const PhiSeries phi = PhiSeries::machine_precision(golden());
  const SkewProduct F(phi);
  const std::size_t n = 1000;
  std::mt19937_64 rng(5);
  std::vector<Angle> xs(n);
  for (auto& x : xs) x = random_angle(rng);
  std::vector<Verdict> v(n), vm(n);
  parallel_for(n, [&](std::size_t i) {
    v[i] = classify_fiber(F, xs[i], 1000000, 0.5, 1.0, 1e-3).verdict;
    vm[i] = classify_fiber(F, -xs[i], 1000000, 0.5, 1.0, 1e-3).verdict;
  });
  std::size_t dense = 0, decided = 0, agree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    dense += v[i] == Verdict::DenseLike;
    if (v[i] != Verdict::Undecided && vm[i] != Verdict::Undecided) {
      ++decided;
      agree += vm[i] == mirror(v[i]);
    }
  }
  const double fd = static_cast<double>(dense) / n;
  const double fm = decided ? static_cast<double>(agree) / decided : 1.0;
  return {fd >= 0.9 && fm >= 0.95, "DenseLike " + g(fd) + " (>= 0.9), mirror agreement " + g(fm) + " over " +
                                       std::to_string(decided) + " decided pairs (>= 0.95); N = " +
                                       std::to_string(phi.n_terms()) + ", horizon 1e6, a 0.5, b 1, strip 1e-3"};
}

Outcome coverage() {
  const auto reps = pushforward_histogram(golden(), {10, 40}, CellGrid{50, 20, 2.0}, 1000000, 6);
  const bool grows = reps[1].covered_fraction > reps[0].covered_fraction;
  const bool chi = reps[0].chi2_pass && reps[1].chi2_pass;
  return {grows && chi, "covered N=10 " + g(reps[0].covered_fraction) + ", N=40 " + g(reps[1].covered_fraction) +
                            ", chi2 " + g(reps[1].chi2) + " < " + g(reps[1].chi2_critical)};
}

SchemeReport liouville_run() {
  SchemeOptions o;
  o.n_stages = 3;
  return run_scheme(cf_expand("series:factorial10", 8), BandSchedule::dyadic_default(5), o);
}

Outcome rotation_numbers() {
  const std::int64_t m = 1000000;
  const auto est = rotation_number_estimate(SkewProduct(build_phi(golden(), 6)), AnnulusPoint::make(0.3, 0.0), m);
  const Dec ref = (boost::multiprecision::sqrt(Dec(5)) - 1) / 2;
  const double errF = std::fabs(est.value - static_cast<double>(ref));
  bool ok = errF < 1.0 / m + 1e-9;
  std::string detail = "F: |rho - alpha| " + g(errF) + " (< 1e-6 + 1e-9)";
  const SchemeReport rep = liouville_run();
  ok = ok && rep.feasible && rep.stages.size() == 3;
  for (const auto& st : rep.stages) {
    if (!st.rotation) {
      ok = false;
      continue;
    }
    const double target = st.selection.chosen.to_double();
    const double e = std::fabs(st.rotation->value - target);
    const double tol = 1.0 / static_cast<double>(st.rotation->steps);
    ok = ok && e < tol;
    detail += "; f_" + std::to_string(st.n) + ": " + g(e) + " (< " + g(tol) + ")";
  }
  return {ok, detail};
}

Outcome feasibility() {
  Timer t;
  const SchemeReport liou = liouville_run();
  bool ok = liou.feasible && liou.completed == 3;
  std::string detail = "factorial series: " + std::to_string(liou.completed) + " stages";
  for (const auto& st : liou.stages) {
    const bool entry = st.entry && st.entry->all_certified();
    const bool dist = st.distance && st.distance->below_eps;
    ok = ok && entry && dist;
    detail += "; stage " + std::to_string(st.n) + " q " + st.selection.chosen.q.str() + " d " +
              (st.distance ? g(st.distance->measured) : "?") +
              (st.distance && st.distance->eps ? " < eps " + g(static_cast<double>(*st.distance->eps)) : " (no eps_0)") +
              (entry ? " entry ok" : " entry FAILED");
  }
  SchemeOptions o;
  o.n_stages = 3;
  const SchemeReport gold = run_scheme(golden(), BandSchedule::dyadic_default(5), o);
  const bool infeasible = !gold.feasible && gold.binding == "(2.2)";
  ok = ok && infeasible;
  const double s = t.seconds();
  ok = ok && s < 600;
  detail += "; golden: " + std::string(gold.feasible ? "feasible" : "Infeasible") + " binding " + gold.binding + "; " +
            g(s) + " s (< 600 s)";
  return {ok, detail};
}

Outcome kmap_geometry() {
  const BandSchedule bands = BandSchedule::dyadic_default(5);
  const BigInt qs[] = {BigInt(9), BigInt(1000000), boost::multiprecision::pow(BigInt(10), 24)};
  bool ok = true;
  std::string detail;
  for (std::size_t n = 1; n <= 3; ++n) {
    auto k = std::make_shared<const KMap>(KMap::for_stage(bands, n));
    const auto& d = k->diagnostics();
    // Identity beyond a_{n+1}: the map must return its input unchanged.
    bool exact_identity = true;
    for (const auto& p : annulus_lattice(1000)) {
      if (std::fabs(p.y) < k->cutoff().outer()) continue;
      const AnnulusPoint r = k->apply(p);
      exact_identity = exact_identity && r.y == p.y && r.x.frac == p.x.frac && r.x.turns == p.x.turns;
    }
    const LiftedKMap h(k, qs[n - 1]);
    const Angle gen = Angle::from_rational(BigRational(BigInt(1), qs[n - 1]));
    double comm = 0;
    for (const auto& p : annulus_lattice(1000)) {
      AnnulusPoint a = h.apply({p.x + gen, p.y});
      AnnulusPoint b = h.apply(p);
      b.x = b.x + gen;
      comm = std::max(comm, lifted_distance(a, b));
    }
    const bool st = d.jacobian_residual < 1e-8 && d.graph_residual < 1e-8 && d.identity_residual < 1e-15 &&
                    exact_identity && comm < 1e-9;
    ok = ok && st;
    detail += (n > 1 ? "; " : "") + std::string("k_") + std::to_string(n) + " jac " + g(d.jacobian_residual) +
              " graph " + g(d.graph_residual) + " id " + g(d.identity_residual) + (exact_identity ? " exact" : " INEXACT") +
              " comm(q=" + qs[n - 1].str() + ") " + g(comm);
  }
  return {ok, detail};
}

Dec frac_dist(const Dec& v) {
  Dec f = v - boost::multiprecision::floor(v);
  return f < Dec(0.5) ? f : 1 - f;
}

Outcome number_theory() {
  Dec liou = 0;
  for (int k = 1, f = 1; k <= 5; ++k, f *= k) liou += boost::multiprecision::pow(Dec(10), -f);
  const std::pair<const char*, Dec> alphas[] = {{"golden", (boost::multiprecision::sqrt(Dec(5)) - 1) / 2},
                                                {"sqrt2-1", boost::multiprecision::sqrt(Dec(2)) - 1},
                                                {"series:factorial10", liou}};
  bool ok = true;
  std::string detail;
  std::mt19937_64 rng(10);
  for (const auto& [spec, ref] : alphas) {
    const auto a = cf_expand(spec, 20);
    std::vector<Dec> d(10001);
    std::vector<std::uint64_t> brute;
    Dec best = 1;
    for (std::uint64_t j = 1; j <= 10000; ++j) {
      d[j] = frac_dist(ref * j);
      if (d[j] < best) {
        best = d[j];
        brute.push_back(j);
      }
    }
    const bool returns_ok = closest_return_times(a, 10000) == brute;
    auto closest = [&](std::uint64_t q) {
      if (q > 10000) return is_closest_return(a, q);
      for (std::uint64_t j = 1; j < q; ++j)
        if (!(d[j] > d[q])) return false;
      return true;
    };
    int good = 0;
    for (int t = 0; t < 100; ++t) {
      const std::uint64_t n2 = 1 + rng() % 3000;
      Dec x2 = ref * n2;
      x2 -= boost::multiprecision::floor(x2);
      std::uint64_t n1 = 0;
      Dec gap = 2;
      for (std::uint64_t j = 0; j < n2; ++j) {
        Dec xj = ref * j;
        xj -= boost::multiprecision::floor(xj);
        Dec f = xj - x2;
        if (f < 0) f += 1;
        if (f < gap) {
          gap = f;
          n1 = j;
        }
      }
      const std::uint64_t n3 = refine_return_step(a, n1, n2);
      good += n3 > n2 && closest(n3 - n2);
    }
    ok = ok && returns_ok && good == 100;
    detail += std::string(detail.empty() ? "" : "; ") + spec + ": returns " + (returns_ok ? "agree" : "DISAGREE") +
              ", refinement " + std::to_string(good) + "/100";
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::function<Outcome()> criteria[] = {coboundary,     symmetry_involution, birkhoff_crosscheck, denjoy_koksma,
                                               classification, coverage,            rotation_numbers,    feasibility,
                                               kmap_geometry,  number_theory};
  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > 10) {
      std::cerr << "usage: acceptance [1-10]\n";
      return 2;
    }
  }
  bool all = true;
  for (int i = 1; i <= 10; ++i) {
    if (only && i != only) continue;
    Outcome o;
    try {
      o = criteria[i - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << i << ": " << (o.pass ? "PASS" : "FAIL") << " " << o.detail << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
