#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/integer/mod_inverse.hpp>

#include "nicis/conjugation/bands.hpp"
#include "nicis/conjugation/kmap.hpp"
#include "nicis/conjugation/lifted.hpp"
#include "nicis/conjugation/lipschitz.hpp"
#include "nicis/conjugation/selection.hpp"
#include "nicis/dynamics/rotation.hpp"
#include "nicis/parallel.hpp"

namespace nicis {

struct SchemeOptions {
  std::size_t n_stages = 3;
  std::size_t stage_cap = 4;
  Mode mode = Mode::C0;
  double cinf_safety = 1e3;
  std::size_t depth_cap = 60;
  std::size_t fiber_reps = 200;            // band certification representatives
  std::uint64_t grid_orbit_cap = 100000;   // explicit orbit certification only for q <= cap
  std::size_t entry_samples = 200;
  std::uint64_t entry_cap = 256;           // direct iterations per sampled f_n-orbit before aimed iterates
  std::size_t entry_targets = 256;         // aimed iterates per orbit, spread over one cell of the last lift
  std::size_t distance_grid = 24;
  std::uint64_t distance_j_cap = 10000;
  std::int64_t rotation_steps = 2000;
  std::size_t residual_samples = 1000;
  std::uint64_t seed = 1;
  KMapOptions kmap;
  std::function<void(const std::string&)> progress;  // optional phase log
};

// Everything band certification needs about a finished H_n.
struct StageGeometry {
  std::size_t n = 0;
  ConjugacyChain H;
  double a = 0, b = 0, c = 0;
  double L_H = 1.0;                 // upper estimate of L(H_n)
  bool image_circles_ok = false;
  double image_circles_min = 0.0;   // min over circles of max |y| on the image
};

// Representative fiber heights: v_i = -1 + 2i/m, which includes v = 0.
inline std::vector<double> fiber_heights(std::size_t m) {
  std::vector<double> v(m);
  for (std::size_t i = 0; i < m; ++i) v[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(m);
  return v;
}

// Every H_n-image of a horizontal circle meets |y| >= c_n: scan cell 0 of the q_n-fold cover.
inline void verify_image_circles(StageGeometry& g, const BigInt& q_n, std::size_t circles = 200, std::size_t per_cell = 256) {
  const auto vs = fiber_heights(circles);
  std::vector<double> best(vs.size(), 0.0);
  const double qd = static_cast<double>(q_n);
  parallel_for(vs.size(), [&](std::size_t i) {
    double m = 0.0;
    for (std::size_t j = 0; j < per_cell; ++j) {
      const double u = static_cast<double>(j) / static_cast<double>(per_cell);
      const AnnulusPoint z = g.H.apply(AnnulusPoint{LiftedAngle::from_double(u / qd), vs[i]});
      m = std::max(m, std::fabs(z.y));
      if (m >= g.c) break;
    }
    best[i] = m;
  });
  g.image_circles_min = *std::min_element(best.begin(), best.end());
  g.image_circles_ok = g.image_circles_min >= g.c - 1e-12;
}

enum class BandMethod { Auto, Grid, Lipschitz };

// Band certification: every orbit of H_n o S_{1/q} o H_n^{-1} meets |y| >= b_n.
inline BandCertificate band_intersection_check(const StageGeometry& g, const BigInt& q, BandMethod method = BandMethod::Auto,
                                               std::size_t reps = 200, std::uint64_t grid_cap = 100000) {
  if (q < 1) throw std::invalid_argument("band_intersection_check: q must be >= 1");
  BandCertificate cert;
  cert.q = q;
  cert.lipschitz_threshold = g.L_H / (g.c - g.b);
  cert.image_circles_ok = g.image_circles_ok;
  const bool small = q <= grid_cap;
  if (method == BandMethod::Grid || (method == BandMethod::Auto && small)) {
    if (!small) {
      cert.note = "q above the explicit-orbit cap";
      return cert;
    }
    const auto qq = static_cast<std::uint64_t>(q);
    const auto vs = fiber_heights(reps);
    std::vector<double> peak(reps, 0.0);
    parallel_for(reps, [&](std::size_t i) {
      // Offsets u0 in {0, 1/4, 1/2, 3/4} / q; u0 = 0 with v = 0 is the fixed point on x = 0.
      const double u0 = static_cast<double>(i % 4) / 4.0;
      double m = 0.0;
      for (std::uint64_t s = 0; s < qq && m < g.b; ++s) {
        const double x = (u0 + static_cast<double>(s)) / static_cast<double>(qq);
        const AnnulusPoint z = g.H.apply(AnnulusPoint{LiftedAngle::from_double(x), vs[i]});
        m = std::max(m, std::fabs(z.y));
      }
      peak[i] = m;
    });
    cert.orbits_checked = reps;
    cert.orbits_hit = static_cast<std::size_t>(std::count_if(peak.begin(), peak.end(), [&](double m) { return m >= g.b; }));
    cert.worst_orbit_max_y = *std::min_element(peak.begin(), peak.end());
    if (cert.orbits_hit == reps) cert.by = CertifiedBy::GridOrbit;
    else cert.note = "a sampled orbit stays below b_n";
    return cert;
  }
  if (g.image_circles_ok && BigRational(q) >= BigRational(cert.lipschitz_threshold)) {
    cert.by = CertifiedBy::LipschitzCriterion;
  } else {
    cert.note = g.image_circles_ok ? "q below L(H_n)/(c_n - b_n)" : "image-circle check failed";
  }
  return cert;
}

// Sup over grid points and 1 <= j <= j_max of the distance between f^j and g^j (x on the circle).
inline double stage_distance(const ConjugatedRotation& f, const ConjugatedRotation& g, std::uint64_t j_max,
                             const std::vector<AnnulusPoint>& grid) {
  std::vector<double> worst(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t i) {
    const AnnulusPoint wf = f.chain().apply_inverse(grid[i]);
    const AnnulusPoint wg = g.chain().apply_inverse(grid[i]);
    double m = 0.0;
    for (std::uint64_t j = 1; j <= j_max; ++j) {
      const BigInt J(j);
      m = std::max(m, circle_point_distance(f.power_from(wf, J), g.power_from(wg, J)));
    }
    worst[i] = m;
  });
  return grid.empty() ? 0.0 : *std::max_element(worst.begin(), worst.end());
}

// Deterministic low-discrepancy points in [0,1) x [-1,1].
inline std::vector<AnnulusPoint> annulus_lattice(std::size_t n) {
  std::vector<AnnulusPoint> pts;
  const double g1 = 0.7548776662466927, g2 = 0.5698402909980532;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::fmod(0.5 + g1 * static_cast<double>(i + 1), 1.0);
    const double t = std::fmod(0.5 + g2 * static_cast<double>(i + 1), 1.0);
    pts.push_back(AnnulusPoint::make(s, -1.0 + 2.0 * t));
  }
  return pts;
}

struct EntryReport {
  std::size_t samples = 0;
  std::size_t entered = 0;               // reached |y| > a_n by direct iteration
  std::size_t entered_witness = 0;       // an explicit iterate j < q_{n+1} lands in U_n
  std::size_t lipschitz_certified = 0;   // neither, covered by the criterion
  std::size_t failed = 0;
  std::uint64_t max_iterations_used = 0;
  BigInt max_witness_j = 0;
  bool all_certified() const { return failed == 0 && entered + entered_witness + lipschitz_certified == samples; }
};

namespace detail {

// Iterate count j in [0, q) with S^j(w) nearest to target, where S is rotation by p/q.
inline BigInt iterate_towards(const Rational& rot, const BigInt& p_inv, const AnnulusPoint& w, Angle target) {
  const Angle d = target - w.x.frac;
  BigInt i = (from_u128(d.raw()) * rot.q + (BigInt(1) << 127)) >> 128;
  i %= rot.q;
  return (i * p_inv) % rot.q;
}

}  // namespace detail

// Sampled f_n-orbits enter U_n = {|y| > a_n} within q_{n+1} iterates. The first direct_cap
// iterates are tried in order; after that, iterates aimed at target_count points across one
// cell of the last lift are evaluated directly (f_n^j = H_n S^j H_n^{-1}).
inline EntryReport orbit_entry_check(const ConjugatedRotation& f, double a_n, std::size_t samples, std::uint64_t direct_cap,
                                     std::uint64_t seed, bool lipschitz_certified, std::size_t target_count = 32) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, 1.0), uy(-1.0, 1.0);
  std::vector<AnnulusPoint> pts;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = ux(rng);
    pts.push_back(AnnulusPoint::make(x, uy(rng)));
  }
  const Rational& rot = f.rotation();
  const BigInt& q = rot.q;
  const std::uint64_t limit = q <= BigInt(direct_cap) ? static_cast<std::uint64_t>(q) : direct_cap;
  const bool aim = limit < q && f.chain().size() > 0;
  BigInt p_inv = 0;
  std::vector<Angle> targets;
  if (aim) {
    BigInt p = rot.p % q;
    if (p < 0) p += q;
    p_inv = boost::integer::mod_inverse(p, q);
    const BigInt& qn = f.chain().factor(f.chain().size()).q();
    for (std::size_t t = 0; t < target_count; ++t)
      targets.push_back(Angle::from_rational(BigRational(BigInt(2 * t + 1), 2 * BigInt(target_count) * qn)));
  }
  std::vector<std::uint64_t> used(samples, 0);
  std::vector<BigInt> witness(samples, 0);
  std::vector<char> hit(samples, 0);  // 1 direct, 2 witness
  parallel_for(samples, [&](std::size_t i) {
    if (std::fabs(pts[i].y) > a_n) {
      hit[i] = 1;
      return;
    }
    const AnnulusPoint w = f.chain().apply_inverse(pts[i]);
    for (std::uint64_t j = 1; j < limit; ++j) {
      if (std::fabs(f.power_from(w, BigInt(j)).y) > a_n) {
        hit[i] = 1;
        used[i] = j;
        return;
      }
    }
    used[i] = limit;
    for (const Angle& t : targets) {
      const BigInt j = detail::iterate_towards(rot, p_inv, w, t);
      if (std::fabs(f.power_from(w, j).y) > a_n) {
        hit[i] = 2;
        witness[i] = j;
        return;
      }
    }
  });
  EntryReport r;
  r.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    r.max_iterations_used = std::max(r.max_iterations_used, used[i]);
    if (hit[i] == 1) ++r.entered;
    else if (hit[i] == 2) {
      ++r.entered_witness;
      if (witness[i] > r.max_witness_j) r.max_witness_j = witness[i];
    } else if (lipschitz_certified && limit < q) ++r.lipschitz_certified;
    else ++r.failed;
  }
  return r;
}

struct DistanceRecord {
  std::size_t from = 0, to = 0;          // d(f_from, f_to)
  double measured = 0.0;
  std::uint64_t j_max = 0;
  std::size_t grid = 0;
  std::optional<BigRational> eps;        // eps_from, absent for the pair (f_0, f_1)
  bool below_eps = true;
  double lipschitz_bound = 0.0;          // L(H_to) j_max |alpha_{to+1} - alpha_to|
  double printed_bound = 0.0;            // C_{n-1} q_1..q_n q_n 2|alpha - alpha_n|, n = to, index as printed
  double bound = 0.0;                    // same with C_n, which covers L(H_n)
};

struct StageRecord {
  std::size_t n = 0;
  Rational alpha_n;
  Band band;
  double outer = 0.0;                    // a_{n+1}
  BigRational eps;
  double L_k = 0.0, L_h = 0.0, C = 0.0, L_H = 0.0;
  KMapDiagnostics kmap;
  double commutation_residual = 0.0;     // h_n S_{1/q_n} vs S_{1/q_n} h_n
  double inverse_residual = 0.0;         // H_n H_n^{-1} vs id
  bool image_circles_ok = false;
  Selection selection;
  // Filled once alpha_{n+1} is chosen and f_n exists.
  std::optional<RotationEstimate> rotation;
  std::optional<EntryReport> entry;
  std::optional<DistanceRecord> distance;  // d(f_{n-1}, f_n)
};

struct SchemeReport {
  std::string alpha_spec;
  Mode mode = Mode::C0;
  std::size_t n_stages = 0;
  Rational alpha_1;
  bool feasible = true;
  std::size_t completed = 0;
  std::optional<std::size_t> infeasible_stage;
  std::string binding;
  std::optional<RotationEstimate> f0_rotation;
  std::vector<StageRecord> stages;
  std::vector<std::string> notes;
};

inline BigRational exact(double v) { return BigRational(v); }

// Runs stages 1..n_stages of the conjugation scheme. Infeasibility is reported, not thrown.
inline SchemeReport run_scheme(RotationNumber alpha, const BandSchedule& bands, const SchemeOptions& opt) {
  if (opt.n_stages > opt.stage_cap)
    throw ConfigError("n_stages " + std::to_string(opt.n_stages) + " exceeds the stage cap " + std::to_string(opt.stage_cap));
  if (bands.size() < opt.n_stages + 1)
    throw ConfigError("band schedule has " + std::to_string(bands.size()) + " bands; " +
                      std::to_string(opt.n_stages) + " stages need " + std::to_string(opt.n_stages + 1));
  SchemeReport rep;
  rep.alpha_spec = alpha.spec();
  rep.mode = opt.mode;
  rep.n_stages = opt.n_stages;
  if (opt.mode == Mode::Cinf) rep.notes.push_back("surrogate-constant: C_4(n,n) replaced by safety * 2 C_n");

  // alpha_1: first convergent with q >= 2.
  std::size_t k1 = 1;
  for (;; ++k1) {
    if (k1 > alpha.depth()) alpha = alpha.deepened(std::max<std::size_t>(k1, 2 * alpha.depth()));
    if (alpha.convergent(k1).q >= 2) break;
  }
  rep.alpha_1 = alpha.convergent(k1);
  const ConjugatedRotation f0(ConjugacyChain{}, rep.alpha_1);
  if (opt.n_stages == 0) {
    rep.f0_rotation = rotation_number_estimate(f0, AnnulusPoint::make(0.25, 0.0), opt.rotation_steps);
    return rep;
  }

  auto log = [&](const std::string& m) {
    if (opt.progress) opt.progress(m);
  };
  ConjugacyChain H;
  ConjugatedRotation f_prev = f0;
  Rational alpha_n = rep.alpha_1;
  std::vector<BigInt> qs;
  double C = 1.0, L_H = 1.0;
  const auto dist_grid = annulus_lattice(opt.distance_grid);
  for (std::size_t n = 1; n <= opt.n_stages; ++n) {
    StageRecord st;
    st.n = n;
    st.alpha_n = alpha_n;
    st.band = bands.band(n);
    st.outer = static_cast<double>(bands.next_a(n));
    st.eps = bands.epsilon(n);
    const BigInt q_n = alpha_n.q;
    qs.push_back(q_n);

    log("stage " + std::to_string(n) + ": k-map");
    auto k = std::make_shared<const KMap>(KMap::for_stage(bands, n, opt.kmap));
    st.kmap = k->diagnostics();
    st.L_k = lipschitz_estimate([&](const AnnulusPoint& p) { return k->apply(p); }, kmap_lipschitz_grid(*k));
    LiftedKMap h(k, q_n);
    LipschitzOptions lo;
    lo.x_scale = 1.0 / static_cast<double>(q_n);
    st.L_h = lipschitz_estimate([&](const AnnulusPoint& p) { return h.apply(p); },
                                lifted_lipschitz_grid(*k, static_cast<double>(q_n)), lo);
    log("stage " + std::to_string(n) + ": Lipschitz done");
    C *= st.L_k;
    L_H *= st.L_h;
    st.C = C;
    st.L_H = L_H;
    H = H.extended(h);

    // Commutation of h_n with S_{1/q_n}, and H_n H_n^{-1}, on sample points.
    const Angle gen = Angle::from_rational(BigRational(BigInt(1), q_n));
    for (const auto& p : annulus_lattice(opt.residual_samples)) {
      AnnulusPoint a = h.apply({p.x + gen, p.y});
      AnnulusPoint b = h.apply(p);
      b.x = b.x + gen;
      st.commutation_residual = std::max(st.commutation_residual, lifted_distance(a, b));
      st.inverse_residual = std::max(st.inverse_residual, lifted_distance(H.apply(H.apply_inverse(p)), p));
    }

    StageGeometry geo;
    geo.n = n;
    geo.H = H;
    geo.a = st.band.ad();
    geo.b = st.band.bd();
    geo.c = st.band.cd();
    geo.L_H = L_H;
    verify_image_circles(geo, q_n, opt.fiber_reps);
    st.image_circles_ok = geo.image_circles_ok;

    log("stage " + std::to_string(n) + ": selection");
    SelectionInputs in;
    in.n = n;
    in.eps = st.eps;
    in.C = exact(C);
    in.qs = qs;
    in.alpha_n = alpha_n;
    in.mode = opt.mode;
    in.cinf_safety = opt.cinf_safety;
    in.depth_cap = opt.depth_cap;
    st.selection = choose_next_alpha(in, alpha, [&](const BigInt& q) {
      return band_intersection_check(geo, q, BandMethod::Auto, opt.fiber_reps, opt.grid_orbit_cap);
    });
    if (!st.selection.feasible) {
      rep.feasible = false;
      rep.infeasible_stage = n;
      rep.binding = st.selection.binding;
      rep.stages.push_back(std::move(st));
      return rep;
    }

    const Rational next = st.selection.chosen;
    const ConjugatedRotation f_n(H, next);
    log("stage " + std::to_string(n) + ": rotation and orbit entry");
    st.rotation = rotation_number_estimate(f_n, AnnulusPoint::make(0.25, 0.1), opt.rotation_steps);
    st.entry = orbit_entry_check(f_n, geo.a, opt.entry_samples, opt.entry_cap, opt.seed + n,
                                 st.selection.band.by == CertifiedBy::LipschitzCriterion, opt.entry_targets);

    log("stage " + std::to_string(n) + ": distance");
    DistanceRecord d;
    d.from = n - 1;
    d.to = n;
    d.j_max = q_n <= BigInt(opt.distance_j_cap) ? static_cast<std::uint64_t>(q_n) : opt.distance_j_cap;
    d.grid = dist_grid.size();
    d.measured = stage_distance(f_prev, f_n, d.j_max, dist_grid);
    if (n >= 2) {
      d.eps = bands.epsilon(n - 1);
      d.below_eps = exact(d.measured) < *d.eps;
    }
    const BigRational step = abs(next.value() - alpha_n.value());
    d.lipschitz_bound = static_cast<double>(exact(L_H) * BigRational(d.j_max) * step);
    const BigRational err_n = detail::distance_interval(alpha, alpha_n).hi;
    BigRational printed = exact(C / st.L_k) * BigRational(q_n * q_n) * 2 * err_n;
    for (std::size_t i = 0; i + 1 < qs.size(); ++i) printed *= BigRational(qs[i]);
    d.printed_bound = static_cast<double>(printed);
    d.bound = static_cast<double>(printed * exact(st.L_k));
    st.distance = d;

    rep.stages.push_back(std::move(st));
    rep.completed = n;
    f_prev = f_n;
    alpha_n = next;
  }
  return rep;
}

}  // namespace nicis
