#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nicis/conjugation/bands.hpp"
#include "nicis/errors.hpp"
#include "nicis/fixed_point.hpp"

namespace nicis {

namespace detail {
inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}
}  // namespace detail

// chi(y) = 1 for |y| <= d, 0 for |y| >= outer, C^4 smoothstep of degree 9 in between.
class Cutoff {
 public:
  Cutoff() = default;
  Cutoff(double d, double outer) : d_(d), outer_(outer), w_(outer - d) {
    if (!(d > 0 && outer > d)) throw std::invalid_argument("cutoff needs 0 < d < outer");
  }
  double d() const { return d_; }
  double outer() const { return outer_; }

  // chi, chi', chi'' at y.
  template <class T = double>
  std::array<T, 3> eval(T y) const {
    const T ay = std::fabs(y);
    if (ay <= d_) return {T(1), T(0), T(0)};
    if (ay >= outer_) return {T(0), T(0), T(0)};
    const T w = w_;
    const T t = (ay - T(d_)) / w;
    const T s = 1 - t;
    const T t2 = t * t, t3 = t2 * t, t4 = t2 * t2, t5 = t4 * t;
    const T S = t5 * (126 + t * (-420 + t * (540 + t * (-315 + 70 * t))));
    const T s3 = s * s * s;
    const T dS = 630 * t4 * s3 * s;
    const T ddS = 2520 * t3 * s3 * (1 - 2 * t);
    const T sg = y > 0 ? T(1) : T(-1);
    return {1 - S, -sg * dS / w, -ddS / (w * w)};
  }

  static constexpr double kMaxSlope = 630.0 / 256.0;  // max S'
  static constexpr double kMaxCurvature = 9.05;        // bound on max |S''|
  double w() const { return w_; }

 private:
  double d_ = 0.5, outer_ = 1.0, w_ = 0.5;
};

struct KMapOptions {
  std::size_t steps = 0;        // 0: chosen from the field's Jacobian bound
  int max_halvings = 6;
  double jacobian_tol = 1e-8;
  std::size_t check_points = 1000;
  double fd_step = 1e-7;        // central-difference step for the long double Jacobian check
  bool verify = true;
};

struct KMapDiagnostics {
  double jacobian_residual = 0.0;
  double graph_residual = 0.0;
  double identity_residual = 0.0;
  double fixed_line_residual = 0.0;
  double precision_gap = 0.0;  // max |double map - long double map| over the check points
  std::size_t steps = 0;
  int halvings = 0;
  std::size_t newton_failures = 0;
};

// Time-1 map of the stream function H = (c / 2pi)(cos 2pi x - 1) chi(y), on the lifted coordinate u.
// Integrated by the symmetric triple-jump composition of the implicit midpoint rule, so the
// backward map is the exact adjoint and every step is symplectic.
class KMap {
 public:
  static KMap build(double c, double d, double outer, const KMapOptions& opt = {}) {
    KMap k(c, Cutoff(d, outer));
    std::size_t steps = opt.steps ? opt.steps : k.suggested_steps();
    double previous = std::numeric_limits<double>::infinity();
    for (int halving = 0;; ++halving) {
      k.set_steps(steps);
      k.diag_ = KMapDiagnostics{};
      k.diag_.steps = steps;
      k.diag_.halvings = halving;
      if (!opt.verify) return k;
      k.verify(opt);
      const double r = k.diag_.jacobian_residual;
      if (r <= opt.jacobian_tol && k.failures() == 0) return k;
      // A residual that no longer shrinks with the step is the difference quotient's floor, not
      // discretisation error; further halvings only cost time.
      const bool stalled = k.failures() == 0 && r > 0.5 * previous;
      if (halving >= opt.max_halvings || stalled)
        throw IntegratorTolerance("k-map check failed after " + std::to_string(halving) +
                                  " step halvings" + (stalled ? " (residual stalled)" : "") +
                                  ": Jacobian residual " + detail::sci(r) + ", Newton failures " +
                                  std::to_string(k.failures()));
      previous = r;
      steps *= 2;
    }
  }

  // Stage n of a schedule: c = c_n, outer = a_{n+1}, d = (c_n + a_{n+1}) / 2.
  static KMap for_stage(const BandSchedule& bands, std::size_t n, const KMapOptions& opt = {}) {
    const double c = bands.band(n).cd();
    const double outer = static_cast<double>(bands.next_a(n));
    return build(c, 0.5 * (c + outer), outer, opt);
  }

  double c() const { return c_; }
  const Cutoff& cutoff() const { return chi_; }
  std::size_t steps() const { return steps_; }
  const KMapDiagnostics& diagnostics() const { return diag_; }
  std::size_t failures() const { return failures_ ? failures_->load() : 0; }

  // Vector field and its Jacobian [[fxx, fxy], [fyx, fyy]].
  template <class T = double>
  void field(T u, T y, T& fx, T& fy, T* jac = nullptr) const {
    const auto ch = chi_.eval<T>(y);
    const T two_pi = kTwoPiL;
    const T c = c_;
    const T s = std::sin(two_pi * u), co = std::cos(two_pi * u);
    const T g = c / two_pi * (co - 1);
    fx = g * ch[1];
    fy = c * s * ch[0];
    if (jac) {
      jac[0] = -c * s * ch[1];
      jac[1] = g * ch[2];
      jac[2] = two_pi * c * co * ch[0];
      jac[3] = c * s * ch[1];
    }
  }

  // Forward (dir = +1) or inverse (dir = -1) map in local coordinates; u is a real lift.
  // T = long double runs the identical scheme with a lower rounding floor (used by verify()).
  template <class T = double>
  std::pair<T, T> flow(T u, T y, int dir) const {
    if (c_ == 0.0 || std::fabs(y) >= chi_.outer()) return {u, y};
    if (u == std::floor(u)) return {u, y};  // vertical fixed lines x in Z
    const T d = chi_.d();
    const T two_pi = kTwoPiL;
    const std::size_t n_sub = taus_.size();
    // Inner-zone motion is tracked from an anchor so that y depends smoothly on the start value.
    bool inner = false;
    T y_anchor = 0, v = 0, u_v = std::numeric_limits<T>::quiet_NaN();
    std::size_t i_anchor = 0;
    auto current_y = [&](std::size_t i) {
      return inner ? y_anchor + v * static_cast<T>(times_[i] - times_[i_anchor]) * dir : y;
    };
    const T h = T(1) / static_cast<T>(steps_);
    for (std::size_t i = 0; i < n_sub; ++i) {
      const T tau = dir * static_cast<T>(taus_[i]);
      const T y0 = current_y(i);
      if (inner && i % 3 == 0 && v != 0) {
        // Within K whole triples the substep times stay within (K + gamma1) h of the current one,
        // so every substep there is provably inner: jump over them.
        const T room = (d - std::fabs(y0) - T(1e-12)) / (std::fabs(v) * h) - T(kGamma1);
        if (room >= 1) {
          const std::size_t K = std::min<std::size_t>(static_cast<std::size_t>(room), (n_sub - i) / 3);
          if (K > 0) {
            i += 3 * K - 1;
            continue;
          }
        }
      }
      if (std::fabs(y0) <= d) {
        if (u != u_v) {
          v = static_cast<T>(c_) * std::sin(two_pi * u);
          u_v = u;
        }
        const T y1 = y0 + tau * v;
        if (std::fabs(y1) <= d) {
          if (!inner) {
            inner = true;
            y_anchor = y0;
            i_anchor = i;
          }
          continue;
        }
      }
      inner = false;
      y = y0;
      if (std::fabs(y) >= chi_.outer()) break;  // the field vanishes there for good
      midpoint_step(u, y, tau);
    }
    if (inner) y = current_y(n_sub);
    return {u, y};
  }

  std::pair<double, double> forward(double u, double y) const { return flow(u, y, +1); }
  std::pair<double, double> inverse(double u, double y) const { return flow(u, y, -1); }

  AnnulusPoint apply(const AnnulusPoint& p) const { return apply_dir(p, +1); }
  AnnulusPoint apply_inverse(const AnnulusPoint& p) const { return apply_dir(p, -1); }

  std::size_t suggested_steps() const {
    if (c_ == 0.0) return 1;
    const double w = chi_.w();
    const double slope = Cutoff::kMaxSlope / w, curv = Cutoff::kMaxCurvature / (w * w);
    const double dmax = c_ * c_ * (slope * slope + 2.0 * curv) + kTwoPi * kTwoPi * c_ * c_;
    const double need = kGamma2Abs * std::sqrt(dmax);
    std::size_t m = 64;
    while (static_cast<double>(m) < need) m *= 2;
    return m;
  }

  static constexpr double kGamma1 = 1.3512071919596576340476878089715;   // 1 / (2 - 2^(1/3))
  static constexpr double kGamma2 = -1.7024143839193152680953756179429;  // -2^(1/3) / (2 - 2^(1/3))
  static constexpr double kGamma2Abs = 1.7024143839193152680953756179429;
  static constexpr long double kTwoPiL = 6.283185307179586476925286766559005768L;

 private:
  KMap(double c, Cutoff chi) : c_(c), chi_(chi), failures_(std::make_shared<std::atomic<std::size_t>>(0)) {}

  void set_steps(std::size_t m) {
    steps_ = m;
    const long double g1 = 1.0L / (2.0L - std::cbrt(2.0L)), g2 = 1.0L - 2.0L * g1;
    taus_.clear();
    times_.clear();
    long double t = 0.0L;
    times_.push_back(0.0L);
    for (std::size_t i = 0; i < m; ++i) {
      for (long double g : {g1, g2, g1}) {
        taus_.push_back(g / static_cast<long double>(m));
        t += taus_.back();
        times_.push_back(t);
      }
    }
    *failures_ = 0;
  }

  AnnulusPoint apply_dir(const AnnulusPoint& p, int dir) const {
    const double u0 = p.x.frac.to_double();
    auto [u1, y1] = flow(u0, p.y, dir);
    return {p.x.advanced(u1 - u0), y1};
  }

  // z1 = z0 + tau f((z0 + z1) / 2), Newton from an explicit midpoint guess.
  template <class T>
  void midpoint_step(T& u, T& y, T tau) const {
    constexpr T eps = std::numeric_limits<T>::epsilon();
    T fx, fy, jac[4];
    field<T>(u, y, fx, fy);
    T mx, my;
    field<T>(u + tau * fx / 2, y + tau * fy / 2, mx, my);
    T u1 = u + tau * mx, y1 = y + tau * my;
    bool converged = false;
    for (int it = 0, extra = 0; it < 40; ++it) {
      const T cu = (u + u1) / 2, cy = (y + y1) / 2;
      field<T>(cu, cy, fx, fy, jac);
      const T r0 = u1 - u - tau * fx, r1 = y1 - y - tau * fy;
      const T a = 1 - tau * jac[0] / 2, b = -tau * jac[1] / 2;
      const T cc = -tau * jac[2] / 2, dd = 1 - tau * jac[3] / 2;
      const T det = a * dd - b * cc;
      const T du = (dd * r0 - b * r1) / det, dy = (a * r1 - cc * r0) / det;
      u1 -= du;
      y1 -= dy;
      if (std::fabs(du) <= eps * (1 + std::fabs(u1)) && std::fabs(dy) <= eps * (1 + std::fabs(y1))) {
        if (++extra >= 2) {
          converged = true;
          break;
        }
      } else if (std::fabs(du) + std::fabs(dy) < 1000 * eps) {
        if (++extra >= 3) {
          converged = true;
          break;
        }
      }
    }
    if (!converged) ++*failures_;
    u = u1;
    y = y1;
  }

  void verify(const KMapOptions& opt);

  double c_ = 0.0;
  Cutoff chi_;
  std::size_t steps_ = 0;
  std::vector<long double> taus_, times_;
  std::shared_ptr<std::atomic<std::size_t>> failures_;  // shared by copies, bumped from const calls
  KMapDiagnostics diag_;
};

// Points for the build-time and test-time Jacobian checks: half spread over [0,1) x [-1,1],
// half concentrated where the flow leaves the vertical regime.
inline std::vector<std::pair<double, double>> kmap_check_points(const KMap& k, std::size_t n) {
  std::vector<std::pair<double, double>> pts;
  const double g1 = 0.7548776662466927, g2 = 0.5698402909980532;  // plastic-number sequence
  const double lo = std::max(0.0, k.cutoff().d() - k.c()), hi = k.cutoff().outer() + 0.01;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::fmod(0.5 + g1 * static_cast<double>(i + 1), 1.0);
    const double t = std::fmod(0.5 + g2 * static_cast<double>(i + 1), 1.0);
    const double u = 0.01 + 0.98 * s;
    double y;
    if (i % 2 == 0) {
      y = -1.0 + 2.0 * t;
    } else {
      const double r = 2.0 * t - 1.0;
      y = (r < 0 ? -1.0 : 1.0) * (lo + (hi - lo) * std::fabs(r));
    }
    pts.emplace_back(u, y);
  }
  return pts;
}

// max |det J - 1| with a fourth-order central difference Jacobian.
template <class T = double, class F>
double jacobian_residual(const F& map, const std::vector<std::pair<double, double>>& pts, T h) {
  double worst = 0.0;
  for (auto [ud, yd] : pts) {
    const T u = ud, y = yd;
    auto diff = [&](T du, T dy) {
      auto p2 = map(u + 2 * du, y + 2 * dy), p1 = map(u + du, y + dy);
      auto m1 = map(u - du, y - dy), m2 = map(u - 2 * du, y - 2 * dy);
      return std::pair<T, T>{(-p2.first + 8 * p1.first - 8 * m1.first + m2.first) / (12 * h),
                             (-p2.second + 8 * p1.second - 8 * m1.second + m2.second) / (12 * h)};
    };
    auto cu = diff(h, T(0)), cy = diff(T(0), h);
    const T det = cu.first * cy.second - cy.first * cu.second;
    worst = std::max(worst, static_cast<double>(std::fabs(det - 1)));
  }
  return worst;
}

// The transition zone shears hard (local stretch near 10^2 at stage 1), so a double-precision
// difference quotient cannot resolve det J to 1e-8. The check differentiates the same scheme
// run in long double, and precision_gap bounds how far the double map is from it.
inline void KMap::verify(const KMapOptions& opt) {
  const auto pts = kmap_check_points(*this, opt.check_points);
  auto fwd = [this](long double u, long double y) { return flow<long double>(u, y, +1); };
  diag_.jacobian_residual = jacobian_residual<long double>(fwd, pts, static_cast<long double>(opt.fd_step));
  for (auto [u, y] : pts) {
    auto a = forward(u, y);
    auto b = fwd(u, y);
    diag_.precision_gap = std::max({diag_.precision_gap, static_cast<double>(std::fabs(a.first - b.first)),
                                    static_cast<double>(std::fabs(a.second - b.second))});
  }
  for (int i = 0; i < 256; ++i) {
    const double u = (i + 0.5) / 256.0;
    auto [u1, y1] = forward(u, 0.0);
    diag_.graph_residual = std::max({diag_.graph_residual, std::fabs(u1 - u), std::fabs(y1 - c_ * std::sin(kTwoPi * u))});
    const double yo = chi_.outer() + (1.0 - chi_.outer()) * (i / 255.0);
    for (double ys : {yo, -yo}) {
      auto [uo, yo1] = forward(u, ys);
      diag_.identity_residual = std::max({diag_.identity_residual, std::fabs(uo - u), std::fabs(yo1 - ys)});
    }
    const double yl = -1.0 + 2.0 * (i / 255.0);
    auto [ul, yl1] = forward(0.0, yl);
    diag_.fixed_line_residual = std::max({diag_.fixed_line_residual, std::fabs(ul), std::fabs(yl1 - yl)});
  }
  diag_.newton_failures = failures();
}

}  // namespace nicis
