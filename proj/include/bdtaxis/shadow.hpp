// Boundary-layer analysis of the large-advection limit. For fixed ratio
// r = chi / D1 and D1 -> infinity the first species collapses onto the
// algebraic manifold u = lambda exp(-r v) with an unknown constant lambda, and
// the second species solves a scalar singularly perturbed problem on (0, L)
// with eps = sqrt(D2):
//
//   eps^2 v'' + (-1 + 1 / (a2 + b2 lambda e^{-r v} + c2 v)) v = 0,
//   v'(0) = v'(L) = 0,
//
// closed by the integral constraint that the first species' net growth
// vanishes.  In the layer variable w = vstar - s1 - v (vstar = (1 - a2) / c2,
// s1 the small root of the reduced kinetics) the equation becomes
// eps^2 w'' + f(w) = 0 with a bistable-type nonlinearity f, whose whole-line
// ground state W0 decays exponentially and seeds a Newton solve for the
// boundary-spike profile.  This header computes the root structure of the
// reduced kinetics, the ground state, the Neumann profile, the constrained
// constant lambda_eps, and the reconstructed two-species approximation.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bdtaxis/grid.hpp"
#include "bdtaxis/linalg.hpp"
#include "bdtaxis/params.hpp"

namespace bdtaxis {

/// Parameters of the reduced (shadow) problem.
struct ShadowParams {
  double r = 1.0;     ///< advection/diffusion ratio chi / D1
  double eps = 0.1;   ///< layer width sqrt(D2)
  double L = 1.0;     ///< domain length
  double a1 = 0.0, b1 = 1.0, c1 = 0.0;
  double a2 = 0.0, b2 = 1.0, c2 = 1.0;

  double vstar() const { return (1.0 - a2) / c2; }

  /// Reduce a full parameter set: r = chi / D1, eps = sqrt(D2).
  static ShadowParams from_scaled(const ScaledParams& p) {
    ShadowParams sp;
    sp.r = p.chi / p.D1;
    sp.eps = std::sqrt(p.D2);
    sp.L = p.L;
    sp.a1 = p.a1; sp.b1 = p.b1; sp.c1 = p.c1;
    sp.a2 = p.a2; sp.b2 = p.b2; sp.c2 = p.c2;
    return sp;
  }
};

/// Roots of the reduced kinetics g(s) = b2 lambda e^{-r (vstar - s)} - c2 s.
/// g is convex with minimum at sstar; for admissible lambda it has two roots
/// s1 < s2 and 1 + g has two roots s3 < s4, interleaved s1 < s3 < s4 < s2.
struct GRootStructure {
  double s1 = 0.0, s2 = 0.0;  ///< roots of g
  double s3 = 0.0, s4 = 0.0;  ///< roots of 1 + g
  double sstar = 0.0;         ///< argmin of g
  double lambda_max = 0.0;    ///< upper bound of the admissible lambda range
};

namespace detail {

inline void validate_shadow(const ShadowParams& sp) {
  if (!(sp.r > 0.0)) throw ConfigError("shadow ratio r must be positive");
  if (!(sp.eps > 0.0)) throw ConfigError("layer width eps must be positive");
  if (!(sp.L > 0.0)) throw ConfigError("domain length must be positive");
  if (!(sp.a2 > 0.0) || !(sp.a2 < 1.0))
    throw ConfigError("shadow problem needs a2 in (0, 1)");
  if (!(sp.a1 > 0.0) || !(sp.b1 > 0.0) || !(sp.c1 > 0.0) ||
      !(sp.b2 > 0.0) || !(sp.c2 > 0.0))
    throw ConfigError("interaction coefficients must be positive");
}

inline double g_of(const ShadowParams& sp, double lambda, double s) {
  return sp.b2 * lambda * std::exp(-sp.r * (sp.vstar() - s)) - sp.c2 * s;
}

inline double gp_of(const ShadowParams& sp, double lambda, double s) {
  return sp.b2 * lambda * sp.r * std::exp(-sp.r * (sp.vstar() - s)) - sp.c2;
}

/// Largest lambda for which the reduced kinetics keeps its four-root
/// structure: below this both min g < -1 and b2 lambda < c2 vstar hold.
inline double lambda_bound(const ShadowParams& sp) {
  const double from_depth = sp.c2 / (sp.b2 * sp.r) *
      std::exp(sp.r * sp.vstar() - sp.r / sp.c2 - 1.0);
  const double from_sign = (1.0 - sp.a2) / sp.b2;
  return std::min(from_depth, from_sign);
}

/// Polish a bracketed root of h to machine accuracy (bisection + Newton).
template <typename F, typename DF>
double refine_root(F h, DF dh, double lo, double hi) {
  double flo = h(lo);
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double fm = h(mid);
    if ((flo <= 0.0) == (fm <= 0.0)) { lo = mid; flo = fm; } else hi = mid;
    if (hi - lo <= 1e-6 * std::max(1.0, std::abs(mid))) break;
  }
  double s = 0.5 * (lo + hi);
  for (int k = 0; k < 60; ++k) {
    const double fs = h(s);
    const double d = dh(s);
    if (d == 0.0) break;
    const double step = fs / d;
    const double snew = std::clamp(s - step, lo, hi);
    if (std::abs(snew - s) <= 1e-15 * std::max(1.0, std::abs(s))) { s = snew; break; }
    s = snew;
  }
  return s;
}

}  // namespace detail

/// Admissible upper bound for the shadow constant lambda.
inline double shadow_lambda_max(const ShadowParams& sp) {
  detail::validate_shadow(sp);
  return detail::lambda_bound(sp);
}

/// Locate the four roots of the reduced kinetics for an admissible lambda.
inline GRootStructure g_roots(const ShadowParams& sp, double lambda) {
  detail::validate_shadow(sp);
  GRootStructure rs;
  rs.lambda_max = detail::lambda_bound(sp);
  if (!(lambda > 0.0) || !(lambda < rs.lambda_max))
    throw ConfigError("lambda must lie in (0, lambda_max)");
  const double vstar = sp.vstar();
  rs.sstar = std::log(sp.c2 * std::exp(sp.r * vstar) / (sp.b2 * lambda * sp.r)) / sp.r;

  auto g = [&](double s) { return detail::g_of(sp, lambda, s); };
  auto gp = [&](double s) { return detail::gp_of(sp, lambda, s); };
  auto gshift = [&](double s) { return 1.0 + g(s); };

  // Left pair in (0, sstar): g(0) > 0 and 1 + g(0) > 0, both negative at sstar.
  rs.s1 = detail::refine_root(g, gp, 0.0, rs.sstar);
  rs.s3 = detail::refine_root(gshift, gp, 0.0, rs.sstar);
  // Right pair in (sstar, inf): expand until the exponential wins again.
  double hi = rs.sstar + 1.0;
  while (gshift(hi) < 0.0) {
    hi += std::max(1.0, 0.5 * (hi - rs.sstar));
    if (hi > rs.sstar + 2000.0 / sp.r)
      throw SolveError("failed to bracket the outer kinetic roots");
  }
  rs.s4 = detail::refine_root(gshift, gp, rs.sstar, hi);
  while (g(hi) < 0.0) {
    hi += std::max(1.0, 0.5 * (hi - rs.sstar));
    if (hi > rs.sstar + 4000.0 / sp.r)
      throw SolveError("failed to bracket the outer kinetic roots");
  }
  rs.s2 = detail::refine_root(g, gp, rs.s4, hi);
  return rs;
}

namespace detail {

/// Layer nonlinearity in the shifted variable w = vstar - s1 - v, together
/// with its potential F(w) = int_0^w f.  The potential is evaluated by scaled
/// composite Gauss-Legendre quadrature so that its relative accuracy is
/// uniform down to w -> 0, where F ~ -eta^2 w^2 / 2.
class LayerProblem {
 public:
  LayerProblem(const ShadowParams& sp, double lambda, const GRootStructure& rs)
      : sp_(sp), lambda_(lambda), s1_(rs.s1), pole_(rs.s3 - rs.s1),
        gap_(sp.vstar() - rs.s1) {}

  double s1() const { return s1_; }
  double pole() const { return pole_; }
  double gap() const { return gap_; }

  double f(double w) const {
    const double g = g_of(sp_, lambda_, s1_ + w);
    return g * (gap_ - w) / (1.0 + g);
  }

  double fw(double w) const {
    const double g = g_of(sp_, lambda_, s1_ + w);
    const double gp = gp_of(sp_, lambda_, s1_ + w);
    const double q = 1.0 + g;
    return (gp * (gap_ - w) - g * q) / (q * q);
  }

  /// Tail decay rate of the ground state: f'(0) = g'(s1) (vstar - s1) < 0.
  double eta() const { return std::sqrt(-fw(0.0)); }

  /// Potential F(w) = w * int_0^1 f(w t) dt, refined until two successive
  /// panel counts agree to near machine precision relative to w^2.
  double potential(double w) const {
    if (w == 0.0) return 0.0;
    double prev = gauss_panels(w, 1);
    for (int m = 2; m <= 256; m *= 2) {
      const double next = gauss_panels(w, m);
      if (std::abs(next - prev) <= 1e-14 * std::max(w * w, std::abs(next)))
        return next;
      prev = next;
    }
    return prev;
  }

  /// First positive zero of the potential: the ground-state peak height.
  double energy_zero() const {
    auto F = [&](double s) { return potential(s); };
    auto dF = [&](double s) { return f(s); };
    double lo = gap_;
    double hi = gap_;
    const double span = pole_ - gap_;
    for (int k = 1; k <= 64; ++k) {
      hi = gap_ + span * static_cast<double>(k) / 65.0;
      if (F(hi) > 0.0) break;
      lo = hi;
    }
    if (!(F(hi) > 0.0))
      throw SolveError("failed to bracket the layer energy zero");
    return refine_root(F, dF, lo, hi);
  }

 private:
  double gauss_panels(double w, int m) const {
    // 16-point Gauss-Legendre nodes on (0, 1): 1/2 +- x_k/2.
    static constexpr double node[8] = {
        0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
        0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
        0.9445750230732326, 0.9894009349916499};
    static constexpr double weight[8] = {
        0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
        0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
        0.0622535239386479, 0.0271524594117541};
    double acc = 0.0;
    const double dm = 1.0 / m;
    for (int p = 0; p < m; ++p) {
      const double mid = (p + 0.5) * dm;
      double panel = 0.0;
      for (int k = 0; k < 8; ++k) {
        const double dt = 0.5 * dm * node[k];
        panel += weight[k] * (f(w * (mid + dt)) + f(w * (mid - dt)));
      }
      acc += 0.5 * dm * panel;
    }
    return w * acc;
  }

  ShadowParams sp_;
  double lambda_;
  double s1_;
  double pole_;
  double gap_;
};

}  // namespace detail

/// Whole-line ground state W0 of eps^2-free layer equation W'' + f(W) = 0,
/// W'(0) = 0, W(+-inf) = 0, sampled on a symmetric grid.
struct GroundState {
  std::vector<double> z;   ///< symmetric grid, z[0] = -z_max .. z.back() = z_max
  std::vector<double> w;   ///< W0 samples (even)
  std::vector<double> wp;  ///< W0' samples (odd)
  double peak = 0.0;       ///< W0(0): first positive zero of the potential
  double half_gap = 0.0;   ///< (vstar - s1) / 2, the midpoint convention, for reference
  double eta = 0.0;        ///< analytic tail rate sqrt(-f'(0))
  double tail_slope = 0.0; ///< measured log-slope of W0 on the outer half
  double s1 = 0.0;         ///< kinetic offset used in the change of variables
};

/// Integrate the ground state.  Near the peak the second-order equation is
/// integrated directly (the energy form is not Lipschitz at the turning
/// point); once W drops below 0.9 peak the integration switches to the
/// tail-stable first integral W' = -sqrt(-2 F(W)).  z_max <= 0 and n <= 0
/// select defaults (30 / eta and 9601 symmetric samples).
inline GroundState ground_state(const ShadowParams& sp, double lambda,
                                double z_max = 0.0, int n = 0) {
  const GRootStructure rs = g_roots(sp, lambda);
  const detail::LayerProblem lp(sp, lambda, rs);
  GroundState gs;
  gs.eta = lp.eta();
  gs.peak = lp.energy_zero();
  gs.half_gap = 0.5 * lp.gap();
  gs.s1 = rs.s1;

  if (z_max <= 0.0) z_max = 30.0 / gs.eta;
  if (n <= 0) n = 9601;
  if (n % 2 == 0 || n < 5)
    throw ConfigError("ground-state grid needs an odd point count >= 5");
  const int half = (n + 1) / 2;           // nodes on [0, z_max]
  const double h = z_max / (half - 1);

  std::vector<double> w(half), wp(half);
  w[0] = gs.peak;
  wp[0] = 0.0;
  const double swap_below = 0.9 * gs.peak;
  bool energy_form = false;
  auto slope = [&](double s) {
    return -std::sqrt(std::max(-2.0 * lp.potential(s), 0.0));
  };
  for (int i = 1; i < half; ++i) {
    if (!energy_form && w[i - 1] < swap_below) energy_form = true;
    if (!energy_form) {
      // Classical RK4 on (W, W') with W'' = -f(W).
      double a = w[i - 1], b = wp[i - 1];
      const double k1a = b,                 k1b = -lp.f(a);
      const double k2a = b + 0.5 * h * k1b, k2b = -lp.f(a + 0.5 * h * k1a);
      const double k3a = b + 0.5 * h * k2b, k3b = -lp.f(a + 0.5 * h * k2a);
      const double k4a = b + h * k3b,       k4b = -lp.f(a + h * k3a);
      w[i] = a + h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
      wp[i] = b + h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
    } else {
      // RK4 on the first integral; contracts onto the decaying branch.
      const double a = w[i - 1];
      const double k1 = slope(a);
      const double k2 = slope(std::max(a + 0.5 * h * k1, 0.0));
      const double k3 = slope(std::max(a + 0.5 * h * k2, 0.0));
      const double k4 = slope(std::max(a + h * k3, 0.0));
      w[i] = std::max(a + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), 0.0);
      wp[i] = slope(w[i]);
    }
  }

  // Measured tail rate: least-squares slope of log W0 on [z_max/2, z_max].
  {
    double sz = 0.0, sy = 0.0, szz = 0.0, szy = 0.0;
    int cnt = 0;
    for (int i = (half - 1) / 2; i < half; ++i) {
      if (w[i] <= 1e-300) break;
      const double zi = i * h, yi = std::log(w[i]);
      sz += zi; sy += yi; szz += zi * zi; szy += zi * yi;
      ++cnt;
    }
    if (cnt >= 2)
      gs.tail_slope = (cnt * szy - sz * sy) / (cnt * szz - sz * sz);
  }

  // Mirror onto the symmetric grid.
  gs.z.resize(static_cast<std::size_t>(n));
  gs.w.resize(static_cast<std::size_t>(n));
  gs.wp.resize(static_cast<std::size_t>(n));
  const int c = half - 1;  // index of z = 0
  for (int i = 0; i < half; ++i) {
    gs.z[static_cast<std::size_t>(c + i)] = i * h;
    gs.w[static_cast<std::size_t>(c + i)] = w[i];
    gs.wp[static_cast<std::size_t>(c + i)] = wp[i];
    gs.z[static_cast<std::size_t>(c - i)] = -i * h;
    gs.w[static_cast<std::size_t>(c - i)] = w[i];
    gs.wp[static_cast<std::size_t>(c - i)] = -wp[i];
  }
  return gs;
}

/// Newton-corrected boundary-layer profile on the vertex grid of [0, L].
struct ShadowProfile {
  std::vector<double> x;       ///< n + 1 vertices, x[0] = 0, x[n] = L
  std::vector<double> w;       ///< solution of eps^2 w'' + f(w) = 0, Neumann
  std::vector<double> ansatz;  ///< cutoff ground-state seed rho(x) W0(x/eps)
  double residual = 0.0;       ///< sup-norm of the discrete equation residual
  double s1 = 0.0;             ///< kinetic offset; v = vstar - s1 - w
};

/// Solve the layer equation on [0, L] with homogeneous Neumann conditions by
/// damped Newton from the cutoff ground-state ansatz.  The grid carries at
/// least max(512, 40 L / eps) intervals (n_min can force more); Neumann
/// conditions enter through ghost symmetry, so the boundary rows are
/// second-order accurate.
inline ShadowProfile solve_shadow_profile(const ShadowParams& sp, double lambda,
                                          int n_min = 0) {
  const GRootStructure rs = g_roots(sp, lambda);
  const detail::LayerProblem lp(sp, lambda, rs);
  const GroundState gs = ground_state(sp, lambda);

  int n = std::max({512, static_cast<int>(std::ceil(40.0 * sp.L / sp.eps)), n_min});
  if (n % 2 != 0) ++n;  // even interval count for Simpson quadrature later
  const double h = sp.L / n;
  const int m = n + 1;

  ShadowProfile pr;
  pr.s1 = rs.s1;
  pr.x.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) pr.x[static_cast<std::size_t>(i)] = i * h;

  // Quintic-smoothstep cutoff: 1 on [0, L/3], 0 on [2L/3, L].
  auto rho = [&](double x) {
    const double t = (x - sp.L / 3.0) / (sp.L / 3.0);
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  };
  // Cubic Hermite interpolation of the ground state on its right half-grid;
  // the stored derivative samples keep the seed error far below the Newton
  // correction the test for the ansatz gap is meant to see.
  const int gc = (static_cast<int>(gs.z.size()) - 1) / 2;
  const double hz = gs.z[static_cast<std::size_t>(gc + 1)];
  const double zmax = gs.z.back();
  auto w0 = [&](double zq) {
    if (zq >= zmax) return 0.0;
    const int j = static_cast<int>(zq / hz);
    const double t = zq / hz - j;
    const double wl = gs.w[static_cast<std::size_t>(gc + j)];
    const double wr = gs.w[static_cast<std::size_t>(gc + j + 1)];
    const double dl = gs.wp[static_cast<std::size_t>(gc + j)];
    const double dr = gs.wp[static_cast<std::size_t>(gc + j + 1)];
    const double t2 = t * t, t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * wl + (t3 - 2.0 * t2 + t) * hz * dl +
           (-2.0 * t3 + 3.0 * t2) * wr + (t3 - t2) * hz * dr;
  };
  pr.ansatz.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    pr.ansatz[static_cast<std::size_t>(i)] =
        rho(pr.x[static_cast<std::size_t>(i)]) *
        w0(pr.x[static_cast<std::size_t>(i)] / sp.eps);

  const double e2h2 = sp.eps * sp.eps / (h * h);
  auto residual_of = [&](const std::vector<double>& w, std::vector<double>& r) {
    r[0] = 2.0 * e2h2 * (w[1] - w[0]) + lp.f(w[0]);
    for (int i = 1; i < m - 1; ++i)
      r[static_cast<std::size_t>(i)] =
          e2h2 * (w[static_cast<std::size_t>(i - 1)] -
                  2.0 * w[static_cast<std::size_t>(i)] +
                  w[static_cast<std::size_t>(i + 1)]) +
          lp.f(w[static_cast<std::size_t>(i)]);
    r[static_cast<std::size_t>(m - 1)] =
        2.0 * e2h2 * (w[static_cast<std::size_t>(m - 2)] -
                      w[static_cast<std::size_t>(m - 1)]) +
        lp.f(w[static_cast<std::size_t>(m - 1)]);
  };
  auto sup = [](const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s = std::max(s, std::abs(v));
    return s;
  };
  auto admissible = [&](const std::vector<double>& w) {
    for (double wi : w)
      if (!(wi > -0.25 * gs.peak) || !(wi < 0.999 * lp.pole())) return false;
    return true;
  };

  std::vector<double> w = pr.ansatz, r(static_cast<std::size_t>(m)),
      step(static_cast<std::size_t>(m)), trial(static_cast<std::size_t>(m)),
      rt(static_cast<std::size_t>(m));
  residual_of(w, r);
  double norm = sup(r);
  const double tol = 1e-10;
  bool done = norm <= tol;
  for (int it = 0; it < 60 && !done; ++it) {
    BandedLU J(m, 1, 1);
    J.at(0, 0) = -2.0 * e2h2 + lp.fw(w[0]);
    J.at(0, 1) = 2.0 * e2h2;
    for (int i = 1; i < m - 1; ++i) {
      J.at(i, i - 1) = e2h2;
      J.at(i, i) = -2.0 * e2h2 + lp.fw(w[static_cast<std::size_t>(i)]);
      J.at(i, i + 1) = e2h2;
    }
    J.at(m - 1, m - 2) = 2.0 * e2h2;
    J.at(m - 1, m - 1) = -2.0 * e2h2 + lp.fw(w[static_cast<std::size_t>(m - 1)]);
    J.factor();
    step = r;
    J.solve(step);

    double scale = 1.0;
    bool accepted = false;
    for (int half_try = 0; half_try < 30; ++half_try) {
      for (int i = 0; i < m; ++i)
        trial[static_cast<std::size_t>(i)] =
            w[static_cast<std::size_t>(i)] - scale * step[static_cast<std::size_t>(i)];
      if (admissible(trial)) {
        residual_of(trial, rt);
        const double nt = sup(rt);
        if (nt < (1.0 - 1e-4 * scale) * norm || nt <= tol) {
          w.swap(trial);
          r.swap(rt);
          norm = nt;
          accepted = true;
          break;
        }
      }
      scale *= 0.5;
    }
    if (!accepted)
      throw SolveError("layer Newton stalled at residual " + std::to_string(norm));
    done = norm <= tol;
  }
  if (!done)
    throw SolveError("layer Newton did not reach tolerance; residual " +
                     std::to_string(norm));
  pr.w = std::move(w);
  pr.residual = norm;
  return pr;
}

/// Boundary-spike solution of the reduced problem.
struct SpikeSolution {
  double lambda_eps = 0.0;          ///< constrained constant
  std::vector<double> x;            ///< vertex grid of [0, L]
  std::vector<double> v_profile;    ///< v = vstar - s1 - w
  std::vector<double> u_profile;    ///< u = lambda_eps e^{-r v}
  double constraint_residual = 0.0; ///< |net growth integral| at lambda_eps
  double profile_residual = 0.0;    ///< sup residual of the layer equation
};

/// Net growth of the first species along a candidate profile: the constraint
/// whose root in lambda closes the reduced problem.  Composite Simpson on the
/// uniform vertex grid (even interval count).
inline double shadow_constraint(const ShadowParams& sp, double lambda,
                                const std::vector<double>& x,
                                const std::vector<double>& v) {
  if (x.size() != v.size() || x.size() < 3 || x.size() % 2 == 0)
    throw ConfigError("constraint quadrature needs an odd matching grid");
  const double h = x[1] - x[0];
  auto integrand = [&](std::size_t i) {
    const double u = lambda * std::exp(-sp.r * v[i]);
    return (-1.0 + 1.0 / (sp.a1 + sp.b1 * u + sp.c1 * v[i])) * u;
  };
  double acc = integrand(0) + integrand(x.size() - 1);
  for (std::size_t i = 1; i + 1 < x.size(); ++i)
    acc += (i % 2 == 1 ? 4.0 : 2.0) * integrand(i);
  return acc * h / 3.0;
}

namespace detail {

inline std::vector<double> v_from_profile(const ShadowParams& sp,
                                          const ShadowProfile& pr) {
  std::vector<double> v(pr.w.size());
  const double base = sp.vstar() - pr.s1;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = base - pr.w[i];
  return v;
}

}  // namespace detail

/// Solve the closed reduced problem: find lambda_eps in (0, lambda_max) at
/// which the net-growth constraint vanishes, solving the layer equation at
/// each candidate lambda.  Secant iteration from seeds {0.1, 0.5} lambda_max
/// with a bracket-scan bisection fallback.  Throws SolveError when the
/// constraint has no admissible root.
inline SpikeSolution solve_lambda(const ShadowParams& sp) {
  detail::validate_shadow(sp);
  const double vstar = sp.vstar();
  if (std::abs(vstar - (1.0 - sp.a1) / sp.c1) <=
      1e-12 * std::max(1.0, std::abs(vstar)))
    throw ConfigError("degenerate coupling: vstar equals (1 - a1) / c1");
  const double lmax = detail::lambda_bound(sp);

  struct Eval {
    double lambda = 0.0, G = 0.0;
    ShadowProfile profile;
  };
  auto evaluate = [&](double lambda) {
    Eval e;
    e.lambda = lambda;
    e.profile = solve_shadow_profile(sp, lambda);
    const std::vector<double> v = detail::v_from_profile(sp, e.profile);
    e.G = shadow_constraint(sp, lambda, e.profile.x, v);
    return e;
  };
  const double gtol = 1e-10;
  const double lo_clip = 1e-12 * lmax, hi_clip = (1.0 - 1e-9) * lmax;

  Eval a = evaluate(0.1 * lmax);
  Eval b = evaluate(0.5 * lmax);
  Eval best = std::abs(a.G) < std::abs(b.G) ? a : b;
  bool converged = false;
  for (int it = 0; it < 60; ++it) {
    if (b.G == a.G) break;
    double next = b.lambda - b.G * (b.lambda - a.lambda) / (b.G - a.G);
    if (!(next > lo_clip)) next = lo_clip;
    if (!(next < hi_clip)) next = hi_clip;
    if (next == b.lambda) break;
    a = b;
    b = evaluate(next);
    if (std::abs(b.G) < std::abs(best.G)) best = b;
    // A root must sit strictly inside the admissible range: the constraint
    // vanishes trivially as lambda -> 0+, so the clipped lower endpoint never
    // counts as converged.
    if (std::abs(b.G) <= gtol && b.lambda > 10.0 * lo_clip &&
        std::abs(b.lambda - a.lambda) <= 1e-6 * std::max(b.lambda, 1e-300)) {
      converged = true;
      best = b;
      break;
    }
  }

  if (!converged) {
    // Bracket scan: the constraint is smooth in lambda, so a sign change
    // between scan points pins a root; refine by bisection with secant bias.
    static constexpr double frac[] = {1e-8, 1e-4, 1e-3, 0.01, 0.05,
                                      0.1, 0.3, 0.5, 0.8};
    Eval lo_e, hi_e;
    bool have = false;
    Eval prev = evaluate(frac[0] * lmax);
    if (std::abs(prev.G) < std::abs(best.G)) best = prev;
    for (std::size_t k = 1; k < sizeof(frac) / sizeof(frac[0]) && !have; ++k) {
      Eval cur = evaluate(frac[k] * lmax);
      if (std::abs(cur.G) < std::abs(best.G)) best = cur;
      if ((prev.G <= 0.0) != (cur.G <= 0.0)) {
        lo_e = prev;
        hi_e = cur;
        have = true;
      }
      prev = cur;
    }
    if (!have)
      throw SolveError(
          "no admissible root of the shadow constraint in (0, lambda_max)");
    for (int it = 0; it < 80 && !converged; ++it) {
      double next = 0.5 * (lo_e.lambda + hi_e.lambda);
      if (hi_e.G != lo_e.G) {
        const double sec = hi_e.lambda -
            hi_e.G * (hi_e.lambda - lo_e.lambda) / (hi_e.G - lo_e.G);
        if (sec > lo_e.lambda && sec < hi_e.lambda) next = sec;
      }
      Eval cur = evaluate(next);
      if (std::abs(cur.G) < std::abs(best.G)) best = cur;
      if (std::abs(cur.G) <= gtol &&
          hi_e.lambda - lo_e.lambda <= 1e-6 * std::max(next, 1e-300)) {
        converged = true;
        best = cur;
        break;
      }
      if ((cur.G <= 0.0) == (lo_e.G <= 0.0)) lo_e = cur; else hi_e = cur;
    }
    if (!converged)
      throw SolveError("shadow constraint root refinement stalled");
  }

  SpikeSolution sol;
  sol.lambda_eps = best.lambda;
  sol.x = best.profile.x;
  sol.v_profile = detail::v_from_profile(sp, best.profile);
  sol.u_profile.resize(sol.v_profile.size());
  for (std::size_t i = 0; i < sol.u_profile.size(); ++i)
    sol.u_profile[i] = best.lambda * std::exp(-sp.r * sol.v_profile[i]);
  sol.constraint_residual = std::abs(best.G);
  sol.profile_residual = best.profile.residual;
  return sol;
}

/// Two-species field sampled on the spike solution's own vertex grid.
inline StateField reconstruct_full(const ShadowParams& sp, const SpikeSolution& sol) {
  (void)sp;
  StateField s;
  s.t = 0.0;
  s.u = sol.u_profile;
  s.v = sol.v_profile;
  return s;
}

/// Two-species field resampled onto a cell-centered grid, as a seed for the
/// full steady solver at large D1 with chi = r D1 and D2 = eps^2.
inline StateField reconstruct_full(const ShadowParams& sp,
                                   const SpikeSolution& sol, const Grid1D& g) {
  if (std::abs(g.L - sp.L) > 1e-12 * std::max(1.0, sp.L))
    throw ConfigError("reconstruction grid length differs from the shadow domain");
  StateField s;
  s.t = 0.0;
  s.u.resize(static_cast<std::size_t>(g.n));
  s.v.resize(static_cast<std::size_t>(g.n));
  const double h = sol.x[1] - sol.x[0];
  const std::size_t last = sol.x.size() - 1;
  for (int i = 0; i < g.n; ++i) {
    const double xq = g.x(i);
    std::size_t j = static_cast<std::size_t>(xq / h);
    if (j >= last) j = last - 1;
    const double t = xq / h - static_cast<double>(j);
    const double v = (1.0 - t) * sol.v_profile[j] + t * sol.v_profile[j + 1];
    s.v[static_cast<std::size_t>(i)] = v;
    s.u[static_cast<std::size_t>(i)] = sol.lambda_eps * std::exp(-sp.r * v);
  }
  return s;
}

}  // namespace bdtaxis
