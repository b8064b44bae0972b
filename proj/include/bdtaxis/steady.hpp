// Steady states of the discretized system and the branch of nonconstant
// states emanating from the first instability. The nonlinear residual is
// exactly the spatial operator of the time stepper (same fluxes, same upwind
// switches), so a converged root here is a fixed point of the evolution on
// the same grid. The branch is traced by amplitude continuation: the signed
// cosine coefficient of v at the critical wavenumber is pinned to the arc
// parameter s while chi joins the unknowns through a bordered Newton solve.
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bdtaxis/evolve.hpp"
#include "bdtaxis/grid.hpp"
#include "bdtaxis/kinetics.hpp"
#include "bdtaxis/linalg.hpp"
#include "bdtaxis/params.hpp"
#include "bdtaxis/spectral.hpp"

namespace bdtaxis {

struct NewtonOptions {
  int max_iter = 50;
  double tol = 1e-10;           // residual target, scaled by max(1, sup|U|)
  bool require_positive = true; // reject iterates with negative components
};

struct SteadyState {
  double chi = 0.0;
  StateField profile;
  double residual = 0.0;
  std::optional<bool> stable;             // not computed by the solvers here
  std::vector<double> residual_history;   // sup residual after each iterate
};

struct BranchPoint {
  double s = 0.0;          // pinned v-amplitude (arc parameter)
  double chi = 0.0;
  double amplitude = 0.0;  // signed cosine coefficient of u at k0
  double residual = 0.0;
};

struct ContinueOptions {
  double ds = 1e-3;      // amplitude step
  double ds_min = 1e-6;  // abort threshold after repeated halving
  int k0 = 0;            // 0: use the critical mode
  NewtonOptions newton{};
};

/// chi(s) ~ beta0 + beta1 s + beta2 s^2 fitted by least squares.
struct BranchFit {
  double beta0 = 0.0, beta1 = 0.0, beta2 = 0.0;
};

namespace detail {

inline void stack_rates(const Stepper& st, const StateField& s,
                        std::vector<double>& r) {
  std::vector<double> du, dv;
  st.rates(s.u, s.v, du, dv);
  const std::size_t n = s.u.size();
  r.resize(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    r[2 * i] = du[i];
    r[2 * i + 1] = dv[i];
  }
}

inline double sup_norm(const std::vector<double>& r) {
  double m = 0.0;
  for (double x : r) m = std::max(m, std::abs(x));
  return m;
}

inline double sup_state(const StateField& s) {
  double m = 0.0;
  for (double x : s.u) m = std::max(m, std::abs(x));
  for (double x : s.v) m = std::max(m, std::abs(x));
  return m;
}

inline bool admissible(const StateField& s) {
  double lo = 0.0;
  const double hi = sup_state(s);
  for (double x : s.u) lo = std::min(lo, x);
  for (double x : s.v) lo = std::min(lo, x);
  return lo >= -1e-12 * std::max(hi, 1e-30);
}

/// Jacobian of the stacked spatial rates in the interleaved ordering
/// [u0, v0, u1, v1, ...]; bandwidth 3 on each side.
inline void assemble_jacobian(const ScaledParams& p, const Grid1D& g,
                              const StateField& s, BandedLU& J) {
  const int n = g.n;
  const double dx = g.dx();
  const auto iu = [](int i) { return 2 * i; };
  const auto iv = [](int i) { return 2 * i + 1; };

  for (int i = 0; i < n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const KineticsDerivs d = kinetics_derivatives(p, s.u[k], s.v[k], 1);
    J.at(iu(i), iu(i)) += d.f_u;
    J.at(iu(i), iv(i)) += d.f_v;
    J.at(iv(i), iu(i)) += d.g_u;
    J.at(iv(i), iv(i)) += d.g_v;

    const double du_coef = p.D1 / (dx * dx), dv_coef = p.D2 / (dx * dx);
    if (i > 0) {
      J.at(iu(i), iu(i - 1)) += du_coef;
      J.at(iu(i), iu(i)) -= du_coef;
      J.at(iv(i), iv(i - 1)) += dv_coef;
      J.at(iv(i), iv(i)) -= dv_coef;
    }
    if (i + 1 < n) {
      J.at(iu(i), iu(i + 1)) += du_coef;
      J.at(iu(i), iu(i)) -= du_coef;
      J.at(iv(i), iv(i + 1)) += dv_coef;
      J.at(iv(i), iv(i)) -= dv_coef;
    }
  }

  // Advective flux through the face between cells f-1 and f:
  //   Jf = w * upwind(u),  w = -chi phi(vm) (v_f - v_{f-1}) / dx,
  // entering du_{f-1} with -1/dx and du_f with +1/dx.
  for (int f = 1; f < n; ++f) {
    const std::size_t l = static_cast<std::size_t>(f) - 1,
                      r = static_cast<std::size_t>(f);
    const double dv = s.v[r] - s.v[l];
    const double vm = 0.5 * (s.v[l] + s.v[r]);
    const double phi = p.phi(vm), dphi = p.phi.d1(vm);
    const double w = -p.chi * phi * dv / dx;
    const bool from_left = w > 0.0;
    const double uup = from_left ? s.u[l] : s.u[r];
    const double dw_dvl = -p.chi * (0.5 * dphi * dv - phi) / dx;
    const double dw_dvr = -p.chi * (0.5 * dphi * dv + phi) / dx;

    // dJf/d(u up), dJf/dv_l, dJf/dv_r
    const double dJ_du = w;
    const double dJ_dvl = dw_dvl * uup;
    const double dJ_dvr = dw_dvr * uup;
    const int ucol = from_left ? iu(f - 1) : iu(f);

    J.at(iu(f - 1), ucol) -= dJ_du / dx;
    J.at(iu(f - 1), iv(f - 1)) -= dJ_dvl / dx;
    J.at(iu(f - 1), iv(f)) -= dJ_dvr / dx;
    J.at(iu(f), ucol) += dJ_du / dx;
    J.at(iu(f), iv(f - 1)) += dJ_dvl / dx;
    J.at(iu(f), iv(f)) += dJ_dvr / dx;
  }
}

/// Derivative of the stacked rates with respect to chi: the advective
/// divergence at unit chi (the upwind switch is chi-invariant for chi > 0).
inline void rates_chi(const ScaledParams& p, const Grid1D& g,
                      const StateField& s, std::vector<double>& rc) {
  const int n = g.n;
  const double dx = g.dx();
  rc.assign(2 * static_cast<std::size_t>(n), 0.0);
  double j_prev = 0.0;
  for (int i = 0; i < n; ++i) {
    double j = 0.0;
    if (i + 1 < n) {
      const std::size_t k = static_cast<std::size_t>(i);
      const double vm = 0.5 * (s.v[k] + s.v[k + 1]);
      const double w1 = -p.phi(vm) * (s.v[k + 1] - s.v[k]) / dx;
      const double w = p.chi * w1;  // actual velocity fixes the upwind side
      j = (w > 0.0) ? w1 * s.u[k] : w1 * s.u[k + 1];
    }
    rc[2 * static_cast<std::size_t>(i)] = -(j - j_prev) / dx;
    j_prev = j;
  }
}

}  // namespace detail

/// Damped Newton iteration on the steady residual from the given guess.
inline SteadyState newton_solve(const ScaledParams& p, const Grid1D& g,
                                StateField guess,
                                const NewtonOptions& opts = {}) {
  if (guess.u.size() != static_cast<std::size_t>(g.n) ||
      guess.v.size() != static_cast<std::size_t>(g.n))
    throw ConfigError("newton_solve: guess does not match the grid");
  SimOptions so;
  const Stepper st(p, g, so);
  std::vector<double> r, d;
  detail::stack_rates(st, guess, r);
  double norm = detail::sup_norm(r);
  std::vector<double> history{norm};

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (norm <= opts.tol * std::max(1.0, detail::sup_state(guess)))
      return SteadyState{p.chi, guess, norm, std::nullopt, history};

    BandedLU J(2 * g.n, 3, 3);
    detail::assemble_jacobian(p, g, guess, J);
    J.factor();
    d = r;
    J.solve(d);

    double lambda = 1.0;
    bool accepted = false;
    for (int half = 0; half < 40; ++half) {
      StateField trial = guess;
      for (int i = 0; i < g.n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        trial.u[k] -= lambda * d[2 * k];
        trial.v[k] -= lambda * d[2 * k + 1];
      }
      if (!opts.require_positive || detail::admissible(trial)) {
        std::vector<double> rt;
        detail::stack_rates(st, trial, rt);
        const double nt = detail::sup_norm(rt);
        if (nt < (1.0 - 1e-4 * lambda) * norm) {
          guess = std::move(trial);
          r = std::move(rt);
          norm = nt;
          history.push_back(norm);
          accepted = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!accepted)
      throw SolveError("newton_solve: line search stalled at residual " +
                       std::to_string(norm));
  }
  if (norm <= opts.tol * std::max(1.0, detail::sup_state(guess)))
    return SteadyState{p.chi, guess, norm, std::nullopt, history};
  throw SolveError("newton_solve: no convergence in " +
                   std::to_string(opts.max_iter) + " iterations");
}

namespace detail {

/// Corrector for the bordered system: steady residual plus the pin
/// (v-amplitude at mode k0) = s, with chi free. Updates state and chi.
inline double bordered_newton(const ScaledParams& base, const Grid1D& g,
                              int k0, double s_pin, StateField& state,
                              double& chi, const NewtonOptions& opts) {
  ScaledParams p = base;
  std::vector<double> r, rc, y, z;
  // d(pin)/dU: sparse on v entries (mean-corrected cosine weights).
  const int n = g.n;
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  {
    double csum = 0.0;
    for (int i = 0; i < n; ++i) {
      e[static_cast<std::size_t>(i)] = std::cos(k0 * pi * g.x(i) / g.L);
      csum += e[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < n; ++i)
      e[static_cast<std::size_t>(i)] =
          (e[static_cast<std::size_t>(i)] - csum / n) * g.dx() * 2.0 / g.L;
  }
  auto pin_value = [&](const StateField& s) {
    return cosine_coefficient(g, s.v, k0) - s_pin;
  };
  auto merit = [&](const std::vector<double>& rr, double pv) {
    return std::max(sup_norm(rr), std::abs(pv));
  };

  p.chi = chi;
  SimOptions so;
  stack_rates(Stepper(p, g, so), state, r);
  double pv = pin_value(state);
  double m = merit(r, pv);

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (m <= opts.tol * std::max(1.0, sup_state(state))) {
      chi = p.chi;
      return sup_norm(r);
    }

    BandedLU J(2 * n, 3, 3);
    assemble_jacobian(p, g, state, J);
    J.factor();
    y = r;
    J.solve(y);
    rates_chi(p, g, state, rc);
    z = rc;
    J.solve(z);

    double ey = 0.0, ez = 0.0;
    for (int i = 0; i < n; ++i) {
      ey += e[static_cast<std::size_t>(i)] * y[2 * static_cast<std::size_t>(i) + 1];
      ez += e[static_cast<std::size_t>(i)] * z[2 * static_cast<std::size_t>(i) + 1];
    }
    if (std::abs(ez) < 1e-300)
      throw SolveError("bordered solve is singular (no chi sensitivity)");
    const double dchi = (pv - ey) / ez;

    double lambda = 1.0;
    bool accepted = false;
    for (int half = 0; half < 40; ++half) {
      StateField trial = state;
      for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        trial.u[k] -= lambda * (y[2 * k] + dchi * z[2 * k]);
        trial.v[k] -= lambda * (y[2 * k + 1] + dchi * z[2 * k + 1]);
      }
      ScaledParams pt = p;
      pt.chi = p.chi + lambda * dchi;
      if (!opts.require_positive || admissible(trial)) {
        std::vector<double> rt;
        stack_rates(Stepper(pt, g, so), trial, rt);
        const double pvt = pin_value(trial);
        const double mt = merit(rt, pvt);
        if (mt < (1.0 - 1e-4 * lambda) * m) {
          state = std::move(trial);
          p.chi = pt.chi;
          r = std::move(rt);
          pv = pvt;
          m = mt;
          accepted = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!accepted)
      throw SolveError("bordered corrector stalled at merit " +
                       std::to_string(m));
  }
  if (m <= opts.tol * std::max(1.0, sup_state(state))) {
    chi = p.chi;
    return sup_norm(r);
  }
  throw SolveError("bordered corrector: no convergence");
}

}  // namespace detail

/// Trace the bifurcating branch from the constant state to v-amplitude
/// s_target (its sign selects the direction). Points are returned from the
/// smallest |s| outward; the step halves on corrector failure and the trace
/// aborts below ds_min.
inline std::vector<BranchPoint> continue_branch(const ScaledParams& base,
                                                const Grid1D& g,
                                                double s_target,
                                                const ContinueOptions& co = {}) {
  if (s_target == 0.0) throw ConfigError("continuation needs a nonzero target");
  const auto eq = coexistence_equilibrium(base);
  if (!eq) throw SolveError("continuation requires a coexistence state");
  const int k0 = co.k0 > 0 ? co.k0 : find_critical_mode(base).k0;
  const double chi0 = chi_threshold(base, k0);
  ScaledParams p = base;
  p.chi = chi0;
  const double Q = analyze_mode(p, k0).Q;

  std::vector<BranchPoint> points;
  const double dir = s_target > 0.0 ? 1.0 : -1.0;
  double ds = std::min(co.ds, std::abs(s_target));
  double s_done = 0.0, chi = chi0;
  StateField state = constant_state(g, eq->u, eq->v);
  // (s, chi, state) history for the secant predictor.
  StateField prev_state = state;
  double prev_s = 0.0, prev_chi = chi0;
  bool have_prev = false;

  while (std::abs(s_done) < std::abs(s_target) * (1.0 - 1e-12)) {
    double s_next = s_done + dir * ds;
    if (std::abs(s_next) > std::abs(s_target)) s_next = s_target;

    StateField trial;
    double chi_trial;
    if (have_prev && s_done != prev_s) {
      const double w = (s_next - s_done) / (s_done - prev_s);
      trial = state;
      for (int i = 0; i < g.n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        trial.u[k] += w * (state.u[k] - prev_state.u[k]);
        trial.v[k] += w * (state.v[k] - prev_state.v[k]);
      }
      chi_trial = chi + w * (chi - prev_chi);
    } else {
      trial = constant_state(g, eq->u, eq->v);
      add_cosine(trial, g, k0, Q * s_next, s_next);
      chi_trial = chi;
    }

    try {
      const double res =
          detail::bordered_newton(base, g, k0, s_next, trial, chi_trial,
                                  co.newton);
      prev_state = std::move(state);
      prev_s = s_done;
      prev_chi = chi;
      have_prev = true;
      state = std::move(trial);
      s_done = s_next;
      chi = chi_trial;
      points.push_back(BranchPoint{
          s_done, chi, cosine_coefficient(g, state.u, k0), res});
      ds = std::min(2.0 * ds, co.ds);
    } catch (const SolveError&) {
      ds *= 0.5;
      if (ds < co.ds_min)
        throw SolveError("continuation stalled near s = " +
                         std::to_string(s_done));
    }
  }
  return points;
}

/// Least-squares quadratic fit of chi against s over a traced branch.
inline BranchFit fit_branch(const std::vector<BranchPoint>& pts) {
  if (pts.size() < 5)
    throw ConfigError("branch fit needs at least five points");
  double m0 = 0, m1 = 0, m2 = 0, m3 = 0, m4 = 0, b0 = 0, b1 = 0, b2 = 0;
  for (const BranchPoint& q : pts) {
    const double s = q.s, s2 = s * s;
    m0 += 1.0; m1 += s; m2 += s2; m3 += s * s2; m4 += s2 * s2;
    b0 += q.chi; b1 += q.chi * s; b2 += q.chi * s2;
  }
  // Solve the 3x3 normal equations by Cramer's rule.
  const double det = m0 * (m2 * m4 - m3 * m3) - m1 * (m1 * m4 - m3 * m2) +
                     m2 * (m1 * m3 - m2 * m2);
  if (std::abs(det) < 1e-300) throw SolveError("degenerate branch fit");
  const double d0 = b0 * (m2 * m4 - m3 * m3) - m1 * (b1 * m4 - m3 * b2) +
                    m2 * (b1 * m3 - m2 * b2);
  const double d1 = m0 * (b1 * m4 - b2 * m3) - b0 * (m1 * m4 - m3 * m2) +
                    m2 * (m1 * b2 - m2 * b1);
  const double d2 = m0 * (m2 * b2 - m3 * b1) - m1 * (m1 * b2 - m3 * b0) +
                    m2 * (m1 * b1 - m2 * b0);
  return BranchFit{d0 / det, d1 / det, d2 / det};
}

}  // namespace bdtaxis
