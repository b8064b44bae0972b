// Linear stability of the coexistence state under no-flux cosine modes and
// the cubic normal form of the first advection-driven branch.
//
// A perturbation proportional to exp(lambda t) cos(k pi x / L) of the
// coexistence state evolves by the 2x2 growth matrix
//
//   M_k(chi) = [ -(D1 mu + b1 u*)   -(chi u* phi(v*) mu + c1 u*) ]
//              [ -(b2 v*)           -(D2 mu + c2 v*)             ]
//
// with mu = (k pi / L)^2. Its determinant is linear and decreasing in chi,
// so each mode k >= 1 destabilizes exactly at the threshold chi_k computed
// here; the smallest threshold selects the critical mode k0. At chi_k0 the
// branch of nonconstant steady states bifurcating in the direction
// (Q cos, cos) has chi(s) = chi_k0 + K2 s^2 + O(s^4) with the cubic
// coefficient K2 assembled from the quadratic/cubic reaction derivatives;
// K2 > 0 means the bifurcation is supercritical (branch exists above
// threshold and is stable near onset).
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "bdtaxis/kinetics.hpp"
#include "bdtaxis/params.hpp"

namespace bdtaxis {

/// Linearization data of one cosine mode at the parameters' chi.
struct ModeAnalysis {
  int k = 0;
  double mu = 0.0;     // (k pi / L)^2
  double T = 0.0;      // -trace M_k  (both eigenvalues negative iff T, D > 0)
  double D = 0.0;      // det M_k at the given chi
  double chi_k = 0.0;  // instability threshold of this mode
  double Q = 0.0;      // null-vector ratio: kernel of M_k(chi_k) is (Q, 1)
  std::complex<double> lambda_plus, lambda_minus;  // growth eigenvalues
};

/// Critical-mode selection over k = 1..k_max.
struct ModeSelection {
  int k0 = 0;
  double chi_k0 = 0.0;
  bool simple = true;   // false when another mode shares the minimal threshold
  int tie_partner = 0;  // the other mode of a non-simple threshold
  int k_max = 0;        // range actually searched
};

/// Cubic normal form of the branch at mode k0 plus the intermediate
/// quantities of its assembly (exposed for reporting and cross-checks).
struct BifurcationReport {
  int k0 = 0;
  double mu = 0.0, chi_k0 = 0.0, Q = 0.0;
  double P1 = 0, P2 = 0, P3 = 0, P4 = 0, P5 = 0, P6 = 0, P7 = 0, P8 = 0;
  double I_psi1 = 0, I_phi1 = 0;  // mean parts of the second-order response
  double J_psi1 = 0, J_phi1 = 0;  // double-frequency parts
  double detA = 0, detA1 = 0, detA2 = 0;  // the 2k-mode 2x2 solve
  double S_psi2 = 0, S_phi2 = 0;  // third-order projections on the k-mode
  double K1 = 0, K2 = 0;          // chi(s) = chi_k0 + K1 s + K2 s^2 + ...
  bool branch_stable = false;     // K2 > 0
  double mu_dot = 0.0;            // crossing-eigenvalue slope in chi
};

namespace detail {

inline Equilibrium require_coexistence(const ScaledParams& p) {
  const auto co = coexistence_equilibrium(p);
  if (!co)
    throw SolveError("no positive coexistence state; mode analysis undefined");
  return *co;
}

}  // namespace detail

/// Instability threshold of mode k (independent of the parameters' chi).
inline double chi_threshold(const ScaledParams& p, int k) {
  if (k < 1) throw ConfigError("mode index must be >= 1");
  const Equilibrium co = detail::require_coexistence(p);
  const double mu = (k * pi / p.L) * (k * pi / p.L);
  const double phi = p.phi(co.v);
  if (!(phi > 0.0) || !(p.b2 > 0.0))
    throw SolveError("threshold requires phi(v*) > 0 and b2 > 0");
  return ((p.D1 * mu + p.b1 * co.u) * (p.D2 * mu + p.c2 * co.v) -
          p.b2 * p.c1 * co.u * co.v) /
         (p.b2 * mu * phi * co.u * co.v);
}

/// Full linearization of mode k at the parameters' chi.
inline ModeAnalysis analyze_mode(const ScaledParams& p, int k) {
  if (k < 1) throw ConfigError("mode index must be >= 1");
  const Equilibrium co = detail::require_coexistence(p);
  ModeAnalysis m;
  m.k = k;
  m.mu = (k * pi / p.L) * (k * pi / p.L);
  const double phi = p.phi(co.v);
  m.T = (p.D1 + p.D2) * m.mu + p.b1 * co.u + p.c2 * co.v;
  m.D = (p.D1 * m.mu + p.b1 * co.u) * (p.D2 * m.mu + p.c2 * co.v) -
        (p.chi * co.u * phi * m.mu + p.c1 * co.u) * p.b2 * co.v;
  m.chi_k = chi_threshold(p, k);
  m.Q = -(p.D2 * m.mu + p.c2 * co.v) / (p.b2 * co.v);
  const std::complex<double> disc =
      std::sqrt(std::complex<double>(m.T * m.T - 4.0 * m.D, 0.0));
  m.lambda_plus = 0.5 * (-m.T + disc);
  m.lambda_minus = 0.5 * (-m.T - disc);
  return m;
}

/// Minimize chi_k over k = 1..k_max (k_max <= 0 selects a range comfortably
/// past the continuum minimizer of the threshold curve). Ties at relative
/// 1e-10 mark the threshold as non-simple.
inline ModeSelection find_critical_mode(const ScaledParams& p, int k_max = 0) {
  const Equilibrium co = detail::require_coexistence(p);
  if (k_max <= 0) {
    const double gap = (p.b1 * p.c2 - p.b2 * p.c1) * co.u * co.v;
    int k_star = 0;
    if (gap > 0.0) {
      const double mu_star = std::sqrt(gap / (p.D1 * p.D2));
      k_star = static_cast<int>(std::ceil(p.L * std::sqrt(mu_star) / pi));
    }
    k_max = std::max(8, 2 * k_star + 2);
  }
  ModeSelection sel;
  sel.k_max = k_max;
  std::vector<double> chis(static_cast<std::size_t>(k_max) + 1, 0.0);
  for (int k = 1; k <= k_max; ++k) {
    chis[k] = chi_threshold(p, k);
    if (sel.k0 == 0 || chis[k] < sel.chi_k0) {
      sel.k0 = k;
      sel.chi_k0 = chis[k];
    }
  }
  for (int k = 1; k <= k_max; ++k) {
    if (k != sel.k0 &&
        std::abs(chis[k] - sel.chi_k0) <= 1e-10 * std::abs(sel.chi_k0)) {
      sel.simple = false;
      sel.tie_partner = k;
      break;
    }
  }
  return sel;
}

/// Slope in chi, at the threshold of mode k, of the eigenvalue of -M_k that
/// crosses zero (negative: the crossing eigenvalue decreases through zero as
/// chi increases, i.e. the mode's growth rate increases).
inline double mu_dot(const ScaledParams& p, int k) {
  const Equilibrium co = detail::require_coexistence(p);
  const double mu = (k * pi / p.L) * (k * pi / p.L);
  const double phi = p.phi(co.v);
  const double T = (p.D1 + p.D2) * mu + p.b1 * co.u + p.c2 * co.v;
  return -p.b2 * co.u * phi * co.v * mu / T;
}

/// Assemble the cubic normal form at mode k (k <= 0 selects the critical
/// mode). Throws SolveError when the 2k-mode response is resonant (which
/// happens exactly when modes k and 2k share their threshold) or when the
/// threshold is not simple.
inline BifurcationReport weakly_nonlinear(const ScaledParams& p, int k = 0) {
  const Equilibrium co = detail::require_coexistence(p);
  if (k <= 0) {
    const ModeSelection sel = find_critical_mode(p);
    if (!sel.simple)
      throw SolveError("threshold is not simple: modes " +
                       std::to_string(sel.k0) + " and " +
                       std::to_string(sel.tie_partner) + " tie");
    k = sel.k0;
  }

  BifurcationReport r;
  r.k0 = k;
  r.mu = (k * pi / p.L) * (k * pi / p.L);
  r.chi_k0 = chi_threshold(p, k);
  const double mu = r.mu, L = p.L;
  const double ub = co.u, vb = co.v;
  const double phi = p.phi(vb), dphi = p.phi.d1(vb), ddphi = p.phi.d2(vb);
  r.Q = -(p.D2 * mu + p.c2 * vb) / (p.b2 * vb);
  const double Q = r.Q;

  const KineticsDerivs d = kinetics_derivatives(p, ub, vb, 3);
  r.P1 = 0.5 * (d.f_uu * Q * Q + 2.0 * d.f_uv * Q + d.f_vv);
  r.P2 = 0.5 * (d.g_uu * Q * Q + 2.0 * d.g_uv * Q + d.g_vv);
  r.P3 = (d.f_uuu * Q * Q * Q + 3.0 * d.f_uuv * Q * Q + 3.0 * d.f_uvv * Q +
          d.f_vvv) / 6.0;
  r.P4 = (d.g_uuu * Q * Q * Q + 3.0 * d.g_uuv * Q * Q + 3.0 * d.g_uvv * Q +
          d.g_vvv) / 6.0;
  r.P5 = d.f_uu * Q + d.f_uv;
  r.P6 = d.f_uv * Q + d.f_vv;
  r.P7 = d.g_uu * Q + d.g_uv;
  r.P8 = d.g_uv * Q + d.g_vv;

  // Mean part of the second-order response: the homogeneous 2x2 system
  // [[b1 u*, c1 u*], [b2 v*, c2 v*]] against (P1/2, P2/2), integrated over
  // the interval.
  const double det0 = (p.b1 * p.c2 - p.b2 * p.c1) * ub * vb;
  if (std::abs(det0) <= 1e-14 * std::abs(p.b1 * p.c2 * ub * vb))
    throw SolveError("degenerate interference: second-order response singular");
  r.I_psi1 = L * (p.c2 * vb * r.P1 - p.c1 * ub * r.P2) / (2.0 * det0);
  r.I_phi1 = L * (p.b1 * ub * r.P2 - p.b2 * vb * r.P1) / (2.0 * det0);

  // Double-frequency part: linear response at wavenumber 2k.
  const double A11 = 4.0 * p.D1 * mu + p.b1 * ub;
  const double A12 = 4.0 * r.chi_k0 * ub * phi * mu + p.c1 * ub;
  const double A21 = p.b2 * vb;
  const double A22 = 4.0 * p.D2 * mu + p.c2 * vb;
  const double rhs1 =
      r.P1 * L / 4.0 - r.chi_k0 * mu * (phi * Q + ub * dphi) * L / 2.0;
  const double rhs2 = r.P2 * L / 4.0;
  r.detA = A11 * A22 - A12 * A21;
  const double detA_scale =
      std::abs(A11 * A22) + std::abs(A12 * A21) + 1e-300;
  if (std::abs(r.detA) <= 1e-10 * detA_scale)
    throw SolveError("resonant double-frequency response: modes " +
                     std::to_string(k) + " and " + std::to_string(2 * k) +
                     " share their threshold");
  r.detA1 = rhs1 * A22 - A12 * rhs2;
  r.detA2 = A11 * rhs2 - rhs1 * A21;
  r.J_psi1 = r.detA1 / r.detA;
  r.J_phi1 = r.detA2 / r.detA;

  // Third-order projections of the correction field on the k-mode, fixed by
  // requiring it orthogonal to the bifurcation direction (Q cos, cos).
  r.S_psi2 = ((r.I_psi1 + r.J_psi1) * r.P7 + (r.I_phi1 + r.J_phi1) * r.P8 +
              0.75 * L * r.P4) /
             (2.0 * p.b2 * vb * (1.0 + Q * Q));
  r.S_phi2 = -Q * r.S_psi2;

  // Solvability at third order: project the cubic residual on the adjoint
  // null direction of the k-mode and normalize.
  const double chimu = r.chi_k0 * mu;
  const double numer =
      -2.0 * (p.D1 * mu + p.b1 * ub) * r.S_psi2 -
      2.0 * (r.chi_k0 * ub * phi * mu + p.c1 * ub) * r.S_phi2 +
      (r.P5 - chimu * phi) * r.I_psi1 + (r.P5 + chimu * phi) * r.J_psi1 +
      (r.P6 - chimu * ub * dphi) * r.I_phi1 +
      (r.P6 - chimu * (2.0 * phi * Q + ub * dphi)) * r.J_phi1 +
      0.75 * L * r.P3 - (dphi * Q + 0.5 * ub * ddphi) * chimu * L / 4.0;
  r.K1 = 0.0;  // even-order solvability is automatic
  r.K2 = numer / (ub * phi * mu * L);
  r.branch_stable = r.K2 > 0.0;
  r.mu_dot = mu_dot(p, k);
  return r;
}

}  // namespace bdtaxis
