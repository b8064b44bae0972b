// Reaction terms of the scaled competition system and their closed-form
// derivatives up to third order, spatially homogeneous equilibria, and the
// weak/strong competition classification.
//
//   f(u,v) = u (-1 + 1/A),  A = a1 + b1 u + c1 v
//   g(u,v) = v (-1 + 1/B),  B = a2 + b2 u + c2 v
#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "bdtaxis/params.hpp"

namespace bdtaxis {

struct KineticsValue {
  double f = 0.0, g = 0.0;
};

/// Partial derivatives of (f, g) at a point; fields above `order` are zero.
struct KineticsDerivs {
  int order = 1;
  double f_u = 0, f_v = 0, g_u = 0, g_v = 0;
  double f_uu = 0, f_uv = 0, f_vv = 0, g_uu = 0, g_uv = 0, g_vv = 0;
  double f_uuu = 0, f_uuv = 0, f_uvv = 0, f_vvv = 0;
  double g_uuu = 0, g_uuv = 0, g_uvv = 0, g_vvv = 0;
};

struct Equilibrium {
  enum class Kind { extinction, u_only, v_only, coexistence };
  double u = 0.0, v = 0.0;
  Kind kind = Kind::extinction;
};

/// Competition-strength classification of the interference coefficients.
struct CompetitionRegime {
  enum class Tag { weak, strong, none };
  Tag tag = Tag::none;
  double ratio_c = 0.0;       // c1 / c2
  double ratio_growth = 0.0;  // (1 - a1) / (1 - a2)
  double ratio_b = 0.0;       // b1 / b2
  bool degenerate = false;    // b2 c1 == b1 c2 to relative 1e-14
};

inline KineticsValue eval_kinetics(const ScaledParams& p, double u, double v) {
  const double A = p.a1 + p.b1 * u + p.c1 * v;
  const double B = p.a2 + p.b2 * u + p.c2 * v;
  return {u * (-1.0 + 1.0 / A), v * (-1.0 + 1.0 / B)};
}

/// Analytic partials of f and g through `order` (1, 2, or 3).
inline KineticsDerivs kinetics_derivatives(const ScaledParams& p, double u,
                                           double v, int order = 3) {
  if (order < 1 || order > 3) throw ConfigError("derivative order must be 1..3");
  const double A = p.a1 + p.b1 * u + p.c1 * v;
  const double B = p.a2 + p.b2 * u + p.c2 * v;
  const double A2 = A * A, A3 = A2 * A, A4 = A3 * A;
  const double B2 = B * B, B3 = B2 * B, B4 = B3 * B;
  const double b1 = p.b1, c1 = p.c1, b2 = p.b2, c2 = p.c2;

  KineticsDerivs d;
  d.order = order;
  d.f_u = (-1.0 + 1.0 / A) - b1 * u / A2;
  d.f_v = -c1 * u / A2;
  d.g_v = (-1.0 + 1.0 / B) - c2 * v / B2;
  d.g_u = -b2 * v / B2;
  if (order < 2) return d;

  d.f_uu = -2.0 * b1 / A2 + 2.0 * b1 * b1 * u / A3;
  d.f_uv = -c1 / A2 + 2.0 * b1 * c1 * u / A3;
  d.f_vv = 2.0 * c1 * c1 * u / A3;
  d.g_vv = -2.0 * c2 / B2 + 2.0 * c2 * c2 * v / B3;
  d.g_uv = -b2 / B2 + 2.0 * b2 * c2 * v / B3;
  d.g_uu = 2.0 * b2 * b2 * v / B3;
  if (order < 3) return d;

  d.f_uuu = 6.0 * b1 * b1 / A3 - 6.0 * b1 * b1 * b1 * u / A4;
  d.f_uuv = 4.0 * b1 * c1 / A3 - 6.0 * b1 * b1 * c1 * u / A4;
  d.f_uvv = 2.0 * c1 * c1 / A3 - 6.0 * b1 * c1 * c1 * u / A4;
  d.f_vvv = -6.0 * c1 * c1 * c1 * u / A4;
  d.g_vvv = 6.0 * c2 * c2 / B3 - 6.0 * c2 * c2 * c2 * v / B4;
  d.g_uvv = 4.0 * b2 * c2 / B3 - 6.0 * b2 * c2 * c2 * v / B4;
  d.g_uuv = 2.0 * b2 * b2 / B3 - 6.0 * b2 * b2 * c2 * v / B4;
  d.g_uuu = -6.0 * b2 * b2 * b2 * v / B4;
  return d;
}

/// Relative degeneracy test for the interference determinant b2 c1 - b1 c2.
inline bool interference_degenerate(const ScaledParams& p) {
  const double det = p.b2 * p.c1 - p.b1 * p.c2;
  const double scale = std::max(std::abs(p.b2 * p.c1), std::abs(p.b1 * p.c2));
  return std::abs(det) <= 1e-14 * scale;
}

/// Coexistence state, if the interference determinant is nonzero and both
/// components are strictly positive.
inline std::optional<Equilibrium> coexistence_equilibrium(const ScaledParams& p) {
  if (interference_degenerate(p)) return std::nullopt;
  const double det = p.b2 * p.c1 - p.b1 * p.c2;
  const double ub = ((1.0 - p.a2) * p.c1 - (1.0 - p.a1) * p.c2) / det;
  const double vb = ((1.0 - p.a1) * p.b2 - (1.0 - p.a2) * p.b1) / det;
  if (!(ub > 0.0) || !(vb > 0.0)) return std::nullopt;
  return Equilibrium{ub, vb, Equilibrium::Kind::coexistence};
}

/// All nonnegative spatially homogeneous equilibria, in the fixed order
/// extinction, u-only, v-only, coexistence (each semitrivial/coexistence
/// state included only when its nontrivial components are positive).
inline std::vector<Equilibrium> compute_equilibria(const ScaledParams& p) {
  std::vector<Equilibrium> out;
  out.push_back({0.0, 0.0, Equilibrium::Kind::extinction});
  if (p.a1 < 1.0 && p.b1 > 0.0)
    out.push_back({(1.0 - p.a1) / p.b1, 0.0, Equilibrium::Kind::u_only});
  if (p.a2 < 1.0 && p.c2 > 0.0)
    out.push_back({0.0, (1.0 - p.a2) / p.c2, Equilibrium::Kind::v_only});
  if (auto co = coexistence_equilibrium(p)) out.push_back(*co);
  return out;
}

/// Weak regime: c1/c2 < (1-a1)/(1-a2) < b1/b2; strong regime reverses both
/// inequalities. Anything else (ties, one-sided, degenerate) is `none`.
inline CompetitionRegime classify_regime(const ScaledParams& p) {
  CompetitionRegime r;
  r.ratio_c = p.c1 / p.c2;
  r.ratio_growth = (1.0 - p.a1) / (1.0 - p.a2);
  r.ratio_b = p.b1 / p.b2;
  r.degenerate = interference_degenerate(p);
  if (r.ratio_c < r.ratio_growth && r.ratio_growth < r.ratio_b)
    r.tag = CompetitionRegime::Tag::weak;
  else if (r.ratio_b < r.ratio_growth && r.ratio_growth < r.ratio_c)
    r.tag = CompetitionRegime::Tag::strong;
  else
    r.tag = CompetitionRegime::Tag::none;
  return r;
}

}  // namespace bdtaxis
