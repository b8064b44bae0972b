// Walks the linear theory for a weak-competition configuration: regime
// classification, coexistence state, per-mode instability thresholds, the
// critical mode, and the cubic coefficient that decides whether the branch
// bends supercritically.
#include <cstdio>

#include "bdtaxis/kinetics.hpp"
#include "bdtaxis/params.hpp"
#include "bdtaxis/spectral.hpp"

using namespace bdtaxis;

int main() {
  SystemParams sys;
  sys.D1 = 1.0;
  sys.D2 = 0.1;
  sys.chi = 10.5;
  sys.a1 = 0.5;
  sys.b1 = 2.0;
  sys.c1 = 0.5;
  sys.a2 = 0.5;
  sys.b2 = 1.0;
  sys.c2 = 1.0;
  sys.L = 3.0;

  const ScaledParams p = nondimensionalize(sys);
  const CompetitionRegime regime = classify_regime(p);
  std::printf("competition regime: %s  (c1/c2 = %.4f, growth ratio = %.4f, b1/b2 = %.4f)\n",
              regime.tag == CompetitionRegime::Tag::weak     ? "weak"
              : regime.tag == CompetitionRegime::Tag::strong ? "strong"
                                                             : "none",
              regime.ratio_c, regime.ratio_growth, regime.ratio_b);

  const auto co = coexistence_equilibrium(p);
  if (!co) {
    std::printf("no positive coexistence state; nothing to analyze\n");
    return 1;
  }
  std::printf("coexistence state: u = %.10f, v = %.10f\n\n", co->u, co->v);

  const ModeSelection sel = find_critical_mode(p);
  std::printf("%4s %12s %12s %12s\n", "k", "mu_k", "chi_k", "Q_k");
  for (int k = 1; k <= sel.k_max; ++k) {
    const ModeAnalysis m = analyze_mode(p, k);
    std::printf("%4d %12.6f %12.6f %12.6f%s\n", k, m.mu, m.chi_k, m.Q,
                k == sel.k0 ? "   <- critical" : "");
  }

  const BifurcationReport wnl = weakly_nonlinear(p, sel.k0);
  std::printf("\ncritical mode k0 = %d at chi_k0 = %.10f\n", sel.k0, sel.chi_k0);
  std::printf("normal form: chi(s) = chi_k0 + (%.6g) s + (%.6g) s^2 + ...\n",
              wnl.K1, wnl.K2);
  std::printf("branch: %s; crossing-eigenvalue slope mu_dot = %.7f\n",
              wnl.branch_stable ? "supercritical (stable)" : "subcritical (unstable)",
              mu_dot(p, sel.k0));
  std::printf("configured chi = %.4f is %s the threshold\n", p.chi,
              p.chi > sel.chi_k0 ? "above" : "below");
  return 0;
}
