// Demonstrates the singular boundary-layer limit: solves the reduced scalar
// problem for the constrained constant at a small diffusion ratio, prints the
// layer anatomy (root structure, dip depth, decay rate), and verifies that
// the reconstructed pair seeds the full steady solver.
#include <cstdio>

#include "bdtaxis/shadow.hpp"
#include "bdtaxis/steady.hpp"

using namespace bdtaxis;

int main() {
  ShadowParams sp;
  sp.r = 1.0;
  sp.eps = 0.1;
  sp.L = 5.0;
  sp.a1 = 0.85;
  sp.b1 = 2.0;
  sp.c1 = 0.05;
  sp.a2 = 0.6;
  sp.b2 = 0.2;
  sp.c2 = 0.4;

  std::printf("layer scale eps = %.3f, admissible lambda in (0, %.10f)\n", sp.eps,
              shadow_lambda_max(sp));

  const SpikeSolution sol = solve_lambda(sp);
  const GRootStructure rs = g_roots(sp, sol.lambda_eps);
  std::printf("constrained constant lambda = %.12f\n", sol.lambda_eps);
  std::printf("reduced-kinetics roots: s1 = %.6f, s3 = %.6f, s4 = %.6f, s2 = %.6f\n",
              rs.s1, rs.s3, rs.s4, rs.s2);
  std::printf("residuals: constraint %.3e, layer equation %.3e\n",
              sol.constraint_residual, sol.profile_residual);

  double v_min = sol.v_profile[0];
  for (double v : sol.v_profile) v_min = v_min < v ? v_min : v;
  std::printf("v dips to %.6f at the boundary (bulk level %.6f), u(0) = %.6f\n",
              v_min, sp.vstar() - rs.s1, sol.u_profile[0]);

  // Hand the reconstruction to the full solver as an initial guess.
  const double D1 = 50.0;
  ScaledParams p;
  p.D1 = D1;
  p.D2 = sp.eps * sp.eps;
  p.chi = sp.r * D1;
  p.a1 = sp.a1;
  p.b1 = sp.b1;
  p.c1 = sp.c1;
  p.a2 = sp.a2;
  p.b2 = sp.b2;
  p.c2 = sp.c2;
  p.L = sp.L;

  const Grid1D g(p.L, 1024);
  const StateField seed = reconstruct_full(sp, sol, g);
  NewtonOptions opts;
  opts.tol = 3e-11 * D1;
  opts.max_iter = 80;
  opts.require_positive = false;
  const SteadyState st = newton_solve(p, g, seed, opts);
  double gap = 0.0;
  for (int i = 0; i < g.n; ++i) {
    const double d = std::abs(st.profile.v[i] - seed.v[i]);
    gap = gap > d ? gap : d;
  }
  std::printf("full steady solve at D1 = %.0f: residual %.3e, sup|v - seed| = %.3e\n",
              D1, st.residual, gap);
  return 0;
}
