// Tests for the reaction terms: analytic derivatives against finite
// differences, homogeneous equilibria, regime classification, the advective
// sensitivity descriptors, and the dimensional <-> scaled parameter maps.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bdtaxis/kinetics.hpp"

using namespace bdtaxis;

namespace {

// Weak-competition benchmark set used throughout the suites.
ScaledParams weak_params() {
  ScaledParams p;
  p.D1 = 1.0;
  p.D2 = 0.1;
  p.chi = 0.0;
  p.a1 = 0.5; p.b1 = 2.0; p.c1 = 0.5;
  p.a2 = 0.5; p.b2 = 1.0; p.c2 = 1.0;
  p.L = 3.0;
  return p;
}

// Strongly advective set with a large coexistence imbalance.
ScaledParams spike_params() {
  ScaledParams p;
  p.D1 = 5.0;
  p.D2 = 5e-3;
  p.chi = 30.0;
  p.a1 = 0.2; p.b1 = 0.8; p.c1 = 0.1;
  p.a2 = 0.6; p.b2 = 0.2; p.c2 = 0.4;
  p.L = 5.0;
  return p;
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max({std::abs(got), std::abs(want), 1e-12});
}

}  // namespace

TEST_CASE("analytic derivatives match central finite differences") {
  std::mt19937 rng(20240811u);
  std::uniform_real_distribution<double> coef(0.1, 3.0), frac(0.05, 0.95),
      point(0.05, 2.0);
  const double h = 1e-5, tol = 1e-6;

  for (int trial = 0; trial < 100; ++trial) {
    ScaledParams p;
    p.a1 = frac(rng); p.b1 = coef(rng); p.c1 = coef(rng);
    p.a2 = frac(rng); p.b2 = coef(rng); p.c2 = coef(rng);
    const double u = point(rng), v = point(rng);

    auto F = [&](double uu, double vv) { return eval_kinetics(p, uu, vv); };
    auto D = [&](double uu, double vv) { return kinetics_derivatives(p, uu, vv, 3); };
    const KineticsDerivs d = D(u, v);

    // First order from the values themselves.
    CHECK(rel_err(d.f_u, (F(u + h, v).f - F(u - h, v).f) / (2 * h)) < tol);
    CHECK(rel_err(d.f_v, (F(u, v + h).f - F(u, v - h).f) / (2 * h)) < tol);
    CHECK(rel_err(d.g_u, (F(u + h, v).g - F(u - h, v).g) / (2 * h)) < tol);
    CHECK(rel_err(d.g_v, (F(u, v + h).g - F(u, v - h).g) / (2 * h)) < tol);

    // Second order from the analytic first derivatives.
    CHECK(rel_err(d.f_uu, (D(u + h, v).f_u - D(u - h, v).f_u) / (2 * h)) < tol);
    CHECK(rel_err(d.f_uv, (D(u, v + h).f_u - D(u, v - h).f_u) / (2 * h)) < tol);
    CHECK(rel_err(d.f_vv, (D(u, v + h).f_v - D(u, v - h).f_v) / (2 * h)) < tol);
    CHECK(rel_err(d.g_uu, (D(u + h, v).g_u - D(u - h, v).g_u) / (2 * h)) < tol);
    CHECK(rel_err(d.g_uv, (D(u, v + h).g_u - D(u, v - h).g_u) / (2 * h)) < tol);
    CHECK(rel_err(d.g_vv, (D(u, v + h).g_v - D(u, v - h).g_v) / (2 * h)) < tol);

    // Third order from the analytic second derivatives.
    CHECK(rel_err(d.f_uuu, (D(u + h, v).f_uu - D(u - h, v).f_uu) / (2 * h)) < tol);
    CHECK(rel_err(d.f_uuv, (D(u, v + h).f_uu - D(u, v - h).f_uu) / (2 * h)) < tol);
    CHECK(rel_err(d.f_uvv, (D(u, v + h).f_uv - D(u, v - h).f_uv) / (2 * h)) < tol);
    CHECK(rel_err(d.f_vvv, (D(u, v + h).f_vv - D(u, v - h).f_vv) / (2 * h)) < tol);
    CHECK(rel_err(d.g_uuu, (D(u + h, v).g_uu - D(u - h, v).g_uu) / (2 * h)) < tol);
    CHECK(rel_err(d.g_uuv, (D(u, v + h).g_uu - D(u, v - h).g_uu) / (2 * h)) < tol);
    CHECK(rel_err(d.g_uvv, (D(u, v + h).g_uv - D(u, v - h).g_uv) / (2 * h)) < tol);
    CHECK(rel_err(d.g_vvv, (D(u, v + h).g_vv - D(u, v - h).g_vv) / (2 * h)) < tol);
  }
}

TEST_CASE("kinetics vanish at every homogeneous equilibrium") {
  for (const auto& p : {weak_params(), spike_params()}) {
    for (const Equilibrium& e : compute_equilibria(p)) {
      const KineticsValue k = eval_kinetics(p, e.u, e.v);
      CHECK(std::abs(k.f) < 1e-14);
      CHECK(std::abs(k.g) < 1e-14);
    }
  }
}

TEST_CASE("homogeneous equilibria of the weak-competition set") {
  const auto eq = compute_equilibria(weak_params());
  REQUIRE(eq.size() == 4);
  CHECK(eq[0].kind == Equilibrium::Kind::extinction);
  CHECK(eq[1].kind == Equilibrium::Kind::u_only);
  CHECK(eq[1].u == Catch::Approx(0.25).margin(1e-14));
  CHECK(eq[2].kind == Equilibrium::Kind::v_only);
  CHECK(eq[2].v == Catch::Approx(0.5).margin(1e-14));
  CHECK(eq[3].kind == Equilibrium::Kind::coexistence);
  CHECK(eq[3].u == Catch::Approx(1.0 / 6.0).margin(1e-12));
  CHECK(eq[3].v == Catch::Approx(1.0 / 3.0).margin(1e-12));
}

TEST_CASE("homogeneous equilibria of the strongly advective set") {
  const auto co = coexistence_equilibrium(spike_params());
  REQUIRE(co.has_value());
  CHECK(co->u == Catch::Approx(14.0 / 15.0).margin(1e-12));
  CHECK(co->v == Catch::Approx(8.0 / 15.0).margin(1e-12));
}

TEST_CASE("competition regime classification") {
  SECTION("weak: c1/c2 < (1-a1)/(1-a2) < b1/b2") {
    const auto r = classify_regime(weak_params());
    CHECK(r.tag == CompetitionRegime::Tag::weak);
    CHECK(r.ratio_c == Catch::Approx(0.5));
    CHECK(r.ratio_growth == Catch::Approx(1.0));
    CHECK(r.ratio_b == Catch::Approx(2.0));
    CHECK_FALSE(r.degenerate);
  }
  SECTION("strong: both inequalities reversed") {
    ScaledParams p = weak_params();
    std::swap(p.b1, p.b2);
    std::swap(p.c1, p.c2);
    const auto r = classify_regime(p);
    CHECK(r.tag == CompetitionRegime::Tag::strong);
  }
  SECTION("one-sided orderings classify as none") {
    ScaledParams p = weak_params();
    p.c1 = 3.0;  // ratio_c = 3 > ratio_growth = 1 < ratio_b = 2
    CHECK(classify_regime(p).tag == CompetitionRegime::Tag::none);
  }
}

TEST_CASE("degenerate interference admits no coexistence state") {
  ScaledParams p = weak_params();
  p.b1 = 2.0; p.c1 = 1.0; p.b2 = 1.0; p.c2 = 0.5;  // b2 c1 == b1 c2
  CHECK(classify_regime(p).degenerate);
  CHECK_FALSE(coexistence_equilibrium(p).has_value());
  for (const auto& e : compute_equilibria(p))
    CHECK(e.kind != Equilibrium::Kind::coexistence);
}

TEST_CASE("sensitivity descriptors") {
  SECTION("constant and linear") {
    const auto c = Sensitivity::constant(2.5);
    CHECK(c(0.7) == 2.5);
    CHECK(c.d1(0.7) == 0.0);
    CHECK(c.d2(0.7) == 0.0);

    const auto l = Sensitivity::linear(1.0, -0.5);
    CHECK(l(2.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(l.d1(0.3) == -0.5);
    CHECK(l.d2(0.3) == 0.0);
  }

  SECTION("table spline interpolates knots and differentiates consistently") {
    std::vector<double> v, phi;
    for (int i = 0; i <= 8; ++i) {
      const double x = 0.25 * i;
      v.push_back(x);
      phi.push_back(1.0 + 0.4 * x - 0.07 * x * x * x);
    }
    const auto s = Sensitivity::table(v, phi);
    for (std::size_t i = 0; i < v.size(); ++i)
      CHECK(s(v[i]) == Catch::Approx(phi[i]).margin(1e-14));

    const double h = 1e-6;
    for (double x : {0.11, 0.62, 1.37, 1.93}) {
      CHECK(rel_err(s.d1(x), (s(x + h) - s(x - h)) / (2 * h)) < 1e-7);
      CHECK(rel_err(s.d2(x), (s.d1(x + h) - s.d1(x - h)) / (2 * h)) < 1e-7);
    }
    // Natural end conditions: curvature vanishes at the boundary knots.
    CHECK(std::abs(s.d2(v.front())) < 1e-12);
    CHECK(std::abs(s.d2(v.back())) < 1e-12);
  }

  SECTION("linear data reproduce the line exactly") {
    const auto s = Sensitivity::table({0.0, 0.5, 1.2, 2.0}, {1.0, 1.5, 2.2, 3.0});
    CHECK(s(0.8) == Catch::Approx(1.8).margin(1e-13));
    CHECK(s.d1(1.7) == Catch::Approx(1.0).margin(1e-13));
    CHECK(std::abs(s.d2(0.9)) < 1e-13);
  }

  SECTION("validation") {
    CHECK_THROWS_AS(Sensitivity::table({0.0, 1.0}, {1.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(Sensitivity::table({0.0, 1.0, 1.0}, {1.0, 1.0, 1.0}), ConfigError);
  }
}

TEST_CASE("scaling maps") {
  SystemParams p;
  p.D1 = 2.0; p.D2 = 0.3; p.chi = 4.0;
  p.alpha1 = 1.7; p.alpha2 = 0.6; p.beta1 = 2.3; p.beta2 = 0.9;
  p.a1 = 0.4; p.b1 = 1.1; p.c1 = 0.7;
  p.a2 = 0.25; p.b2 = 0.5; p.c2 = 1.3;
  p.L = 3.0;
  p.phi = Sensitivity::linear(1.0, 0.2);

  SECTION("reaction terms transform with the rate factors") {
    const ScaledParams q = nondimensionalize(p);
    std::mt19937 rng(7u);
    std::uniform_real_distribution<double> point(0.05, 1.5);
    for (int trial = 0; trial < 25; ++trial) {
      const double u = point(rng), v = point(rng);
      const double f_orig =
          u * (-p.alpha1 + p.beta1 / (p.a1 + p.b1 * u + p.c1 * v));
      const double g_orig =
          v * (-p.alpha2 + p.beta2 / (p.a2 + p.b2 * u + p.c2 * v));
      const KineticsValue k =
          eval_kinetics(q, u * q.scale.u(), v * q.scale.v());
      CHECK(rel_err(p.alpha1 * k.f, f_orig) < 1e-12);
      CHECK(rel_err(p.alpha2 * p.alpha2 / p.alpha1 * k.g, g_orig) < 1e-12);
    }
  }

  SECTION("sensitivity transforms pointwise") {
    SystemParams pt = p;
    pt.phi = Sensitivity::table({0.0, 0.4, 0.9, 1.6, 2.5},
                                {1.0, 1.1, 0.9, 0.7, 0.65});
    const ScaledParams q = nondimensionalize(pt);
    for (double v : {0.1, 0.5, 1.2, 2.0})
      CHECK(rel_err(q.phi(v * q.scale.v()), pt.alpha2 * pt.phi(v)) < 1e-12);
  }

  SECTION("unit rates leave every coefficient untouched") {
    SystemParams id = p;
    id.alpha1 = id.alpha2 = id.beta1 = id.beta2 = 1.0;
    const ScaledParams q = nondimensionalize(id);
    CHECK(q.D2 == id.D2);
    CHECK(q.chi == id.chi);
    CHECK(q.c2 == id.c2);
    CHECK(q.L == id.L);
  }

  SECTION("space contracts with the u clock") {
    SystemParams fast = p;
    fast.alpha1 = 4.0;
    CHECK(nondimensionalize(fast).L == Catch::Approx(2.0 * p.L).margin(1e-14));
  }

  SECTION("round trip is exact to rounding") {
    const SystemParams back = redimensionalize(nondimensionalize(p));
    CHECK(rel_err(back.D1, p.D1) < 1e-14);
    CHECK(rel_err(back.D2, p.D2) < 1e-14);
    CHECK(rel_err(back.chi, p.chi) < 1e-14);
    CHECK(rel_err(back.a1, p.a1) < 1e-14);
    CHECK(rel_err(back.b1, p.b1) < 1e-14);
    CHECK(rel_err(back.c1, p.c1) < 1e-14);
    CHECK(rel_err(back.a2, p.a2) < 1e-14);
    CHECK(rel_err(back.b2, p.b2) < 1e-14);
    CHECK(rel_err(back.c2, p.c2) < 1e-14);
    CHECK(rel_err(back.L, p.L) < 1e-14);
    for (double v : {0.2, 0.9, 1.7})
      CHECK(rel_err(back.phi(v), p.phi(v)) < 1e-13);
  }

  SECTION("invalid rates are rejected") {
    SystemParams bad = p;
    bad.alpha1 = 0.0;
    CHECK_THROWS_AS(nondimensionalize(bad), ConfigError);
  }
}
