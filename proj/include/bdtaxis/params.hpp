// Parameter types for the two-species competition system with
// Beddington-DeAngelis kinetics and competitor-avoidance advection
//
//   u_t = (D1 u' + chi u phi(v) v')' + u(-1 + 1/(a1 + b1 u + c1 v))
//   v_t = D2 v'' + v(-1 + 1/(a2 + b2 u + c2 v))
//
// on (0, L) with no-flux boundaries, together with the reduction of the
// dimensional model (mortality rates alpha_i, response strengths beta_i)
// to this scaled form and the exact inverse map.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bdtaxis {

inline constexpr double pi = 3.14159265358979323846;

/// Numerical failure (solver divergence, inadmissible parameter window, ...).
class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration/validation failure (bad field values, malformed input).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Advective sensitivity phi(v): constant, affine in v, or a tabulated
/// profile interpolated by a natural cubic spline. First and second
/// derivatives are analytic in all three cases; outside the tabulated range
/// the end-interval cubic is extended.
class Sensitivity {
 public:
  enum class Kind { constant, linear, table };

  Sensitivity() = default;  // phi == 1

  static Sensitivity constant(double value) {
    Sensitivity s;
    s.kind_ = Kind::constant;
    s.c0_ = value;
    s.c1_ = 0.0;
    return s;
  }

  static Sensitivity linear(double intercept, double slope) {
    Sensitivity s;
    s.kind_ = Kind::linear;
    s.c0_ = intercept;
    s.c1_ = slope;
    return s;
  }

  static Sensitivity table(std::vector<double> v, std::vector<double> phi) {
    if (v.size() != phi.size() || v.size() < 3)
      throw ConfigError("sensitivity table needs >= 3 matching knots");
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!(v[i] > v[i - 1]))
        throw ConfigError("sensitivity table abscissae must increase");
    Sensitivity s;
    s.kind_ = Kind::table;
    s.knots_ = std::move(v);
    s.values_ = std::move(phi);
    s.build_spline();
    return s;
  }

  Kind kind() const { return kind_; }
  double intercept() const { return c0_; }
  double slope() const { return c1_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(double v) const {
    switch (kind_) {
      case Kind::constant: return c0_;
      case Kind::linear: return c0_ + c1_ * v;
      default: break;
    }
    const auto [i, t] = locate(v);
    const double h = knots_[i + 1] - knots_[i];
    const double a = 1.0 - t, b = t;
    return a * values_[i] + b * values_[i + 1] +
           ((a * a * a - a) * m2_[i] + (b * b * b - b) * m2_[i + 1]) * h * h / 6.0;
  }

  /// d phi / d v.
  double d1(double v) const {
    switch (kind_) {
      case Kind::constant: return 0.0;
      case Kind::linear: return c1_;
      default: break;
    }
    const auto [i, t] = locate(v);
    const double h = knots_[i + 1] - knots_[i];
    const double a = 1.0 - t, b = t;
    return (values_[i + 1] - values_[i]) / h +
           (-(3.0 * a * a - 1.0) * m2_[i] + (3.0 * b * b - 1.0) * m2_[i + 1]) * h / 6.0;
  }

  /// d^2 phi / d v^2.
  double d2(double v) const {
    if (kind_ != Kind::table) return 0.0;
    const auto [i, t] = locate(v);
    return (1.0 - t) * m2_[i] + t * m2_[i + 1];
  }

  /// phi~(w) = value_scale * phi(arg_scale * w), keeping the descriptor kind.
  Sensitivity rescaled(double value_scale, double arg_scale) const {
    switch (kind_) {
      case Kind::constant:
        return constant(value_scale * c0_);
      case Kind::linear:
        return linear(value_scale * c0_, value_scale * c1_ * arg_scale);
      default: {
        std::vector<double> v(knots_.size()), phi(values_.size());
        for (std::size_t i = 0; i < knots_.size(); ++i) {
          v[i] = knots_[i] / arg_scale;
          phi[i] = value_scale * values_[i];
        }
        return table(std::move(v), std::move(phi));
      }
    }
  }

 private:
  // Natural cubic spline second derivatives via the classic tridiagonal sweep.
  void build_spline() {
    const std::size_t n = knots_.size();
    m2_.assign(n, 0.0);
    std::vector<double> c(n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = knots_[i] - knots_[i - 1];
      const double h1 = knots_[i + 1] - knots_[i];
      const double slope0 = (values_[i] - values_[i - 1]) / h0;
      const double slope1 = (values_[i + 1] - values_[i]) / h1;
      // Forward elimination on the symmetric tridiagonal system
      //   (h0/6) m2[i-1] + ((h0+h1)/3) m2[i] + (h1/6) m2[i+1] = slope1 - slope0.
      double d = (h0 + h1) / 3.0;
      double r = slope1 - slope0;
      if (i > 1) {
        const double w = (h0 / 6.0) / c[i - 1];
        d -= w * (h0 / 6.0);
        r -= w * rhs[i - 1];
      }
      c[i] = d;
      rhs[i] = r;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      const double h1 = knots_[i + 1] - knots_[i];
      m2_[i] = (rhs[i] - (h1 / 6.0) * m2_[i + 1]) / c[i];
      if (i == 1) break;
    }
  }

  std::pair<std::size_t, double> locate(double v) const {
    std::size_t lo = 0, hi = knots_.size() - 2;
    if (v <= knots_.front()) {
      lo = 0;
    } else if (v >= knots_.back()) {
      lo = hi;
    } else {
      while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (knots_[mid] <= v) lo = mid; else hi = mid - 1;
      }
    }
    const double t = (v - knots_[lo]) / (knots_[lo + 1] - knots_[lo]);
    return {lo, t};
  }

  Kind kind_ = Kind::constant;
  double c0_ = 1.0, c1_ = 0.0;
  std::vector<double> knots_, values_, m2_;
};

/// Dimensional model constants. alpha_i are the mortality rates, beta_i the
/// response strengths; the interference coefficients a_i, b_i, c_i enter the
/// Beddington-DeAngelis denominators a_i + b_i u + c_i v.
struct SystemParams {
  double D1 = 1.0, D2 = 1.0, chi = 0.0;
  double alpha1 = 1.0, alpha2 = 1.0, beta1 = 1.0, beta2 = 1.0;
  double a1 = 0.0, b1 = 1.0, c1 = 0.0;
  double a2 = 0.0, b2 = 0.0, c2 = 1.0;
  double L = 1.0;
  Sensitivity phi = Sensitivity::constant(1.0);
};

/// Original rates recorded by the scaling map so it can be inverted exactly.
struct ScaleFactors {
  double alpha1 = 1.0, alpha2 = 1.0, beta1 = 1.0, beta2 = 1.0;

  double time() const { return alpha1; }         // t~ = time() * t
  double space() const { return std::sqrt(alpha1); }  // x~ = space() * x
  double u() const { return 1.0; }               // u~ = u
  double v() const { return alpha1 / alpha2; }   // v~ = v() * v
};

/// Scaled (working) parameters: both per-capita rates are normalized, the
/// residual factor alpha2/alpha1 on the v equation being absorbed into D2 as a
/// reparameterization of that equation's clock (exact for steady states and
/// for the entire linear threshold analysis).
struct ScaledParams {
  double D1 = 1.0, D2 = 1.0, chi = 0.0;
  double a1 = 0.0, b1 = 1.0, c1 = 0.0;
  double a2 = 0.0, b2 = 0.0, c2 = 1.0;
  double L = 1.0;
  Sensitivity phi = Sensitivity::constant(1.0);
  ScaleFactors scale{};
};

/// Map the dimensional system to the scaled one:
///   t~ = alpha1 t,  x~ = sqrt(alpha1) x,  u~ = u,  v~ = (alpha1/alpha2) v.
inline ScaledParams nondimensionalize(const SystemParams& p) {
  if (p.alpha1 <= 0 || p.alpha2 <= 0 || p.beta1 <= 0 || p.beta2 <= 0)
    throw ConfigError("rates alpha_i, beta_i must be positive");
  if (p.D1 <= 0 || p.D2 <= 0 || p.L <= 0)
    throw ConfigError("D1, D2, L must be positive");
  const double a1 = p.alpha1, a2 = p.alpha2;
  ScaledParams q;
  q.D1 = p.D1;
  q.D2 = p.D2 * a1 / a2;
  q.chi = p.chi / a1;
  q.a1 = p.a1 * a1 / p.beta1;
  q.b1 = p.b1 * a1 / p.beta1;
  q.c1 = p.c1 * a2 / p.beta1;
  q.a2 = p.a2 * a2 / p.beta2;
  q.b2 = p.b2 * a2 / p.beta2;
  q.c2 = p.c2 * a2 * a2 / (a1 * p.beta2);
  q.L = p.L * std::sqrt(a1);
  q.phi = p.phi.rescaled(a2, a2 / a1);
  q.scale = ScaleFactors{a1, a2, p.beta1, p.beta2};
  return q;
}

/// Exact inverse of nondimensionalize (uses the recorded rates).
inline SystemParams redimensionalize(const ScaledParams& q) {
  const double a1 = q.scale.alpha1, a2 = q.scale.alpha2;
  SystemParams p;
  p.alpha1 = a1;
  p.alpha2 = a2;
  p.beta1 = q.scale.beta1;
  p.beta2 = q.scale.beta2;
  p.D1 = q.D1;
  p.D2 = q.D2 * a2 / a1;
  p.chi = q.chi * a1;
  p.a1 = q.a1 * p.beta1 / a1;
  p.b1 = q.b1 * p.beta1 / a1;
  p.c1 = q.c1 * p.beta1 / a2;
  p.a2 = q.a2 * p.beta2 / a2;
  p.b2 = q.b2 * p.beta2 / a2;
  p.c2 = q.c2 * a1 * p.beta2 / (a2 * a2);
  p.L = q.L / std::sqrt(a1);
  p.phi = q.phi.rescaled(1.0 / a2, a1 / a2);
  return p;
}

}  // namespace bdtaxis
