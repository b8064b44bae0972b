// Cell-centered finite-volume grid on (0, L) and the two-species state it
// carries. Cell i occupies ((i)dx, (i+1)dx) with center x_i = (i + 1/2) dx;
// no-flux boundaries are built into every operator assembled on this grid.
#pragma once

#include <vector>

#include "bdtaxis/params.hpp"

namespace bdtaxis {

struct Grid1D {
  double L = 1.0;
  int n = 16;

  Grid1D() = default;
  Grid1D(double length, int cells) : L(length), n(cells) {
    if (!(length > 0.0)) throw ConfigError("grid length must be positive");
    if (cells < 16) throw ConfigError("grid needs at least 16 cells");
  }

  double dx() const { return L / n; }
  double x(int i) const { return (i + 0.5) * dx(); }
};

/// Cell-averaged fields at one instant.
struct StateField {
  double t = 0.0;
  std::vector<double> u, v;
};

/// Spatially constant state.
inline StateField constant_state(const Grid1D& g, double u, double v) {
  StateField s;
  s.u.assign(static_cast<std::size_t>(g.n), u);
  s.v.assign(static_cast<std::size_t>(g.n), v);
  return s;
}

/// Add amp * cos(k pi x / L) to the chosen components.
inline void add_cosine(StateField& s, const Grid1D& g, int k, double amp_u,
                       double amp_v) {
  for (int i = 0; i < g.n; ++i) {
    const double c = std::cos(k * pi * g.x(i) / g.L);
    s.u[static_cast<std::size_t>(i)] += amp_u * c;
    s.v[static_cast<std::size_t>(i)] += amp_v * c;
  }
}

/// Trapezoid-exact cell-average integral of a sampled field.
inline double integrate(const Grid1D& g, const std::vector<double>& f) {
  double sum = 0.0;
  for (double x : f) sum += x;
  return sum * g.dx();
}

}  // namespace bdtaxis
