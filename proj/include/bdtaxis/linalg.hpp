// Small direct solvers used by the implicit time steps and the steady-state
// Newton iteration: a Thomas sweep for tridiagonal systems (the implicit
// diffusion operators are strictly diagonally dominant, so no pivoting) and
// an LU factorization with partial pivoting for general banded matrices.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "bdtaxis/params.hpp"

namespace bdtaxis {

/// Solve a tridiagonal system in place: lower/upper have size n-1, diag and
/// rhs size n. The coefficient arrays are consumed as scratch.
inline void solve_tridiagonal(std::vector<double>& lower,
                              std::vector<double>& diag,
                              std::vector<double>& upper,
                              std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  if (n == 0 || lower.size() != n - 1 || upper.size() != n - 1 ||
      rhs.size() != n)
    throw ConfigError("tridiagonal solve: inconsistent sizes");
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i - 1] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

/// Banded matrix with kl sub- and ku superdiagonals, factored in place by
/// Gaussian elimination with partial row pivoting (fill-in widens the upper
/// band to kl + ku). Assemble with at(), then factor(), then solve().
class BandedLU {
 public:
  BandedLU(int n, int kl, int ku)
      : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
        ab_(static_cast<std::size_t>(ldab_) * n_, 0.0), piv_(n_, 0) {
    if (n <= 0 || kl < 0 || ku < 0) throw ConfigError("bad band dimensions");
  }

  /// Entry A(i, j); valid before factor() for |i - j| within the band.
  double& at(int i, int j) {
    if (i < 0 || j < 0 || i >= n_ || j >= n_ || j - i > ku_ || i - j > kl_)
      throw ConfigError("banded entry outside the band");
    return ab_[idx(i, j)];
  }

  void factor() {
    factored_ = true;
    const int kv = kl_ + ku_;  // width of the factored upper band
    for (int col = 0; col < n_; ++col) {
      const int last_row = std::min(n_ - 1, col + kl_);
      int p = col;
      double pmax = std::abs(ab_[idx(col, col)]);
      for (int i = col + 1; i <= last_row; ++i) {
        const double a = std::abs(ab_[idx(i, col)]);
        if (a > pmax) { pmax = a; p = i; }
      }
      piv_[static_cast<std::size_t>(col)] = p;
      if (pmax == 0.0) throw SolveError("banded matrix is singular");
      const int last_col = std::min(n_ - 1, col + kv);
      if (p != col)
        for (int j = col; j <= last_col; ++j)
          std::swap(ab_[idx(p, j)], ab_[idx(col, j)]);
      const double pivot = ab_[idx(col, col)];
      for (int i = col + 1; i <= last_row; ++i) {
        const double m = ab_[idx(i, col)] / pivot;
        ab_[idx(i, col)] = m;
        for (int j = col + 1; j <= last_col; ++j)
          ab_[idx(i, j)] -= m * ab_[idx(col, j)];
      }
    }
  }

  void solve(std::vector<double>& b) const {
    if (!factored_ || b.size() != static_cast<std::size_t>(n_))
      throw ConfigError("banded solve before factor() or bad rhs size");
    for (int col = 0; col < n_; ++col) {
      const int p = piv_[static_cast<std::size_t>(col)];
      if (p != col) std::swap(b[static_cast<std::size_t>(p)],
                              b[static_cast<std::size_t>(col)]);
      const int last_row = std::min(n_ - 1, col + kl_);
      for (int i = col + 1; i <= last_row; ++i)
        b[static_cast<std::size_t>(i)] -=
            ab_[idx(i, col)] * b[static_cast<std::size_t>(col)];
    }
    const int kv = kl_ + ku_;
    for (int i = n_ - 1; i >= 0; --i) {
      const int last_col = std::min(n_ - 1, i + kv);
      double s = b[static_cast<std::size_t>(i)];
      for (int j = i + 1; j <= last_col; ++j)
        s -= ab_[idx(i, j)] * b[static_cast<std::size_t>(j)];
      b[static_cast<std::size_t>(i)] = s / ab_[idx(i, i)];
    }
  }

  int size() const { return n_; }

 private:
  // Column-major band storage: A(i, j) lives at row kl + ku + i - j of
  // column j; rows 0..kl-1 hold elimination fill-in.
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(j) * ldab_ +
           static_cast<std::size_t>(kl_ + ku_ + i - j);
  }

  int n_, kl_, ku_, ldab_;
  std::vector<double> ab_;
  std::vector<int> piv_;
  bool factored_ = false;
};

}  // namespace bdtaxis
