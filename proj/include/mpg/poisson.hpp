#pragma once

/**
 * @file poisson.hpp
 * @brief Discrete Poisson solution operator P and the weak norm it induces.
 *
 * Nodal P1 discretization with lumped mass M = diag(h/2, h, ..., h/2) and
 * stiffness K = (1/h) tridiag(-1, 2, -1) with halved end rows, which is the
 * ghost-node treatment of a zero-flux end.
 *
 * MixedBC: K u = M f on free nodes, u = 0 at every far (Dirichlet) node.
 * NeumannAverage: -u'' = f - <f> with zero flux at both ends and <u> = <f>.
 */

#include <cmath>
#include <numeric>
#include <span>

#include "mpg/errors.hpp"
#include "mpg/geometry.hpp"
#include "mpg/numerics.hpp"

namespace mpg {

enum class PoissonVariant { MixedBC, NeumannAverage };

/// Stiffness matrix with zero-flux ends (no Dirichlet rows applied).
inline Tridiagonal stiffness_matrix(const Grid1D& grid) {
  const std::size_t n = grid.nodes();
  Tridiagonal k(n);
  const double inv_h = 1.0 / grid.h;
  for (std::size_t i = 0; i < n; ++i) {
    k.diag[i] = (i == 0 || i + 1 == n) ? inv_h : 2.0 * inv_h;
    if (i > 0) k.lower[i] = -inv_h;
    if (i + 1 < n) k.upper[i] = -inv_h;
  }
  return k;
}

inline Field lumped_mass(const Grid1D& grid) {
  Field m(grid.nodes());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = grid.mass(i);
  return m;
}

/// Trapezoidal (f, g).
inline double mass_inner(const Grid1D& grid, std::span<const double> f, std::span<const double> g) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += grid.mass(i) * f[i] * g[i];
  return s;
}

/// Exact integral of grad f . grad g for the piecewise-linear interpolants.
inline double stiffness_inner(const Grid1D& grid, std::span<const double> f, std::span<const double> g) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < f.size(); ++k) s += (f[k + 1] - f[k]) * (g[k + 1] - g[k]);
  return s / grid.h;
}

inline double mean_value(const Grid1D& grid, std::span<const double> f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += grid.mass(i) * f[i];
  return s;  // |Omega| = 1
}

class PoissonOperator {
 public:
  explicit PoissonOperator(Grid1D grid)
      : PoissonOperator(grid, grid.no_far_flag ? PoissonVariant::NeumannAverage : PoissonVariant::MixedBC) {}

  PoissonOperator(Grid1D grid, PoissonVariant variant) : grid_(std::move(grid)), variant_(variant) {
    if (variant_ == PoissonVariant::MixedBC && grid_.no_far_flag)
      throw RegimeError("mixed Poisson operator needs a far (Dirichlet) boundary");
    Tridiagonal k = stiffness_matrix(grid_);
    if (variant_ == PoissonVariant::MixedBC) {
      for (std::size_t i = 0; i < grid_.nodes(); ++i)
        if (grid_.dirichlet(i)) pin(k, i);
    } else {
      // Zero-mean data make the Neumann system compatible; pinning one node
      // selects a solution, the mean constraint is restored afterwards.
      pin(k, 0);
    }
    lu_ = TridiagonalLU(k);
  }

  const Grid1D& grid() const { return grid_; }
  PoissonVariant variant() const { return variant_; }

  Field apply(std::span<const double> f) const {
    if (f.size() != grid_.nodes()) throw ConfigError("Poisson operator: field size does not match the grid");
    if (!all_finite(f)) throw NonfiniteField("Poisson operator: non-finite data");
    const std::size_t n = grid_.nodes();
    Field rhs(n);
    if (variant_ == PoissonVariant::MixedBC) {
      for (std::size_t i = 0; i < n; ++i) rhs[i] = grid_.dirichlet(i) ? 0.0 : grid_.mass(i) * f[i];
      return lu_.solve(rhs);
    }
    const double fbar = mean_value(grid_, f);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = grid_.mass(i) * (f[i] - fbar);
    rhs[0] = 0.0;
    Field u = lu_.solve(rhs);
    const double shift = fbar - mean_value(grid_, u);
    for (double& v : u) v += shift;
    return u;
  }

  /// (Pf, g) for MixedBC; int grad Pf . grad Pg + |Omega| <Pf><Pg> for NeumannAverage.
  double weak_inner(std::span<const double> f, std::span<const double> g) const {
    const Field pf = apply(f);
    if (variant_ == PoissonVariant::MixedBC) return mass_inner(grid_, pf, g);
    const Field pg = apply(g);
    return stiffness_inner(grid_, pf, pg) + mean_value(grid_, pf) * mean_value(grid_, pg);
  }

  double weak_norm_squared(std::span<const double> f) const { return weak_inner(f, f); }
  double weak_norm(std::span<const double> f) const { return std::sqrt(std::max(0.0, weak_norm_squared(f))); }

 private:
  static void pin(Tridiagonal& k, std::size_t i) {
    k.pin_row(i);
    // Keep the matrix symmetric: the pinned unknown is zero, so its column drops out.
    if (i > 0) k.upper[i - 1] = 0.0;
    if (i + 1 < k.size()) k.lower[i + 1] = 0.0;
  }

  Grid1D grid_;
  PoissonVariant variant_;
  TridiagonalLU lu_;
};

struct PoincareEstimate {
  double constant = 0.0;
  int iterations = 0;
};

/// Discrete best Poincare constant for fields vanishing on the far boundary:
/// sqrt of the largest eigenvalue of the M-self-adjoint operator P, by power
/// iteration with a Rayleigh quotient stopping test.
inline PoincareEstimate poincare_constant(const Grid1D& grid, double rel_tol = 1e-15, int max_iter = 10000) {
  if (grid.no_far_flag) throw RegimeError("Poincare constant needs a far boundary");
  const PoissonOperator op(grid, PoissonVariant::MixedBC);
  Field v(grid.nodes(), 1.0);
  double lambda = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Field w = op.apply(v);
    const double next = mass_inner(grid, w, v) / mass_inner(grid, v, v);
    const double norm = std::sqrt(mass_inner(grid, w, w));
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / norm;
    if (std::abs(next - lambda) <= rel_tol * next) return {std::sqrt(next), it};
    lambda = next;
  }
  return {std::sqrt(lambda), max_iter};
}

}  // namespace mpg
