#pragma once

// Small dense-free numerical kernels shared by every module: tridiagonal
// solves, adaptive quadrature, cached antiderivative tables and a bracketed
// scalar root finder.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "mpg/errors.hpp"

namespace mpg {

using Field = std::vector<double>;
using ScalarFn = std::function<double(double)>;

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }
inline double negative_part(double x) { return x < 0.0 ? -x : 0.0; }

/// Tridiagonal matrix stored by diagonals. Row i reads
/// lower[i]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1]; lower[0] and upper[n-1] are unused.
struct Tridiagonal {
  Field lower, diag, upper;

  explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}

  std::size_t size() const { return diag.size(); }

  Field apply(std::span<const double> x) const {
    const std::size_t n = size();
    Field y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += lower[i] * x[i - 1];
      if (i + 1 < n) s += upper[i] * x[i + 1];
      y[i] = s;
    }
    return y;
  }

  /// Replace row i by the identity row x[i] = rhs (caller sets the rhs).
  void pin_row(std::size_t i) {
    lower[i] = 0.0;
    upper[i] = 0.0;
    diag[i] = 1.0;
  }
};

/// LU factorization of a tridiagonal matrix without pivoting (Thomas algorithm).
/// Valid for the diagonally dominant and symmetric positive definite systems
/// assembled in this library.
class TridiagonalLU {
 public:
  TridiagonalLU() = default;
  explicit TridiagonalLU(const Tridiagonal& a) : lower_(a.lower), upper_(a.upper), pivot_(a.size()) {
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
      double p = a.diag[i];
      if (i > 0) p -= lower_[i] * upper_[i - 1] / pivot_[i - 1];
      if (!(std::abs(p) > 0.0) || !std::isfinite(p)) throw SolveError("singular tridiagonal pivot at row " + std::to_string(i));
      pivot_[i] = p;
    }
  }

  std::size_t size() const { return pivot_.size(); }

  Field solve(std::span<const double> rhs) const {
    const std::size_t n = size();
    Field y(rhs.begin(), rhs.end());
    for (std::size_t i = 1; i < n; ++i) y[i] -= lower_[i] / pivot_[i - 1] * y[i - 1];
    for (std::size_t k = n; k-- > 0;) {
      if (k + 1 < n) y[k] -= upper_[k] * y[k + 1];
      y[k] /= pivot_[k];
    }
    return y;
  }

 private:
  Field lower_, upper_, pivot_;
};

inline Field solve_tridiagonal(const Tridiagonal& a, std::span<const double> rhs) {
  return TridiagonalLU(a).solve(rhs);
}

namespace detail {

inline double simpson_recurse(const ScalarFn& f, double a, double b, double fa, double fm, double fb,
                              double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] (b < a gives the signed integral).
/// The error target is max(abs_tol, rel_tol * |coarse estimate|).
inline double integrate(const ScalarFn& f, double a, double b, double abs_tol = 1e-13, double rel_tol = 1e-13,
                        int max_depth = 40) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, abs_tol, rel_tol, max_depth);
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = std::max(abs_tol, rel_tol * std::abs(whole));
  return detail::simpson_recurse(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Antiderivative F(x) = anchor_value + \int_anchor^x f, tabulated once on a
/// sorted node set and interpolated with cubic Hermite polynomials whose
/// slopes are the integrand values at the nodes. Arguments outside the table
/// are integrated on the fly from the nearest table end.
class CumulativeIntegral {
 public:
  CumulativeIntegral() = default;

  /// `nodes` must be strictly increasing and contain `anchor`.
  /// With `monotone` the Hermite slopes are limited (Fritsch-Carlson) so the
  /// interpolant inherits the monotonicity of the tabulated values.
  CumulativeIntegral(ScalarFn integrand, std::vector<double> nodes, double anchor, bool monotone,
                     double abs_tol = 1e-14)
      : f_(std::move(integrand)), x_(std::move(nodes)), tol_(abs_tol) {
    const std::size_t n = x_.size();
    if (n < 2) throw ConstructionError("antiderivative table needs at least two nodes");
    auto it = std::lower_bound(x_.begin(), x_.end(), anchor);
    if (it == x_.end() || *it != anchor) throw ConstructionError("antiderivative anchor must be a table node");
    const std::size_t a = static_cast<std::size_t>(it - x_.begin());
    y_.assign(n, 0.0);
    m_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m_[i] = f_(x_[i]);
    for (std::size_t i = a + 1; i < n; ++i) y_[i] = y_[i - 1] + integrate(f_, x_[i - 1], x_[i], tol_);
    for (std::size_t i = a; i-- > 0;) y_[i] = y_[i + 1] - integrate(f_, x_[i], x_[i + 1], tol_);
    if (monotone) limit_slopes();
  }

  double operator()(double x) const {
    if (x < x_.front()) return y_.front() - integrate(f_, x, x_.front(), tol_);
    if (x > x_.back()) return y_.back() + integrate(f_, x_.back(), x, tol_);
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t k = it == x_.end() ? x_.size() - 2 : static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[k] + (t3 - 2 * t2 + t) * h * m_[k] + (-2 * t3 + 3 * t2) * y_[k + 1] +
           (t3 - t2) * h * m_[k + 1];
  }

  double lower() const { return x_.front(); }
  double upper() const { return x_.back(); }

 private:
  void limit_slopes() {
    for (std::size_t k = 0; k + 1 < x_.size(); ++k) {
      const double secant = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);
      if (secant == 0.0) {
        m_[k] = m_[k + 1] = 0.0;
        continue;
      }
      double alpha = m_[k] / secant, beta = m_[k + 1] / secant;
      if (alpha < 0.0) m_[k] = alpha = 0.0;
      if (beta < 0.0) m_[k + 1] = beta = 0.0;
      const double r = alpha * alpha + beta * beta;
      if (r > 9.0) {
        const double tau = 3.0 / std::sqrt(r);
        m_[k] = tau * alpha * secant;
        m_[k + 1] = tau * beta * secant;
      }
    }
  }

  ScalarFn f_;
  std::vector<double> x_, y_, m_;
  double tol_ = 1e-14;
};

/// Root of an increasing function g on [lo, hi] with g(lo) <= 0 <= g(hi).
/// Newton steps are taken when they stay inside the bracket, bisection
/// otherwise; iteration stops when the bracket or the step reaches
/// floating-point resolution.
inline double bracketed_root(const ScalarFn& g, const ScalarFn& dg, double lo, double hi) {
  double glo = g(lo), ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    const double gx = g(x);
    if (gx == 0.0) return x;
    if (gx < 0.0) lo = x; else hi = x;
    const double d = dg(x);
    double next = (d > 0.0 && std::isfinite(d)) ? x - gx / d : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double scale = std::max({std::abs(lo), std::abs(hi), std::numeric_limits<double>::min()});
    if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * scale ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * scale) {
      return std::abs(g(next)) < std::abs(gx) ? next : x;
    }
    x = next;
  }
  return x;
}

}  // namespace mpg
