#pragma once

// Discrete norms on the nodal grid and convergence-order regression.

#include <cmath>
#include <span>
#include <vector>

#include "mpg/errors.hpp"
#include "mpg/geometry.hpp"
#include "mpg/poisson.hpp"

namespace mpg {

class NormSuite {
 public:
  explicit NormSuite(const Grid1D& grid) : grid_(grid) {}

  double l2(std::span<const double> f) const { return std::sqrt(mass_inner(grid_, f, f)); }
  double h1_seminorm(std::span<const double> f) const { return std::sqrt(stiffness_inner(grid_, f, f)); }
  double h1(std::span<const double> f) const { return std::hypot(l2(f), h1_seminorm(f)); }
  /// |f| at the vascular end; in 1D the boundary measure is counting measure.
  double trace(std::span<const double> f, std::size_t end = 0) const {
    return std::abs(f[grid_.boundary_node(end)]);
  }
  double max_abs(std::span<const double> f) const {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
  }
  double weak(std::span<const double> f) const { return PoissonOperator(grid_).weak_norm(f); }

  const Grid1D& grid() const { return grid_; }

 private:
  Grid1D grid_;
};

/// Rectangle-rule time integral sum_k dt_k * value_k, matching backward Euler.
inline double time_integral(std::span<const double> dts, std::span<const double> values) {
  double s = 0.0;
  for (std::size_t k = 0; k < dts.size(); ++k) s += dts[k] * values[k];
  return s;
}

struct ErrorSample {
  double h;
  double error;
};

struct OrderFit {
  double order = 0.0;
  double r_squared = 0.0;
  double log_constant = 0.0;  ///< intercept of log e = log_constant + order * log h
};

/// Least-squares slope of log e against log h.
inline OrderFit convergence_order(std::span<const ErrorSample> samples) {
  if (samples.size() < 3) throw InsufficientData("convergence order needs at least three samples");
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (!(samples[k].error > 0.0) || !(samples[k].h > 0.0))
      throw InsufficientData("convergence order needs positive h and errors");
    if (k > 0 && !(samples[k].h < samples[k - 1].h)) throw InsufficientData("h must be strictly decreasing");
  }
  const double n = static_cast<double>(samples.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& s : samples) {
    const double x = std::log(s.h), y = std::log(s.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  OrderFit fit;
  fit.order = cxy / vx;
  fit.log_constant = (sy - fit.order * sx) / n;
  fit.r_squared = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  return fit;
}

inline OrderFit convergence_order(const std::vector<ErrorSample>& samples) {
  return convergence_order(std::span<const ErrorSample>(samples));
}

}  // namespace mpg
