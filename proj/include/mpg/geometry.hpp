#pragma once

// Uniform grid on [0,1] with boundary roles, the prescribed tumor/host
// interface S(t), and the cell/node masks that split the source terms.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mpg/errors.hpp"
#include "mpg/numerics.hpp"

namespace mpg {

/// Blood-vessel boundary: Robin exchange -D dc/dn = eta (c - c_b), zero cell flux.
struct Vascular {
  double eta;
  double c_b;
};

/// Boundary far from the vasculature: phi = phi_star, c = c_b.
struct Far {
  double phi_star;
  double c_b;
};

using BoundaryRole = std::variant<Vascular, Far>;

inline bool is_far(const BoundaryRole& r) { return std::holds_alternative<Far>(r); }

struct Grid1D {
  int n_cells = 0;
  double h = 0.0;
  BoundaryRole left = Vascular{1.0, 1.0};
  BoundaryRole right = Far{0.5, 1.0};
  bool no_far_flag = false;

  std::size_t nodes() const { return static_cast<std::size_t>(n_cells) + 1; }
  /// x_i = i / n, exact at both ends.
  double x(std::size_t i) const { return static_cast<double>(i) / n_cells; }
  std::vector<double> coordinates() const {
    std::vector<double> xs(nodes());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = x(i);
    return xs;
  }
  const BoundaryRole& role(std::size_t end) const { return end == 0 ? left : right; }
  /// Node index of boundary end 0 (left) or 1 (right).
  std::size_t boundary_node(std::size_t end) const { return end == 0 ? 0 : nodes() - 1; }
  bool dirichlet(std::size_t node) const {
    return (node == 0 && is_far(left)) || (node + 1 == nodes() && is_far(right));
  }
  /// Lumped mass (trapezoidal weights) of node i.
  double mass(std::size_t i) const { return (i == 0 || i + 1 == nodes()) ? 0.5 * h : h; }
};

inline void check_role(const BoundaryRole& r, const char* side) {
  const std::string s(side);
  if (const auto* v = std::get_if<Vascular>(&r)) {
    if (!(v->eta > 0.0)) throw ConfigError(s + " vascular boundary requires eta > 0");
    if (!(v->c_b > 0.0)) throw ConfigError(s + " vascular boundary requires c_b > 0");
  } else {
    const auto& f = std::get<Far>(r);
    if (!(f.phi_star > 0.0 && f.phi_star < 1.0)) throw ConfigError(s + " far boundary requires phi_star in (0,1)");
    if (!(f.c_b > 0.0)) throw ConfigError(s + " far boundary requires c_b > 0");
  }
}

inline Grid1D build_grid(int n_cells, BoundaryRole left = Vascular{1.0, 1.0}, BoundaryRole right = Far{0.5, 1.0}) {
  if (n_cells < 4) throw ConfigError("grid needs n_cells >= 4, got " + std::to_string(n_cells));
  check_role(left, "left");
  check_role(right, "right");
  Grid1D g;
  g.n_cells = n_cells;
  g.h = 1.0 / n_cells;
  g.left = left;
  g.right = right;
  g.no_far_flag = !is_far(left) && !is_far(right);
  return g;
}

/// Prescribed tumor region [tumor_left, S(t)]. S(t) is piecewise linear in a
/// (t, S) table and constant beyond its ends; a single entry means constant S.
/// The canonical configuration has tumor_left = 0; an interior region models
/// a tumor surrounded by host tissue.
class InterfaceTrajectory {
 public:
  static InterfaceTrajectory constant(double s, double tumor_left = 0.0) { return table({0.0}, {s}, tumor_left); }

  static InterfaceTrajectory table(std::vector<double> times, std::vector<double> values, double tumor_left = 0.0) {
    if (times.empty() || times.size() != values.size())
      throw ConfigError("interface table needs matching, nonempty time and position lists");
    for (std::size_t k = 1; k < times.size(); ++k)
      if (!(times[k] > times[k - 1])) throw ConfigError("interface table times must be strictly increasing");
    if (!(tumor_left >= 0.0 && tumor_left <= 1.0)) throw ConfigError("tumor_left must lie in [0,1]");
    for (double s : values)
      if (!(s >= tumor_left && s <= 1.0)) throw ConfigError("interface positions must lie in [tumor_left, 1]");
    InterfaceTrajectory tr;
    tr.t_ = std::move(times);
    tr.s_ = std::move(values);
    tr.left_ = tumor_left;
    return tr;
  }

  double s_at(double t) const {
    if (t <= t_.front()) return s_.front();
    if (t >= t_.back()) return s_.back();
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - t_.begin()) - 1;
    const double w = (t - t_[k]) / (t_[k + 1] - t_[k]);
    return (1.0 - w) * s_[k] + w * s_[k + 1];
  }

  double tumor_left() const { return left_; }
  bool is_constant() const { return t_.size() == 1; }
  const std::vector<double>& times() const { return t_; }
  const std::vector<double>& positions() const { return s_; }

 private:
  std::vector<double> t_{0.0}, s_{0.0};
  double left_ = 0.0;
};

/// Tumor weights in [0,1]; the host weight is the complement.
struct SubdomainMask {
  std::vector<double> cell_tumor;  ///< length fraction of each cell inside the tumor region
  std::vector<double> node_tumor;  ///< same for each node's dual control volume

  double cell_host(std::size_t k) const { return 1.0 - cell_tumor[k]; }
  double node_host(std::size_t i) const { return 1.0 - node_tumor[i]; }
};

namespace detail {

inline double overlap(double a, double b, double lo, double hi) { return std::max(0.0, std::min(b, hi) - std::max(a, lo)); }

}  // namespace detail

inline SubdomainMask mask_for_region(const Grid1D& grid, double lo, double hi) {
  SubdomainMask m;
  m.cell_tumor.resize(static_cast<std::size_t>(grid.n_cells));
  for (std::size_t k = 0; k < m.cell_tumor.size(); ++k) {
    const double a = grid.x(k), b = grid.x(k + 1);
    m.cell_tumor[k] = std::clamp(detail::overlap(a, b, lo, hi) / (b - a), 0.0, 1.0);
  }
  m.node_tumor.resize(grid.nodes());
  for (std::size_t i = 0; i < m.node_tumor.size(); ++i) {
    const double a = std::max(0.0, grid.x(i) - 0.5 * grid.h), b = std::min(1.0, grid.x(i) + 0.5 * grid.h);
    m.node_tumor[i] = std::clamp(detail::overlap(a, b, lo, hi) / (b - a), 0.0, 1.0);
  }
  return m;
}

inline SubdomainMask mask_at(const InterfaceTrajectory& traj, const Grid1D& grid, double t) {
  return mask_for_region(grid, traj.tumor_left(), traj.s_at(t));
}

}  // namespace mpg
