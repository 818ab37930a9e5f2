#pragma once

/**
 * @file evolution.hpp
 * @brief Time-dependent cell/nutrient system on [0,1].
 *
 *   phi_t - kappa_m (Phi(phi))_xx = Gamma(x, phi, c)
 *   c_t   - D c_xx               = Q(x, phi, c)
 *
 * Vascular ends: zero flux for Phi(phi) and D c_x = eta (c - c_b) in the
 * outward-normal sense. Far ends: phi = phi_star, c = c_b.
 *
 * Backward Euler in time, lumped P1 in space. Each step alternates a Newton
 * solve for phi (c frozen) and a Newton solve for c (phi frozen) until the
 * coupled residual drops below the tolerance.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mpg/analysis.hpp"
#include "mpg/constitutive.hpp"
#include "mpg/errors.hpp"
#include "mpg/geometry.hpp"
#include "mpg/kinetics.hpp"
#include "mpg/numerics.hpp"
#include "mpg/poisson.hpp"

namespace mpg {

using SpaceTimeFn = std::function<double(double t, double x)>;
using TimeFn = std::function<double(double t)>;

/// Extra source terms, used for manufactured solutions.
struct Forcing {
  SpaceTimeFn phi_source;  ///< added to Gamma
  SpaceTimeFn c_source;    ///< added to Q
  /// When set, the kinetics evaluated at these fields are subtracted from the
  /// sources with the same nodal weights the scheme uses.
  SpaceTimeFn cancel_phi, cancel_c;
  /// Point sources at the left/right boundary node, added to the right-hand side.
  std::array<TimeFn, 2> phi_boundary, c_boundary;
};

struct SolverOptions {
  double tol = 1e-10;
  int max_picard = 50;
  int max_newton = 50;
  double dt_min = 1e-12;
  double jacobian_floor = 1e-12;
};

struct EvolutionProblem {
  Grid1D grid = build_grid(16);
  ConstitutivePair pair = build_pair(PowerAdhesive(1.0, 0.5));
  KineticsSpec spec;
  InterfaceTrajectory traj = InterfaceTrajectory::constant(0.5);
  double kappa_m = 1.0;
  double D = 1.0;
  Field phi0, c0;
  double t_max = 1.0;
  double dt = 1e-3;
  SolverOptions solver;
  int snapshot_every = 0;  ///< 0 keeps only the first and last state
  std::optional<Forcing> forcing;
};

/// phi_star of the far boundary, or NaN when there is none.
inline double far_phi_star(const Grid1D& g) {
  for (std::size_t e = 0; e < 2; ++e)
    if (const auto* f = std::get_if<Far>(&g.role(e))) return f->phi_star;
  return std::numeric_limits<double>::quiet_NaN();
}

inline double boundary_c_b(const Grid1D& g, std::size_t end) {
  return std::visit([](const auto& r) { return r.c_b; }, g.role(end));
}

inline double max_c_b(const Grid1D& g) { return std::max(boundary_c_b(g, 0), boundary_c_b(g, 1)); }

/// Collects every violated precondition, including (H8) on the initial data.
inline std::vector<std::string> problem_issues(const EvolutionProblem& p) {
  std::vector<std::string> issues;
  const std::size_t n = p.grid.nodes();
  if (!(p.kappa_m > 0.0)) issues.push_back("kappa_m must be positive");
  if (!(p.D > 0.0)) issues.push_back("D must be positive");
  if (!(p.dt > 0.0)) issues.push_back("dt must be positive");
  if (!(p.t_max > 0.0)) issues.push_back("t_max must be positive");
  if (p.phi0.size() != n || p.c0.size() != n) {
    issues.push_back("initial fields must have one value per node (" + std::to_string(n) + ")");
    return issues;
  }
  const double pm = p.spec.phi_max, cb = max_c_b(p.grid);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p.phi0[i] >= 0.0 && p.phi0[i] <= pm)) {
      issues.push_back("(H8) phi0 outside [0, phi_max] at node " + std::to_string(i));
      break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p.c0[i] >= 0.0 && p.c0[i] <= cb)) {
      issues.push_back("(H8) c0 outside [0, c_b] at node " + std::to_string(i));
      break;
    }
  }
  const double ps = far_phi_star(p.grid);
  if (std::isfinite(ps) && ps > pm) issues.push_back("phi_star exceeds phi_max");
  if (std::isfinite(ps) && !p.pair.in_domain(ps)) issues.push_back("phi_star outside the domain of Phi");
  return issues;
}

inline void validate_problem(const EvolutionProblem& p) {
  if (auto issues = problem_issues(p); !issues.empty()) throw ValidationError(std::move(issues));
}

struct StepStats {
  int newton_iterations = 0;
  int picard_sweeps = 0;
  int substeps = 0;
  double residual = 0.0;
};

namespace detail {

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double sum_squares(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

/// Damped Newton with backtracking on the squared residual. `residual`
/// returns per-node residuals already scaled to field units and may return an
/// empty vector to mark an inadmissible iterate.
template <class Residual, class Jacobian>
int newton_solve(Field& x, Residual&& residual, Jacobian&& jacobian, double tol, int max_it, const char* what) {
  Field r = residual(x);
  if (r.empty()) throw NewtonDivergence(std::string(what) + ": initial iterate is inadmissible");
  const double inner = 0.1 * tol;
  for (int it = 0; it < max_it; ++it) {
    const double rmax = max_abs(r);
    if (!std::isfinite(rmax)) throw NonfiniteField(std::string(what) + ": non-finite residual");
    if (rmax <= inner) return it;
    Field rhs(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) rhs[i] = -r[i];
    const Field d = TridiagonalLU(jacobian(x)).solve(rhs);
    const double merit = sum_squares(r);
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      Field trial(x);
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] += alpha * d[i];
      Field rt = residual(trial);
      if (!rt.empty() && all_finite(rt) && sum_squares(rt) <= (1.0 - 1e-4 * alpha) * merit) {
        x = std::move(trial);
        r = std::move(rt);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (rmax <= tol) return it;
      throw NewtonDivergence(std::string(what) + ": line search failed at residual " + std::to_string(rmax));
    }
  }
  if (max_abs(r) <= tol) return max_it;
  throw NewtonDivergence(std::string(what) + ": no convergence in " + std::to_string(max_it) + " iterations");
}

/// Everything a single backward-Euler step needs, assembled once per step.
struct StepContext {
  const EvolutionProblem& p;
  double t_new, dt;
  SubdomainMask mask;
  std::vector<double> x, mass;
  Field f_phi, f_c;                 // nodal volumetric sources at t_new
  Field phi_exact, c_exact;         // kinetics cancellation points, if any
  std::array<double, 2> b_phi{}, b_c{};
  double phi_star;

  StepContext(const EvolutionProblem& prob, double t, double h)
      : p(prob), t_new(t), dt(h), mask(mask_at(prob.traj, prob.grid, t)), x(prob.grid.coordinates()),
        mass(lumped_mass(prob.grid)), phi_star(far_phi_star(prob.grid)) {
    const std::size_t n = x.size();
    f_phi.assign(n, 0.0);
    f_c.assign(n, 0.0);
    if (!p.forcing) return;
    const auto& f = *p.forcing;
    for (std::size_t i = 0; i < n; ++i) {
      if (f.phi_source) f_phi[i] = f.phi_source(t, x[i]);
      if (f.c_source) f_c[i] = f.c_source(t, x[i]);
    }
    if (f.cancel_phi && f.cancel_c) {
      for (std::size_t i = 0; i < n; ++i) {
        const double pe = f.cancel_phi(t, x[i]), ce = f.cancel_c(t, x[i]);
        f_phi[i] -= gamma_at(i, pe, ce);
        f_c[i] -= q_at(i, pe, ce);
      }
    }
    for (std::size_t e = 0; e < 2; ++e) {
      if (f.phi_boundary[e]) b_phi[e] = f.phi_boundary[e](t);
      if (f.c_boundary[e]) b_c[e] = f.c_boundary[e](t);
    }
  }

  double gamma_at(std::size_t i, double phi, double c) const {
    const double w = mask.node_tumor[i];
    double g = 0.0;
    if (w > 0.0) g += w * gamma_eval(p.spec, Population::Tumor, phi, c);
    if (w < 1.0) g += (1.0 - w) * gamma_eval(p.spec, Population::Host, phi, c);
    return g;
  }
  double q_at(std::size_t i, double phi, double c) const {
    const double w = mask.node_tumor[i];
    double q = 0.0;
    if (w > 0.0) q += w * q_absorption_eval(p.spec, Population::Tumor, phi, c);
    if (w < 1.0) q += (1.0 - w) * q_absorption_eval(p.spec, Population::Host, phi, c);
    return q;
  }
  double boundary_source(const std::array<double, 2>& b, std::size_t i) const {
    double s = 0.0;
    if (i == 0) s += b[0];
    if (i + 1 == x.size()) s += b[1];
    return s;
  }
  /// Robin coefficient and boundary value at node i (zero away from vascular ends).
  std::pair<double, double> robin(std::size_t i) const {
    double eta = 0.0, cb = 0.0;
    for (std::size_t e = 0; e < 2; ++e) {
      if (p.grid.boundary_node(e) != i) continue;
      if (const auto* v = std::get_if<Vascular>(&p.grid.role(e))) {
        eta += v->eta;
        cb = v->c_b;
      }
    }
    return {eta, cb};
  }

  /// Scaled phi residual; empty when phi leaves the domain of Phi.
  Field phi_residual(const Field& phi, const Field& phi_old, const Field& c) const {
    const std::size_t n = phi.size();
    Field u(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!p.pair.in_domain(phi[i])) return {};
      u[i] = p.pair.phi(phi[i]);
    }
    const double inv_h = 1.0 / p.grid.h;
    Field r(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (p.grid.dirichlet(i)) {
        r[i] = phi[i] - phi_star;
        continue;
      }
      double ku = 0.0;
      if (i > 0) ku += (u[i] - u[i - 1]) * inv_h;
      if (i + 1 < n) ku += (u[i] - u[i + 1]) * inv_h;
      const double src = mass[i] * (gamma_at(i, phi[i], c[i]) + f_phi[i]) + boundary_source(b_phi, i);
      r[i] = (phi[i] - phi_old[i]) + dt * (p.kappa_m * ku - src) / mass[i];
    }
    return r;
  }

  Tridiagonal phi_jacobian(const Field& phi, const Field& c) const {
    const std::size_t n = phi.size();
    Tridiagonal j(n);
    Field dphi(n);
    for (std::size_t i = 0; i < n; ++i) dphi[i] = std::max(p.pair.phi_prime(phi[i]), p.solver.jacobian_floor);
    const double inv_h = 1.0 / p.grid.h;
    for (std::size_t i = 0; i < n; ++i) {
      if (p.grid.dirichlet(i)) {
        j.pin_row(i);
        continue;
      }
      const double s = dt * p.kappa_m * inv_h / mass[i];
      const double eps = 1e-7 * std::max(1.0, std::abs(phi[i]));
      const double dg = (gamma_at(i, phi[i] + eps, c[i]) - gamma_at(i, phi[i] - eps, c[i])) / (2.0 * eps);
      double diag = 1.0 - dt * dg;
      if (i > 0) {
        diag += s * dphi[i];
        j.lower[i] = -s * dphi[i - 1];
      }
      if (i + 1 < n) {
        diag += s * dphi[i];
        j.upper[i] = -s * dphi[i + 1];
      }
      j.diag[i] = diag;
    }
    return j;
  }

  Field c_residual(const Field& c, const Field& c_old, const Field& phi) const {
    const std::size_t n = c.size();
    const double inv_h = 1.0 / p.grid.h;
    Field r(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (p.grid.dirichlet(i)) {
        r[i] = c[i] - boundary_c_b(p.grid, i == 0 ? 0 : 1);
        continue;
      }
      double kc = 0.0;
      if (i > 0) kc += (c[i] - c[i - 1]) * inv_h;
      if (i + 1 < n) kc += (c[i] - c[i + 1]) * inv_h;
      const auto [eta, cb] = robin(i);
      const double src = mass[i] * (q_at(i, phi[i], c[i]) + f_c[i]) + boundary_source(b_c, i);
      r[i] = (c[i] - c_old[i]) + dt * (p.D * kc + eta * (c[i] - cb) - src) / mass[i];
    }
    return r;
  }

  Tridiagonal c_jacobian(const Field& c, const Field& phi) const {
    const std::size_t n = c.size();
    const double inv_h = 1.0 / p.grid.h;
    Tridiagonal j(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (p.grid.dirichlet(i)) {
        j.pin_row(i);
        continue;
      }
      const double s = dt * p.D * inv_h / mass[i];
      const double eps = 1e-7 * std::max(1.0, std::abs(c[i]));
      const double dq = (q_at(i, phi[i], c[i] + eps) - q_at(i, phi[i], c[i] - eps)) / (2.0 * eps);
      double diag = 1.0 - dt * dq + dt * robin(i).first / mass[i];
      if (i > 0) {
        diag += s;
        j.lower[i] = -s;
      }
      if (i + 1 < n) {
        diag += s;
        j.upper[i] = -s;
      }
      j.diag[i] = diag;
    }
    return j;
  }
};

}  // namespace detail

struct FieldPair {
  Field phi, c;
};

/// One backward-Euler step of size dt from (phi_old, c_old) at time t.
/// Throws NewtonDivergence or NonfiniteField; the caller decides whether to retry.
inline FieldPair step(const EvolutionProblem& p, const Field& phi_old, const Field& c_old, double t, double dt,
                      StepStats* stats = nullptr) {
  if (!all_finite(phi_old) || !all_finite(c_old)) throw NonfiniteField("step: non-finite input fields");
  const detail::StepContext ctx(p, t + dt, dt);
  const double tol = p.solver.tol;
  FieldPair out{phi_old, c_old};
  for (std::size_t i = 0; i < out.phi.size(); ++i) {
    if (p.grid.dirichlet(i)) {
      out.phi[i] = ctx.phi_star;
      out.c[i] = boundary_c_b(p.grid, i == 0 ? 0 : 1);
    }
  }
  int newton = 0;
  for (int sweep = 1; sweep <= p.solver.max_picard; ++sweep) {
    const Field c_lag = out.c;
    newton += detail::newton_solve(
        out.phi, [&](const Field& f) { return ctx.phi_residual(f, phi_old, c_lag); },
        [&](const Field& f) { return ctx.phi_jacobian(f, c_lag); }, tol, p.solver.max_newton, "phi solve");
    const Field phi_now = out.phi;
    newton += detail::newton_solve(
        out.c, [&](const Field& f) { return ctx.c_residual(f, c_old, phi_now); },
        [&](const Field& f) { return ctx.c_jacobian(f, phi_now); }, tol, p.solver.max_newton, "c solve");
    const Field rp = ctx.phi_residual(out.phi, phi_old, out.c);
    const Field rc = ctx.c_residual(out.c, c_old, out.phi);
    const double res = rp.empty() ? HUGE_VAL : std::max(detail::max_abs(rp), detail::max_abs(rc));
    if (res <= tol) {
      if (!all_finite(out.phi) || !all_finite(out.c)) throw NonfiniteField("step produced non-finite fields");
      if (stats) {
        stats->newton_iterations += newton;
        stats->picard_sweeps += sweep;
        stats->residual = std::max(stats->residual, res);
      }
      return out;
    }
  }
  throw NewtonDivergence("Picard coupling did not converge in " + std::to_string(p.solver.max_picard) + " sweeps");
}

/// Advances by dt_target, halving the substep after a failed solve and
/// doubling it again (up to dt_target) after each success.
inline FieldPair advance(const EvolutionProblem& p, const FieldPair& state, double t, double dt_target,
                         StepStats* stats = nullptr) {
  FieldPair cur = state;
  double done = 0.0, h = dt_target;
  while (done < dt_target) {
    const bool last = done + h >= dt_target * (1.0 - 1e-14);
    const double this_h = last ? dt_target - done : h;
    try {
      cur = step(p, cur.phi, cur.c, t + done, this_h, stats);
      if (stats) ++stats->substeps;
      done = last ? dt_target : done + this_h;
      h = std::min(2.0 * this_h, dt_target);
    } catch (const NewtonDivergence&) {
      h = 0.5 * this_h;
      if (h < p.solver.dt_min) throw;
    } catch (const NonfiniteField&) {
      h = 0.5 * this_h;
      if (h < p.solver.dt_min) throw;
    } catch (const SolveError&) {
      h = 0.5 * this_h;
      if (h < p.solver.dt_min) throw;
    }
  }
  return cur;
}

struct Snapshot {
  double t;
  Field phi, c;
};

struct AuditRecord {
  int step = 0;
  double t = 0.0, dt = 0.0;
  double phi_min = 0.0, phi_max = 0.0, c_min = 0.0, c_max = 0.0;
  double residual = 0.0;
  int newton_iterations = 0, picard_sweeps = 0, substeps = 0;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<AuditRecord> audit;
};

inline int step_count(const EvolutionProblem& p) {
  return std::max(1, static_cast<int>(std::ceil(p.t_max / p.dt - 1e-9)));
}

inline double step_time(const EvolutionProblem& p, int k) {
  return k == step_count(p) ? p.t_max : std::min(p.t_max, k * p.dt);
}

inline Trajectory run(const EvolutionProblem& p) {
  validate_problem(p);
  Trajectory tr;
  FieldPair state{p.phi0, p.c0};
  tr.snapshots.push_back({0.0, state.phi, state.c});
  const int n_steps = step_count(p);
  for (int k = 1; k <= n_steps; ++k) {
    const double t0 = step_time(p, k - 1), t1 = step_time(p, k);
    StepStats stats;
    state = advance(p, state, t0, t1 - t0, &stats);
    AuditRecord a;
    a.step = k;
    a.t = t1;
    a.dt = t1 - t0;
    const auto [pmin, pmax] = std::minmax_element(state.phi.begin(), state.phi.end());
    const auto [cmin, cmax] = std::minmax_element(state.c.begin(), state.c.end());
    a.phi_min = *pmin;
    a.phi_max = *pmax;
    a.c_min = *cmin;
    a.c_max = *cmax;
    a.residual = stats.residual;
    a.newton_iterations = stats.newton_iterations;
    a.picard_sweeps = stats.picard_sweeps;
    a.substeps = stats.substeps;
    tr.audit.push_back(a);
    if (k == n_steps || (p.snapshot_every > 0 && k % p.snapshot_every == 0)) tr.snapshots.push_back({t1, state.phi, state.c});
  }
  return tr;
}

/// Largest violation of 0 <= phi <= phi_max, 0 <= c <= c_b over an audit.
inline double max_bound_violation(const Trajectory& tr, double phi_max, double c_b) {
  double v = 0.0;
  for (const auto& a : tr.audit) {
    v = std::max({v, -a.phi_min, a.phi_max - phi_max, -a.c_min, a.c_max - c_b});
  }
  return v;
}

/// Random initial data satisfying (H8) and the far-boundary values. `smooth`
/// draws a few cosine modes; otherwise node values are independent uniforms.
inline FieldPair random_initial_data(const Grid1D& grid, double phi_max, std::uint64_t seed, bool smooth = true,
                                     double phi_cap = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const std::size_t n = grid.nodes();
  const double top = phi_cap * phi_max, cb = max_c_b(grid);
  FieldPair out{Field(n), Field(n)};
  auto fill = [&](Field& f, double hi) {
    if (!smooth) {
      for (double& v : f) v = hi * u01(rng);
      return;
    }
    std::array<double, 4> a{}, th{};
    const double base = u01(rng);
    for (std::size_t k = 0; k < a.size(); ++k) {
      a[k] = 0.3 * (u01(rng) - 0.5) / (k + 1);
      th[k] = 2.0 * std::numbers::pi * u01(rng);
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = base;
      for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * std::cos((k + 1) * std::numbers::pi * grid.x(i) + th[k]);
      f[i] = hi * std::clamp(s, 0.0, 1.0);
    }
  };
  fill(out.phi, top);
  fill(out.c, cb);
  for (std::size_t e = 0; e < 2; ++e) {
    if (const auto* f = std::get_if<Far>(&grid.role(e))) {
      out.phi[grid.boundary_node(e)] = f->phi_star;
      out.c[grid.boundary_node(e)] = f->c_b;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Continuous dependence on the initial data

struct DependenceReport {
  double epsilon = 0.0;
  double weak_phi = 0.0;       ///< int_0^T ||dphi||~^2 dt
  double phi_monotone = 0.0;   ///< int_0^T int (Phi(phi2) - Phi(phi1))(phi2 - phi1)
  double c_h1 = 0.0;           ///< int_0^T ||dc||_1^2 dt
  double c_trace = 0.0;        ///< int_0^T |dc|^2 on the vascular boundary
  double lhs = 0.0, rhs = 0.0;
  double ratio = 0.0;
  bool zero_over_zero = false;
  int steps = 0;
};

/// Default perturbation profile: a smooth bump, zero on Dirichlet nodes.
inline Field dependence_bump(const Grid1D& grid) {
  Field psi(grid.nodes());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double z = (grid.x(i) - 0.35) / 0.2;
    psi[i] = grid.dirichlet(i) ? 0.0 : std::exp(-z * z);
  }
  return psi;
}

/// Runs the solutions from (phi0, c0) and from the data perturbed by
/// epsilon * psi (clipped to the (H8) box) in lockstep and accumulates both
/// sides of the continuous-dependence estimate.
inline DependenceReport continuous_dependence_experiment(const EvolutionProblem& p, double epsilon,
                                                         std::optional<Field> psi = std::nullopt) {
  validate_problem(p);
  const Field bump = psi ? *psi : dependence_bump(p.grid);
  const std::size_t n = p.grid.nodes();
  const double cb = max_c_b(p.grid);
  FieldPair a{p.phi0, p.c0}, b{p.phi0, p.c0};
  for (std::size_t i = 0; i < n; ++i) {
    b.phi[i] = std::clamp(p.phi0[i] + epsilon * bump[i], 0.0, p.spec.phi_max);
    b.c[i] = std::clamp(p.c0[i] + epsilon * bump[i], 0.0, cb);
  }
  const NormSuite norms(p.grid);
  const PoissonOperator op(p.grid);
  auto diff = [n](const Field& x, const Field& y) {
    Field d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = y[i] - x[i];
    return d;
  };
  DependenceReport rep;
  rep.epsilon = epsilon;
  {
    const Field dp = diff(a.phi, b.phi), dc = diff(a.c, b.c);
    rep.rhs = mass_inner(p.grid, dp, dp) + mass_inner(p.grid, dc, dc);
  }
  const int n_steps = step_count(p);
  for (int k = 1; k <= n_steps; ++k) {
    const double t0 = step_time(p, k - 1), t1 = step_time(p, k), dt = t1 - t0;
    a = advance(p, a, t0, dt);
    b = advance(p, b, t0, dt);
    const Field dp = diff(a.phi, b.phi), dc = diff(a.c, b.c);
    Field du(n);
    for (std::size_t i = 0; i < n; ++i) du[i] = p.pair.phi(b.phi[i]) - p.pair.phi(a.phi[i]);
    rep.weak_phi += dt * op.weak_norm_squared(dp);
    rep.phi_monotone += dt * mass_inner(p.grid, du, dp);
    rep.c_h1 += dt * (mass_inner(p.grid, dc, dc) + stiffness_inner(p.grid, dc, dc));
    double trace = 0.0;
    for (std::size_t e = 0; e < 2; ++e)
      if (!is_far(p.grid.role(e))) trace += std::pow(norms.trace(dc, e), 2);
    rep.c_trace += dt * trace;
  }
  rep.steps = n_steps;
  rep.lhs = rep.weak_phi + rep.phi_monotone + rep.c_h1 + rep.c_trace;
  if (rep.rhs == 0.0 && rep.lhs == 0.0) {
    rep.zero_over_zero = true;
    rep.ratio = std::numeric_limits<double>::quiet_NaN();
  } else {
    rep.ratio = rep.lhs / rep.rhs;
  }
  return rep;
}

}  // namespace mpg
