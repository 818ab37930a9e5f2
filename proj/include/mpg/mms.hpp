#pragma once

// Manufactured-solution harness: turns closed-form fields into the extra
// sources that make them exact solutions of the evolution problem.

#include <cmath>
#include <string>

#include "mpg/evolution.hpp"

namespace mpg {

/// Exact fields with optional derivatives; missing derivatives are taken by
/// fourth-order central differences.
struct ExactSolution {
  SpaceTimeFn phi, c;
  SpaceTimeFn phi_t, phi_x, phi_xx;
  SpaceTimeFn c_t, c_x, c_xx;
};

namespace detail {

inline double fd1(const std::function<double(double)>& f, double x, double h) {
  return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}
inline double fd2(const std::function<double(double)>& f, double x, double h) {
  return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) / (12 * h * h);
}

inline SpaceTimeFn d_dt(const SpaceTimeFn& given, const SpaceTimeFn& f) {
  if (given) return given;
  return [f](double t, double x) { return fd1([&](double s) { return f(s, x); }, t, 1e-3); };
}
inline SpaceTimeFn d_dx(const SpaceTimeFn& given, const SpaceTimeFn& f) {
  if (given) return given;
  return [f](double t, double x) { return fd1([&](double s) { return f(t, s); }, x, 1e-3); };
}
inline SpaceTimeFn d_dxx(const SpaceTimeFn& given, const SpaceTimeFn& f) {
  if (given) return given;
  return [f](double t, double x) { return fd2([&](double s) { return f(t, s); }, x, 1e-3); };
}

}  // namespace detail

/// Returns `base` with initial data, volumetric sources and boundary sources
/// set so that `ex` solves it exactly. Throws RangeError when the exact fields
/// leave [0, phi_max] x [0, c_b] on the run horizon, ConfigError when they
/// disagree with far-boundary data.
inline EvolutionProblem mms_residual(const EvolutionProblem& base, const ExactSolution& ex) {
  EvolutionProblem p = base;
  const auto& grid = p.grid;
  const double pm = p.spec.phi_max, cb = max_c_b(grid);
  for (int a = 0; a <= 20; ++a) {
    const double t = p.t_max * a / 20.0;
    for (int b = 0; b <= 200; ++b) {
      const double x = b / 200.0;
      const double ph = ex.phi(t, x), c = ex.c(t, x);
      if (!(ph >= 0.0 && ph <= pm && c >= 0.0 && c <= cb))
        throw RangeError("exact fields leave the (H8) box near t = " + std::to_string(t) + ", x = " + std::to_string(x));
    }
  }
  for (std::size_t e = 0; e < 2; ++e) {
    if (const auto* f = std::get_if<Far>(&grid.role(e))) {
      const double xb = e == 0 ? 0.0 : 1.0;
      for (int a = 0; a <= 20; ++a) {
        const double t = p.t_max * a / 20.0;
        if (std::abs(ex.phi(t, xb) - f->phi_star) > 1e-12 || std::abs(ex.c(t, xb) - f->c_b) > 1e-12)
          throw ConfigError("exact fields must match the far-boundary values");
      }
    }
  }

  const auto phi_t = detail::d_dt(ex.phi_t, ex.phi), phi_x = detail::d_dx(ex.phi_x, ex.phi),
             phi_xx = detail::d_dxx(ex.phi_xx, ex.phi);
  const auto c_t = detail::d_dt(ex.c_t, ex.c), c_x = detail::d_dx(ex.c_x, ex.c), c_xx = detail::d_dxx(ex.c_xx, ex.c);
  const ConstitutivePair pair = p.pair;
  const double kappa = p.kappa_m, D = p.D;
  // (Phi(phi))_xx = Phi''(phi) phi_x^2 + Phi'(phi) phi_xx, Phi'' by central differences of Phi'.
  auto phi_second = [pair](double s) {
    const double hs = 1e-5 * std::max(1.0, std::abs(s));
    return (pair.phi_prime(s + hs) - pair.phi_prime(s - hs)) / (2 * hs);
  };
  Forcing f;
  const SpaceTimeFn phi_ex = ex.phi, c_ex = ex.c;
  f.phi_source = [=](double t, double x) {
    const double s = phi_ex(t, x), px = phi_x(t, x);
    return phi_t(t, x) - kappa * (phi_second(s) * px * px + pair.phi_prime(s) * phi_xx(t, x));
  };
  f.c_source = [=](double t, double x) { return c_t(t, x) - D * c_xx(t, x); };
  f.cancel_phi = phi_ex;
  f.cancel_c = c_ex;
  for (std::size_t e = 0; e < 2; ++e) {
    const auto* v = std::get_if<Vascular>(&grid.role(e));
    if (!v) continue;
    const double xb = e == 0 ? 0.0 : 1.0;
    const double sign = e == 0 ? -1.0 : 1.0;  // outward normal
    const double eta = v->eta, cbv = v->c_b;
    f.phi_boundary[e] = [=](double t) { return sign * kappa * pair.phi_prime(phi_ex(t, xb)) * phi_x(t, xb); };
    f.c_boundary[e] = [=](double t) { return sign * D * c_x(t, xb) + eta * (c_ex(t, xb) - cbv); };
  }
  p.forcing = std::move(f);

  p.phi0.resize(grid.nodes());
  p.c0.resize(grid.nodes());
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    p.phi0[i] = ex.phi(0.0, grid.x(i));
    p.c0[i] = ex.c(0.0, grid.x(i));
  }
  return p;
}

/// L2 errors of the final state against the exact fields at t_max.
struct MmsErrors {
  double phi = 0.0, c = 0.0;
};

inline MmsErrors mms_errors(const EvolutionProblem& p, const ExactSolution& ex, const FieldPair& final_state) {
  const std::size_t n = p.grid.nodes();
  Field ep(n), ec(n);
  for (std::size_t i = 0; i < n; ++i) {
    ep[i] = final_state.phi[i] - ex.phi(p.t_max, p.grid.x(i));
    ec[i] = final_state.c[i] - ex.c(p.t_max, p.grid.x(i));
  }
  const NormSuite norms(p.grid);
  return {norms.l2(ep), norms.l2(ec)};
}

/// Runs the manufactured problem without storing intermediate snapshots.
inline FieldPair run_final(const EvolutionProblem& p) {
  validate_problem(p);
  FieldPair s{p.phi0, p.c0};
  const int n_steps = step_count(p);
  for (int k = 1; k <= n_steps; ++k) {
    const double t0 = step_time(p, k - 1), t1 = step_time(p, k);
    s = advance(p, s, t0, t1 - t0);
  }
  return s;
}

}  // namespace mpg
