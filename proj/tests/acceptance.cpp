// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "mpg/mms.hpp"
#include "mpg/stationary.hpp"

using namespace mpg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = sec < budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s %2d %s: %s [%.2f s of %.0f s]%s\n", pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), sec, budget_s,
              in_time ? "" : " over budget");
  std::fflush(stdout);
}

Outcome poisson_oracle() {
  bool ok = true;
  std::string d;
  for (int n : {16, 64, 256}) {
    const Grid1D g = build_grid(n);
    const PoissonOperator op(g);
    const Field one(g.nodes(), 1.0);
    const Field u = op.apply(one);
    double e = 0.0;
    for (std::size_t i = 0; i < g.nodes(); ++i) e = std::max(e, std::abs(u[i] - 0.5 * (1 - g.x(i) * g.x(i))));
    const double ew = std::abs(op.weak_norm_squared(one) - 1.0 / 3.0);
    ok = ok && e <= 2 * g.h * g.h && ew <= 5 * g.h * g.h;
    d += fmt("n=%d Linf=%.2e weak=%.2e; ", n, e, ew);
  }
  return {ok, d};
}

Outcome poincare() {
  double prev = 0.0;
  bool monotone = true;
  double last = 0.0;
  for (int n = 16; n <= 1024; n *= 2) {
    last = poincare_constant(build_grid(n)).constant;
    if (prev > 0.0 && !(last < prev)) monotone = false;
    prev = last;
  }
  const double rel = std::abs(last / (2.0 / std::numbers::pi) - 1.0);
  return {rel <= 0.02 && monotone, fmt("C_P(1024)=%.10f rel.dev=%.2e monotone=%d", last, rel, int(monotone))};
}

Outcome bounds() {
  const std::vector<StressLaw> laws = {PolynomialOvershoot(1.0, 5.0, 2, 0.5), SaturatingHump(2.0, 1.0),
                                       PowerAdhesive(2.0, 0.5), AsymptoticBlowup(0.5, 0.5, 1.0)};
  double worst = 0.0;
  for (int r = 0; r < 20; ++r) {
    EvolutionProblem p;
    p.grid = build_grid(128, Vascular{1.0, 1.0}, Far{0.5, 1.0});
    p.pair = build_pair(laws[r % 4]);
    p.spec = build_kinetics(CorrectedThreshold{2.0, 1.0, 0.4}, LinearUptake{3.0}, 0.1, 1.0, 1.0, 0.4);
    p.kappa_m = 0.05;
    p.dt = 1e-3;
    p.t_max = 1.0;
    const auto init = random_initial_data(p.grid, 1.0, 1000 + r, false, p.pair.domain_upper() ? 0.95 : 1.0);
    p.phi0 = init.phi;
    p.c0 = init.c;
    const auto tr = run(p);
    if (tr.audit.size() != 1000) return {false, "run did not take 1000 steps"};
    worst = std::max(worst, max_bound_violation(tr, 1.0, 1.0));
  }
  return {worst <= 1e-9, fmt("20 runs x 1000 steps, worst violation %.2e", worst)};
}

Outcome dependence() {
  EvolutionProblem p;
  p.grid = build_grid(64, Vascular{1.0, 1.0}, Far{0.5, 1.0});
  p.pair = build_pair(PolynomialOvershoot(1.0, 5.0, 2, 0.5));
  p.spec = build_kinetics(CorrectedThreshold{1.0, 0.5, 0.4}, MichaelisMentenUptake{2.0, 0.5}, 0.1, 1.0, 1.0, 0.4);
  p.kappa_m = 0.1;
  p.dt = 2e-3;
  p.t_max = 0.2;
  const auto init = random_initial_data(p.grid, 1.0, 7);
  p.phi0 = init.phi;
  p.c0 = init.c;
  double lo = HUGE_VAL, hi = 0.0;
  std::string d;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto r = continuous_dependence_experiment(p, eps);
    if (r.zero_over_zero) return {false, "0/0 ratio"};
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
    d += fmt("%.0e:%.4f ", eps, r.ratio);
  }
  return {hi / lo < 10.0, d + fmt("spread %.3f", hi / lo)};
}

Outcome stationary_trivial() {
  StationaryProblem p;
  p.grid = build_grid(64, Vascular{1.0, 0.8}, Far{0.3, 0.8});
  p.pair = build_pair(PolynomialOvershoot(1.0, 1.0, 2, 0.5));
  p.spec = build_kinetics(Factored{}, LinearUptake{0.0}, 0.0, 1.0, 0.8);
  const auto rep = fixed_point_solve(p, Field(p.grid.nodes(), 0.7));
  double e = 0.0;
  for (std::size_t i = 0; i < p.grid.nodes(); ++i) e = std::max({e, std::abs(rep.phi[i] - 0.3), std::abs(rep.c[i] - 0.8)});
  return {rep.converged && e <= 1e-12 && rep.iterations <= 2, fmt("error %.1e in %d iterations", e, rep.iterations)};
}

Outcome stationary_oracles() {
  bool ok = true;
  std::string d;
  const double phi_bar = 0.4, lambda = 3.0, D = 1.3, eta = 2.0, cb = 1.0, kappa = 0.7, delta = 0.5, ps = 0.5;
  const double mu = std::sqrt(lambda * phi_bar / D), r = eta / (D * mu);
  const double A = cb * (1 + r * std::sinh(mu)) / (std::cosh(mu) + r * std::sinh(mu));
  const double k = std::sqrt(delta / kappa);
  for (int n : {32, 128, 512}) {
    StationaryProblem p;
    p.grid = build_grid(n, Vascular{eta, cb}, Far{ps, cb});
    p.kappa_m = kappa;
    p.D = D;
    p.spec = build_kinetics(Factored{}, LinearUptake{lambda}, delta, 1.0, cb);
    const StationarySolver s(p);
    const Field c = s.solve_c_given_phi(Field(n + 1, phi_bar));
    const Field phi = s.solve_phi_given_c(Field(n + 1, cb));
    double e1 = 0.0, e2 = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double x = p.grid.x(i);
      e1 = std::max(e1, std::abs(c[i] - (A * std::cosh(mu * x) + r * (A - cb) * std::sinh(mu * x))));
      e2 = std::max(e2, std::abs(phi[i] - ps * std::cosh(k * x) / std::cosh(k)));
    }
    const double h2 = p.grid.h * p.grid.h;
    ok = ok && e1 <= 5 * h2 && e2 <= 5 * h2;
    d += fmt("n=%d S1 %.1e S2 %.1e (5h^2=%.1e); ", n, e1, e2, 5 * h2);
  }
  return {ok, d};
}

StationaryProblem small_rate_problem(int n) {
  StationaryProblem p;
  p.grid = build_grid(n, Vascular{1.0, 1.0}, Far{0.5, 1.0});
  p.spec = build_kinetics(CorrectedThreshold{0.2, 0.1, 0.3}, LinearUptake{0.1}, 0.5, 1.0, 1.0, 0.3);
  return p;
}

Outcome uniqueness() {
  const auto p = small_rate_problem(128);
  const auto chk = uniqueness_constant(p);
  if (!chk.satisfied) return {false, fmt("uniqueness constant %.4f not below %.4f", chk.C, chk.threshold)};
  const StationarySolver s(p);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<FixedPointReport> reps;
  for (int k = 0; k < 3; ++k) {
    Field init(p.grid.nodes());
    for (double& v : init) v = u(rng);
    reps.push_back(fixed_point_solve(s, init));
  }
  double spread = 0.0;
  int iters = 0;
  bool conv = true;
  for (const auto& r : reps) {
    conv = conv && r.converged;
    iters = std::max(iters, r.iterations);
    for (std::size_t i = 0; i < r.phi.size(); ++i)
      spread = std::max({spread, std::abs(r.phi[i] - reps[0].phi[i]), std::abs(r.c[i] - reps[0].c[i])});
  }
  return {conv && spread <= 1e-8 && iters <= 100,
          fmt("C=%.4f < %.4f; max spread %.1e, max iterations %d", chk.C, chk.threshold, spread, iters)};
}

Outcome goldens() {
  // Independent sampled evaluation (401 samples, n = 32, Phi = identity).
  const auto p = small_rate_problem(32);
  const auto u = uniqueness_constant(p);
  const auto c1 = positivity_constraint_check(p, 0.1);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  const double worst = std::max({rel(u.C, 0.269300875), rel(u.branches[0], 0.53860175),
                                 rel(u.branches[1], 0.5000000000000178), rel(u.branches[2], 0.2594343197332436),
                                 rel(c1.C1, 0.794031860389504), rel(c1.bound, 0.4)});
  return {worst <= 1e-10 && u.satisfied && !c1.satisfied, fmt("C=%.12f C1=%.12f worst rel. dev. %.1e", u.C, c1.C1, worst)};
}

Outcome mms() {
  const double ps = 0.5, cb = 1.0;
  auto orders = [&](bool degenerate) {
    ExactSolution ex;
    if (!degenerate) {
      ex.phi = [=](double t, double x) { return ps + 0.1 * (1 - x * x) * std::exp(-t); };
      ex.phi_t = [=](double t, double x) { return -0.1 * (1 - x * x) * std::exp(-t); };
      ex.phi_x = [=](double t, double x) { return -0.2 * x * std::exp(-t); };
      ex.phi_xx = [=](double t, double) { return -0.2 * std::exp(-t); };
    } else {
      ex.phi = [=](double t, double x) { return ps * x * x * (1 + 0.5 * (1 - x) * std::exp(-t)); };
    }
    ex.c = [=](double t, double x) { return cb * (1 - 0.1 * (1 - x) * std::exp(-t)); };
    std::vector<ErrorSample> ep, ec;
    for (int n : {32, 64, 128, 256}) {
      EvolutionProblem p;
      p.grid = build_grid(n, Vascular{2.0, cb}, Far{ps, cb});
      p.pair = build_pair(PowerAdhesive(2.0, ps));
      p.spec = build_kinetics(CorrectedThreshold{1.0, 1.0, 0.3}, LinearUptake{1.0}, 0.1, 1.0, cb, 0.3);
      p.kappa_m = 0.7;
      p.D = 1.3;
      p.t_max = 0.5;
      p.dt = 1.0 / (double(n) * n);  // dt ~ h^2 keeps the time error below the spatial one
      p = mms_residual(p, ex);
      const auto e = mms_errors(p, ex, run_final(p));
      ep.push_back({p.grid.h, e.phi});
      ec.push_back({p.grid.h, e.c});
    }
    return std::pair{convergence_order(ep).order, convergence_order(ec).order};
  };
  const auto [phi_nd, c_nd] = orders(false);
  const auto [phi_dg, c_dg] = orders(true);
  return {c_nd >= 1.9 && phi_nd >= 1.5 && phi_dg >= 0.8,
          fmt("non-degenerate phi %.3f c %.3f; degenerate phi %.3f (c %.3f)", phi_nd, c_nd, phi_dg, c_dg)};
}

Outcome appendix_b() {
  EvolutionProblem p;
  p.grid = build_grid(128, Vascular{1.0, 1.0}, Vascular{0.5, 1.0});
  p.pair = build_pair(SaturatingHump(2.0, 1.0));
  p.spec = build_kinetics(Factored{}, LinearUptake{2.0}, 0.0, 1.0, 1.0);
  p.traj = InterfaceTrajectory::constant(0.7, 0.3);
  p.kappa_m = 0.5;
  p.dt = 1e-3;
  p.t_max = 0.2;
  p.snapshot_every = 1;
  const auto init = random_initial_data(p.grid, 1.0, 5);
  p.phi0 = init.phi;
  p.c0 = init.c;
  const auto tr = run(p);
  double worst = 0.0;
  for (std::size_t k = 1; k < tr.snapshots.size(); ++k) {
    const double m0 = mean_value(p.grid, tr.snapshots[k - 1].phi), m1 = mean_value(p.grid, tr.snapshots[k].phi);
    worst = std::max(worst, std::abs(m1 - m0) / std::abs(m0));
  }
  const PoissonOperator op(p.grid, PoissonVariant::NeumannAverage);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  double asym = 0.0, min_rq = HUGE_VAL;
  for (int trial = 0; trial < 20; ++trial) {
    Field f(p.grid.nodes()), g(p.grid.nodes());
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = nd(rng);
      g[i] = nd(rng);
    }
    const double fg = mass_inner(p.grid, op.apply(f), g), gf = mass_inner(p.grid, f, op.apply(g));
    asym = std::max(asym, std::abs(fg - gf) / std::max(std::abs(fg), 1e-300));
    asym = std::max(asym, std::abs(op.weak_inner(f, g) - op.weak_inner(g, f)) / std::max(std::abs(fg), 1e-300));
    min_rq = std::min(min_rq, op.weak_norm_squared(f) / mass_inner(p.grid, f, f));
  }
  return {worst <= 1e-10 && asym <= 1e-12 && min_rq > 0.0,
          fmt("%zu steps, worst relative mass change %.1e; P asymmetry %.1e, min (Pf,f)/(f,f) %.2e", tr.audit.size(),
              worst, asym, min_rq)};
}

}  // namespace

int main() {
  criterion(1, "Poisson oracle", 1, poisson_oracle);
  criterion(2, "Poincare constant", 5, poincare);
  criterion(3, "Bound preservation", 120, bounds);
  criterion(4, "Continuous dependence", 120, dependence);
  criterion(5, "Stationary trivial case", 1, stationary_trivial);
  criterion(6, "Stationary linear oracles", 5, stationary_oracles);
  criterion(7, "Fixed-point uniqueness", 30, uniqueness);
  criterion(8, "Constant formulas", 5, goldens);
  criterion(9, "MMS convergence", 300, mms);
  criterion(10, "No-far-boundary regime", 30, appendix_b);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
