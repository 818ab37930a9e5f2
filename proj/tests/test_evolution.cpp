#include <gtest/gtest.h>

#include <cmath>

#include "mpg/mms.hpp"

using namespace mpg;

namespace {

KineticsSpec inert(double phi_max = 1.0, double c_b = 1.0) {
  return build_kinetics(Factored{}, LinearUptake{0.0}, 0.0, phi_max, c_b);
}

EvolutionProblem base_problem(int n, StressLaw law = PowerAdhesive(2.0, 0.5)) {
  EvolutionProblem p;
  p.grid = build_grid(n, Vascular{1.0, 1.0}, Far{0.5, 1.0});
  p.pair = build_pair(law);
  p.spec = build_kinetics(CorrectedThreshold{2.0, 1.0, 0.4}, LinearUptake{3.0}, 0.1, 1.0, 1.0, 0.4);
  p.kappa_m = 0.05;
  p.D = 1.0;
  p.dt = 1e-3;
  p.t_max = 0.1;
  const auto init = random_initial_data(p.grid, 1.0, 42, false, p.pair.domain_upper() ? 0.95 : 1.0);
  p.phi0 = init.phi;
  p.c0 = init.c;
  return p;
}

}  // namespace

TEST(Step, TrivialSteadyStateIsExact) {
  auto p = base_problem(32);
  p.spec = inert();
  p.phi0.assign(p.grid.nodes(), 0.5);
  p.c0.assign(p.grid.nodes(), 1.0);
  p.t_max = 0.1;
  p.snapshot_every = 1;
  const auto tr = run(p);
  ASSERT_EQ(tr.snapshots.size(), 101u);
  for (const auto& s : tr.snapshots) {
    for (double v : s.phi) EXPECT_EQ(v, 0.5);
    for (double v : s.c) EXPECT_EQ(v, 1.0);
  }
}

TEST(Step, NutrientDecayMatchesScalarOde) {
  // Zero-flux cells, negligible vessel exchange and uniform data: the nutrient
  // obeys c' = -lambda phi c node by node.
  EvolutionProblem p;
  p.grid = build_grid(8, Vascular{1e-14, 1.0}, Vascular{1e-14, 1.0});
  p.spec = build_kinetics(Factored{}, LinearUptake{2.0}, 0.0, 1.0, 1.0);
  p.phi0.assign(p.grid.nodes(), 0.4);
  p.c0.assign(p.grid.nodes(), 1.0);
  p.dt = 1e-3;
  p.t_max = 0.5;
  const auto tr = run(p);
  const double rate = 2.0 * 0.4;
  const double be = std::pow(1.0 + rate * p.dt, -500.0);
  for (double v : tr.snapshots.back().c) {
    EXPECT_NEAR(v, be, 1e-10);
    EXPECT_NEAR(v, std::exp(-rate * 0.5), rate * rate * 0.5 * p.dt);
  }
  for (double v : tr.snapshots.back().phi) EXPECT_NEAR(v, 0.4, 1e-14);
}

TEST(Step, RejectsNonFiniteInput) {
  const auto p = base_problem(16);
  Field bad = p.phi0;
  bad[3] = std::nan("");
  EXPECT_THROW(step(p, bad, p.c0, 0.0, 1e-3), NonfiniteField);
}

TEST(Run, ValidatesInitialData) {
  auto p = base_problem(16);
  p.phi0[4] = 1.2;
  p.c0[2] = -0.1;
  try {
    run(p);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.issues().size(), 2u);
  }
}

TEST(Run, BoundsPreservedForEveryStressLaw) {
  for (const StressLaw& law : std::vector<StressLaw>{PolynomialOvershoot(1.0, 100.0, 2, 0.8), SaturatingHump(1.0, 4.0),
                                                     PowerAdhesive(2.0, 0.5), AsymptoticBlowup(1.0, 0.6, 1.0)}) {
    for (std::uint64_t seed : {1u, 2u}) {
      auto p = base_problem(64, law);
      const auto init = random_initial_data(p.grid, 1.0, seed, seed == 2, p.pair.domain_upper() ? 0.95 : 1.0);
      p.phi0 = init.phi;
      p.c0 = init.c;
      const auto tr = run(p);
      EXPECT_LE(max_bound_violation(tr, 1.0, 1.0), 1e-9) << law_name(law);
      EXPECT_EQ(tr.audit.size(), 100u);
    }
  }
}

TEST(Run, BoundViolationsDoNotGrowAsDtShrinks) {
  std::vector<double> viol;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    auto p = base_problem(64, SaturatingHump(1.0, 4.0));
    p.dt = dt;
    p.t_max = 0.2;
    viol.push_back(max_bound_violation(run(p), 1.0, 1.0));
  }
  for (double v : viol) EXPECT_LE(v, 1e-9);
  for (std::size_t k = 1; k < viol.size(); ++k) EXPECT_LE(viol[k], viol[k - 1] * 0.5 + 1e-15);
}

TEST(Run, AdaptiveSubstepsRecoverFromNewtonFailure) {
  auto p = base_problem(64, PolynomialOvershoot(1.0, 100.0, 2, 0.8));
  p.solver.max_newton = 2;
  p.dt = 0.05;
  p.t_max = 0.1;
  const auto tr = run(p);
  int substeps = 0;
  for (const auto& a : tr.audit) substeps += a.substeps;
  EXPECT_GT(substeps, 2);
  EXPECT_NEAR(tr.audit.back().t, 0.1, 1e-15);
  EXPECT_LE(max_bound_violation(tr, 1.0, 1.0), 1e-9);
}

TEST(Run, MassConservedWithoutFarBoundary) {
  EvolutionProblem p;
  p.grid = build_grid(64, Vascular{1.0, 1.0}, Vascular{1.0, 1.0});
  p.pair = build_pair(PowerAdhesive(2.0, 0.5));
  p.spec = build_kinetics(Factored{}, LinearUptake{1.0}, 0.0, 1.0, 1.0);
  p.traj = InterfaceTrajectory::constant(0.7, 0.3);
  const auto init = random_initial_data(p.grid, 1.0, 5, false);
  p.phi0 = init.phi;
  p.c0 = init.c;
  p.kappa_m = 0.5;
  p.t_max = 0.05;
  p.snapshot_every = 1;
  const auto tr = run(p);
  const double m0 = mean_value(p.grid, tr.snapshots.front().phi);
  for (const auto& s : tr.snapshots) EXPECT_NEAR(mean_value(p.grid, s.phi), m0, 1e-10 * m0);
}

TEST(Run, InterfaceFluxIsSingleValued) {
  // The tumor-side balance over the nodes left of S closes with the one face
  // flux kappa (Phi_{k+1} - Phi_k)/h, so no jump is introduced at S.
  auto p = base_problem(40);
  p.traj = InterfaceTrajectory::constant(0.5);
  p.t_max = p.dt;
  const auto tr = run(p);
  const auto& phi1 = tr.snapshots.back().phi;
  const auto& phi0 = p.phi0;
  const auto& c1 = tr.snapshots.back().c;
  const detail::StepContext ctx(p, p.dt, p.dt);
  const std::size_t k = 20;  // face between nodes 20 and 21 is the first past S = 0.5
  double balance = 0.0;
  for (std::size_t i = 0; i <= k; ++i)
    balance += p.grid.mass(i) * ((phi1[i] - phi0[i]) / p.dt - ctx.gamma_at(i, phi1[i], c1[i]));
  const double flux = p.kappa_m * (p.pair.phi(phi1[k + 1]) - p.pair.phi(phi1[k])) / p.grid.h;
  EXPECT_NEAR(balance, flux, 1e-8);
}

TEST(Mms, TemporalOrderAtLeastOne) {
  ExactSolution ex;
  ex.phi = [](double t, double x) { return 0.5 + 0.1 * (1 - x * x) * std::exp(-t); };
  ex.c = [](double t, double x) { return 1.0 - 0.1 * (1 - x) * std::exp(-t); };
  std::vector<ErrorSample> ep, ec;
  for (double dt : {0.05, 0.025, 0.0125}) {
    auto p = base_problem(256);
    p.t_max = 0.5;
    p.dt = dt;
    p = mms_residual(p, ex);
    const auto e = mms_errors(p, ex, run_final(p));
    ep.push_back({dt, e.phi});
    ec.push_back({dt, e.c});
  }
  EXPECT_GE(convergence_order(ep).order, 0.9);
  EXPECT_GE(convergence_order(ec).order, 0.9);
}

TEST(Dependence, ZeroPerturbationGivesSentinel) {
  auto p = base_problem(32);
  p.t_max = 0.02;
  const auto rep = continuous_dependence_experiment(p, 0.0);
  EXPECT_TRUE(rep.zero_over_zero);
  EXPECT_EQ(rep.lhs, 0.0);
  EXPECT_EQ(rep.rhs, 0.0);
  EXPECT_TRUE(std::isnan(rep.ratio));
}

TEST(Dependence, RatioStableAcrossAmplitudes) {
  auto p = base_problem(32);
  p.phi0.assign(p.grid.nodes(), 0.5);
  p.c0.assign(p.grid.nodes(), 0.8);
  p.c0.back() = 1.0;
  p.t_max = 0.1;
  p.dt = 5e-3;
  double lo = HUGE_VAL, hi = 0.0;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto rep = continuous_dependence_experiment(p, eps);
    ASSERT_FALSE(rep.zero_over_zero);
    EXPECT_GT(rep.lhs, 0.0);
    lo = std::min(lo, rep.ratio);
    hi = std::max(hi, rep.ratio);
  }
  EXPECT_LT(hi / lo, 10.0);
}
