#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mpg/poisson.hpp"

using namespace mpg;

namespace {

Grid1D canonical(int n) { return build_grid(n, Vascular{1.0, 1.0}, Far{0.5, 1.0}); }
Grid1D no_far(int n) { return build_grid(n, Vascular{1.0, 1.0}, Vascular{1.0, 1.0}); }

Field random_field(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field f(n);
  for (double& v : f) v = u(rng);
  return f;
}

// Smallest eigenvalue of the discrete mixed problem: cos(pi x / 2) modes give
// mu = 2 (1 - cos(pi h / 2)) / h^2, hence C_P = 1 / sqrt(mu).
double discrete_poincare(int n) {
  const double h = 1.0 / n;
  const double half = std::sin(std::numbers::pi * h / 4.0);  // 1 - cos(2a) = 2 sin^2(a)
  return h / (2.0 * half);
}

}  // namespace

TEST(Poisson, MixedUnitLoad) {
  for (int n : {16, 64, 256}) {
    const auto g = canonical(n);
    const PoissonOperator op(g);
    const Field u = op.apply(Field(g.nodes(), 1.0));
    double err = 0.0;
    for (std::size_t i = 0; i < g.nodes(); ++i) err = std::max(err, std::abs(u[i] - 0.5 * (1 - g.x(i) * g.x(i))));
    EXPECT_LE(err, 2.0 * g.h * g.h) << n;
    EXPECT_NEAR(op.weak_norm_squared(Field(g.nodes(), 1.0)), 1.0 / 3.0, 5.0 * g.h * g.h) << n;
  }
}

TEST(Poisson, ZeroData) {
  const auto g = canonical(12);
  const Field u = PoissonOperator(g).apply(Field(g.nodes(), 0.0));
  for (double v : u) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(PoissonOperator(g).weak_norm_squared(Field(g.nodes(), 0.0)), 0.0);
}

TEST(Poisson, FarBoundaryOnTheLeft) {
  const auto g = build_grid(64, Far{0.5, 1.0}, Vascular{1.0, 1.0});
  const Field u = PoissonOperator(g).apply(Field(g.nodes(), 1.0));
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    const double y = 1.0 - g.x(i);
    EXPECT_NEAR(u[i], 0.5 * (1 - y * y), 1e-12);
  }
}

TEST(Poisson, NeumannAverageUnitLoad) {
  const auto g = no_far(32);
  const Field u = PoissonOperator(g).apply(Field(g.nodes(), 1.0));
  for (double v : u) EXPECT_NEAR(v, 1.0, 1e-13);
}

TEST(Poisson, NeumannAverageConstraintAndEquation) {
  const auto g = no_far(40);
  const PoissonOperator op(g);
  const Field f = random_field(g.nodes(), 3);
  const Field u = op.apply(f);
  EXPECT_NEAR(mean_value(g, u), mean_value(g, f), 1e-13);
  const Field ku = stiffness_matrix(g).apply(u);
  const double fbar = mean_value(g, f);
  for (std::size_t i = 0; i < g.nodes(); ++i) EXPECT_NEAR(ku[i], g.mass(i) * (f[i] - fbar), 1e-12);
}

TEST(Poisson, SymmetryAndPositivity) {
  for (const auto& g : {canonical(50), no_far(50), build_grid(50, Far{0.3, 1.0}, Far{0.3, 1.0})}) {
    const PoissonOperator op(g);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Field f = random_field(g.nodes(), seed), k = random_field(g.nodes(), seed + 100);
      for (std::size_t i = 0; i < g.nodes(); ++i)
        if (g.dirichlet(i) && op.variant() == PoissonVariant::MixedBC) f[i] = k[i] = 0.0;
      const double a = mass_inner(g, op.apply(f), k), b = mass_inner(g, f, op.apply(k));
      EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(a)));
      EXPECT_NEAR(op.weak_inner(f, k), op.weak_inner(k, f), 1e-12 * std::max(1.0, std::abs(a)));
      EXPECT_GT(op.weak_norm_squared(f), 0.0);
      EXPECT_GT(mass_inner(g, op.apply(f), f), 0.0);
    }
  }
}

TEST(Poisson, NeumannWeakInnerEqualsMassPairing) {
  const auto g = no_far(30);
  const PoissonOperator op(g);
  const Field f = random_field(g.nodes(), 8), k = random_field(g.nodes(), 9);
  EXPECT_NEAR(op.weak_inner(f, k), mass_inner(g, op.apply(f), k), 1e-12);
}

TEST(Poisson, DualityIdentity) {
  const auto g = canonical(33);
  const PoissonOperator op(g);
  const auto k = stiffness_matrix(g);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Field f = random_field(g.nodes(), seed);
    Field v = random_field(g.nodes(), seed + 50);
    v.back() = 0.0;
    const double lhs = stiffness_inner(g, op.apply(f), v);
    const double rhs = mass_inner(g, f, v);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(Poisson, WeakNormBoundsUnderRefinement) {
  for (int n : {16, 64, 256, 1024}) {
    const auto g = canonical(n);
    const PoissonOperator op(g);
    const double cp = poincare_constant(g).constant;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Field f = random_field(g.nodes(), seed);
      const double l2 = std::sqrt(mass_inner(g, f, f));
      const double weak = op.weak_norm(f);
      EXPECT_LE(weak, cp * l2 * (1 + 1e-12));
      const Field pf = op.apply(f);
      EXPECT_LE(std::sqrt(mass_inner(g, pf, pf)), cp * weak * (1 + 1e-12));
    }
  }
}

TEST(Poincare, MatchesDiscreteEigenvalueAndContinuumLimit) {
  double prev_gap = 1.0;
  for (int n : {4, 16, 64, 256, 1024}) {
    const auto est = poincare_constant(canonical(n));
    EXPECT_NEAR(est.constant, discrete_poincare(n), 1e-12) << n;
    const double gap = std::abs(est.constant - 2.0 / std::numbers::pi);
    EXPECT_LT(gap, prev_gap);
    EXPECT_LT(gap / (2.0 / std::numbers::pi), 0.05);
    prev_gap = gap;
  }
  EXPECT_LT(std::abs(poincare_constant(canonical(1024)).constant - 2.0 / std::numbers::pi), 0.02 * 2.0 / std::numbers::pi);
}

TEST(Poincare, NoFarBoundaryIsARegimeError) {
  EXPECT_THROW(poincare_constant(no_far(16)), RegimeError);
  EXPECT_THROW(PoissonOperator(no_far(16), PoissonVariant::MixedBC), RegimeError);
}
