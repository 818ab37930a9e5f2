#include <gtest/gtest.h>

#include <cmath>

#include "mpg/kinetics.hpp"

using namespace mpg;

namespace {

KineticsSpec corrected(double g1, double g2, double cs, double delta) {
  return build_kinetics(CorrectedThreshold{g1, g2, cs}, LinearUptake{1.0}, delta, 1.0, 1.0, cs);
}

const ConstitutivePair& quadratic_pair() {
  static const ConstitutivePair pair = build_pair(PowerAdhesive(2.0, 0.5));
  return pair;
}

}  // namespace

TEST(Gamma, CorrectedThresholdVanishesAtCloseTouchingWithoutDeath) {
  const auto spec = corrected(1.0, 1.0, 0.5, 0.0);
  EXPECT_EQ(gamma_eval(spec, Population::Tumor, 1.0, 1.0), 0.0);
}

TEST(Gamma, CorrectedThresholdSubstitution) {
  const auto spec = corrected(2.0, 3.0, 0.5, 0.1);
  EXPECT_NEAR(gamma_eval(spec, Population::Tumor, 0.5, 0.25), -0.425, 1e-15);
  EXPECT_NEAR(gamma_eval(spec, Population::Host, 0.5, 0.25), -0.425, 1e-15);
  // Above threshold only the logistic proliferation term acts: 2 * 0.25 * 0.25 - 0.05.
  EXPECT_NEAR(gamma_eval(spec, Population::Tumor, 0.5, 0.75), 0.075, 1e-15);
}

TEST(Gamma, ZeroAtZeroForEveryPreset) {
  const auto pair = quadratic_pair();
  const std::vector<GrowthPreset> presets{BrewardMM{1.0, 0.5, 0.2, 0.1, 0.3}, ThresholdLogistic{1.0, 0.4},
                                          CorrectedThreshold{1.0, 2.0, 0.4},
                                          EnergyATP{1.0, 0.3, 1.0, 2.0, nullptr, nullptr},
                                          StressInduced{1.0, 0.5, 0.1, 0.3, 0.4, std::nullopt}};
  for (const auto& p : presets) {
    const auto spec = build_kinetics(p, LinearUptake{1.0}, 0.2, 1.0, 1.0, 0.4, &pair);
    for (double c : {0.0, 0.3, 1.0, 2.0}) EXPECT_EQ(gamma_eval(spec, Population::Tumor, 0.0, c), 0.0) << preset_name(p);
  }
}

TEST(Gamma, NoGrowthAtCloseTouching) {
  const auto pair = quadratic_pair();
  const std::vector<GrowthPreset> presets{BrewardMM{1.0, 0.5, 0.2, 0.1, 0.3}, ThresholdLogistic{1.0, 0.4},
                                          CorrectedThreshold{1.0, 2.0, 0.4},
                                          EnergyATP{1.0, 0.3, 1.0, 2.0, nullptr, nullptr},
                                          StressInduced{1.0, 0.5, 0.1, 0.3, 0.4, std::nullopt}};
  for (const auto& p : presets) {
    const auto spec = build_kinetics(p, LinearUptake{1.0}, 0.2, 1.0, 1.0, 0.4, &pair);
    for (int i = 0; i <= 20; ++i) {
      const double c = i / 20.0;
      EXPECT_LE(gamma_eval(spec, Population::Tumor, 1.0, c), -0.2 + 1e-14) << preset_name(p);
    }
  }
}

TEST(Gamma, BrewardFactoredForm) {
  const auto spec = build_kinetics(BrewardMM{2.0, 0.5, 0.2, 0.1, 0.3}, LinearUptake{1.0}, 0.05, 1.0, 1.0);
  const double phi = 0.3, c = 0.6;
  const double ref = 2.0 * phi * (1 - phi) * c / (1 + 0.5 * c) - phi * (0.2 + 0.1 * c) / (1 + 0.3 * c) - 0.05 * phi;
  EXPECT_NEAR(gamma_eval(spec, Population::Tumor, phi, c), ref, 1e-15);
  EXPECT_TRUE(spec[Population::Tumor].factored());
}

TEST(Gamma, EnergyATPSwitch) {
  // f = 1 - phi, g = c; drive = (1-phi)c - theta.
  const EnergyATP e{1.5, 0.2, 2.0, 3.0, nullptr, nullptr};
  const auto spec = build_kinetics(e, EnergyUptake{1.0}, 0.0, 1.0, 1.0);
  EXPECT_FALSE(spec[Population::Tumor].factored());
  const double birth = 1.5 * std::log(2.0) / 2.0, death = 1.5 * std::log(2.0) / (0.2 * 3.0);
  EXPECT_NEAR(gamma_eval(spec, Population::Tumor, 0.5, 1.0), birth * 0.5 * 0.3, 1e-15);
  EXPECT_NEAR(gamma_eval(spec, Population::Tumor, 0.5, 0.2), -death * 0.5 * 0.1, 1e-15);
}

TEST(Gamma, StressInducedUsesSigma) {
  const auto pair = build_pair(PolynomialOvershoot(1.0, 10.0, 2, 0.6));
  const StressInduced s{1.0, 0.7, 0.3, 0.5, 0.5, 1e-3};
  const auto spec = build_kinetics(s, LinearUptake{1.0}, 0.0, 1.0, 1.0, 0.5, &pair);
  // phi = 0.2: Sigma = 0.2 < 0.3, proliferation active, apoptosis off.
  EXPECT_NEAR(gamma_eval(spec, Population::Tumor, 0.2, 1.0), 0.2 * 1.0, 1e-15);
  // phi = 0.7: Sigma = 0.7 + 0.1 = 0.8 > 0.5, only stress apoptosis.
  EXPECT_NEAR(gamma_eval(spec, Population::Tumor, 0.7, 1.0), -0.7 * 0.7, 1e-15);
  EXPECT_THROW(build_kinetics(s, LinearUptake{1.0}, 0.0, 1.0, 1.0), ConfigError);
}

TEST(Absorption, PrototypeAndEnergyForms) {
  const auto lin = build_kinetics(CorrectedThreshold{1, 1, 0.5}, LinearUptake{1.0}, 0.1, 1.0, 1.0);
  EXPECT_NEAR(q_absorption_eval(lin, Population::Tumor, 0.5, 0.5), -0.25, 1e-15);
  EXPECT_EQ(q_absorption_eval(lin, Population::Tumor, 0.5, 0.0), 0.0);
  const auto en = build_kinetics(CorrectedThreshold{1, 1, 0.5}, EnergyUptake{1.0}, 0.1, 1.0, 1.0);
  EXPECT_NEAR(q_absorption_eval(en, Population::Tumor, 0.5, 1.0), -0.25, 1e-15);
  const auto mm = build_kinetics(CorrectedThreshold{1, 1, 0.5}, MichaelisMentenUptake{2.0, 0.5}, 0.1, 1.0, 1.0);
  EXPECT_NEAR(q_absorption_eval(mm, Population::Tumor, 0.5, 0.5), -0.5, 1e-15);
}

TEST(Absorption, ConsumesNutrientOnPhysicalRange) {
  for (const AbsorptionPreset& u : std::vector<AbsorptionPreset>{LinearUptake{1.0}, MichaelisMentenUptake{1.0, 0.3},
                                                                 EnergyUptake{2.0}}) {
    const auto spec = build_kinetics(CorrectedThreshold{1, 1, 0.5}, u, 0.1, 1.0, 1.0);
    for (int i = 0; i <= 10; ++i)
      for (int j = 0; j <= 10; ++j) EXPECT_LE(q_absorption_eval(spec, Population::Host, i / 10.0, j / 10.0), 0.0);
  }
}

TEST(Mollifier, SmoothstepProperties) {
  const double eps = 0.2;
  EXPECT_EQ(mollified_heaviside(0.0, eps), 0.5);
  EXPECT_EQ(mollified_heaviside(10 * eps, eps), 1.0);
  EXPECT_EQ(mollified_heaviside(-eps, eps), 0.0);
  const double half = mollified_heaviside(eps / 2, eps);
  EXPECT_GT(half, 0.5);
  EXPECT_LT(half, 1.0);
  double prev = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double v = mollified_heaviside(-2 * eps + 4 * eps * i / 400, eps);
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_THROW(mollified_heaviside(0.0, 0.0), ConfigError);
}

TEST(Validation, CorrectedThresholdPasses) {
  const auto spec = corrected(1.0, 2.0, 0.5, 0.1);
  const auto report = validate_hypotheses(spec, quadratic_pair());
  for (const char* h : {"H1", "H2", "H3", "H4", "H5", "H6", "H7"}) EXPECT_TRUE(report.passed(h)) << h;
  EXPECT_TRUE(report.failures().empty());
}

TEST(Validation, PositiveDeathRateFailsH2) {
  Factored f;
  f.terms.push_back({"p", 1.0, clamped([](double p) { return p * (1 - p); }, 0, 1), [](double) { return 1.0; }, true});
  f.terms.push_back({"d", 1.0, clamped([](double p) { return p; }, 0, 1), [](double) { return 1.0; }, false});
  const auto spec = build_kinetics(f, LinearUptake{1.0}, 0.1, 1.0, 1.0);
  const auto report = validate_hypotheses(spec, quadratic_pair());
  EXPECT_TRUE(report.failed("H2"));
  bool found = false;
  for (const auto& c : report.failures())
    if (c.witness == "γ_T^d = 1 ≥ 0") found = true;
  EXPECT_TRUE(found);
}

TEST(Validation, DecreasingDeathFactorFailsH3_3) {
  Factored f;
  f.terms.push_back({"d", -1.0, clamped([](double p) { return p * (1 - p); }, 0, 1), [](double) { return 1.0; }, false});
  const auto spec = build_kinetics(f, LinearUptake{1.0}, 0.1, 1.0, 1.0);
  const auto report = validate_hypotheses(spec, quadratic_pair());
  EXPECT_TRUE(report.failed("H3.3"));
  EXPECT_FALSE(report.failed("H2"));
}

TEST(Validation, NonpositiveDeltaAndLambdaFail) {
  const auto spec = build_kinetics(CorrectedThreshold{1, 1, 0.5}, LinearUptake{0.0}, 0.0, 1.0, 1.0);
  const auto report = validate_hypotheses(spec, quadratic_pair());
  EXPECT_TRUE(report.failed("H2.delta"));
  EXPECT_TRUE(report.failed("H5"));
}

TEST(Validation, DecreasingUptakeFailsH7_2) {
  const auto spec = build_kinetics(CorrectedThreshold{1, 1, 0.5},
                                   CustomUptake{1.0, [](double p) { return p; }, [](double c) { return c * std::exp(-4 * c); }},
                                   0.1, 1.0, 1.0);
  EXPECT_TRUE(validate_hypotheses(spec, quadratic_pair()).failed("H7.2"));
}

TEST(Validation, DegeneratePhiMakesLipschitzAdvisory) {
  // f = phi(1-phi) behaves like phi near 0, which is not Phi-Lipschitz for Phi = s^2.
  const auto report = validate_hypotheses(corrected(1, 1, 0.5, 0.1), quadratic_pair());
  bool advisory = false;
  for (const auto& c : report.checks)
    if (c.id.rfind("H3.phi_lipschitz", 0) == 0 && c.status == CheckStatus::Advisory) advisory = true;
  EXPECT_TRUE(advisory);
  // Phi = identity certifies the same factors.
  const auto lin = validate_hypotheses(corrected(1, 1, 0.5, 0.1), build_pair(PowerAdhesive(1.0, 0.5)));
  for (const auto& c : lin.checks)
    if (c.id.rfind("H3.phi_lipschitz", 0) == 0) {
      EXPECT_EQ(c.status, CheckStatus::Pass) << c.id;
    }
}

TEST(Validation, BlowupFlagsH1Advisory) {
  const auto report = validate_hypotheses(corrected(1, 1, 0.5, 0.1), build_pair(AsymptoticBlowup(1.0, 0.5, 1.0)));
  bool advisory = false;
  for (const auto& c : report.checks)
    if (c.id == "H1" && c.status == CheckStatus::Advisory) advisory = true;
  EXPECT_TRUE(advisory);
  EXPECT_TRUE(report.passed("H1"));
}

TEST(Validation, EnergyATPCheckedDirectly) {
  const auto spec = build_kinetics(EnergyATP{1.0, 0.3, 1.0, 2.0, nullptr, nullptr}, EnergyUptake{1.0}, 0.1, 1.0, 1.0);
  const auto report = validate_hypotheses(spec, quadratic_pair());
  EXPECT_TRUE(report.passed("H3.direct"));
  EXPECT_TRUE(report.failures().empty());
}
