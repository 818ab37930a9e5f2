#pragma once

/**
 * @file kinetics.hpp
 * @brief Growth and nutrient-absorption terms for the tumor (T) and host (H)
 * populations.
 *
 * Growth is kept in the factored form
 *
 *   Gamma_a(phi, c) = sum_k gamma_k f_k(phi) g_k(c) - delta phi,
 *
 * where each term is tagged as proliferation (gamma_k > 0) or death
 * (gamma_k < 0). Presets that cannot be written that way carry a direct
 * evaluator instead. Absorption is Q_a(phi, c) = -lambda_a h_a(phi) q_a(c).
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "mpg/constitutive.hpp"
#include "mpg/errors.hpp"
#include "mpg/numerics.hpp"

namespace mpg {

enum class Population { Tumor = 0, Host = 1 };

inline constexpr std::array<Population, 2> kPopulations{Population::Tumor, Population::Host};

inline const char* population_tag(Population a) { return a == Population::Tumor ? "T" : "H"; }
inline std::size_t index(Population a) { return static_cast<std::size_t>(a); }

using BivariateFn = std::function<double(double, double)>;

/// One factored growth contribution gamma * f(phi) * g(c).
struct KineticTerm {
  std::string id;
  double rate = 0.0;
  ScalarFn f;
  ScalarFn g;
  bool proliferation = true;
};

struct PopulationKinetics {
  std::vector<KineticTerm> terms;
  /// Set for presets that do not factor; replaces the sum over `terms`.
  BivariateFn direct;
  double lambda = 0.0;
  ScalarFn h = [](double) { return 0.0; };
  ScalarFn q = [](double) { return 0.0; };

  bool factored() const { return !direct; }
};

struct KineticsSpec {
  std::array<PopulationKinetics, 2> populations;
  double delta = 0.0;
  double phi_max = 1.0;
  double c_b = 1.0;
  double c_star = 0.0;

  const PopulationKinetics& operator[](Population a) const { return populations[index(a)]; }
  PopulationKinetics& operator[](Population a) { return populations[index(a)]; }
};

/// Gamma_a(phi, c), including the natural apoptosis -delta phi.
inline double gamma_eval(const KineticsSpec& spec, Population a, double phi, double c) {
  const auto& pk = spec[a];
  double g = 0.0;
  if (pk.direct) {
    g = pk.direct(phi, c);
  } else {
    for (const auto& t : pk.terms) g += t.rate * t.f(phi) * t.g(c);
  }
  return g - spec.delta * phi;
}

/// Q_a(phi, c) = -lambda_a h_a(phi) q_a(c).
inline double q_absorption_eval(const KineticsSpec& spec, Population a, double phi, double c) {
  const auto& pk = spec[a];
  return -pk.lambda * pk.h(phi) * pk.q(c);
}

/// C^2 quintic smoothstep on [-width, width]; 0 below, 1 above, 1/2 at 0.
inline double mollified_heaviside(double x, double width) {
  if (!(width > 0.0)) throw ConfigError("mollification width must be positive");
  if (x <= -width) return 0.0;
  if (x >= width) return 1.0;
  auto step = [](double t) { return t * t * t * (t * (6.0 * t - 15.0) + 10.0); };
  const double t = (x + width) / (2.0 * width);
  // Evaluate the upper half by symmetry so rounding cannot overshoot 1.
  return t <= 0.5 ? step(t) : 1.0 - step(1.0 - t);
}

/// f(clamp(x, lo, hi)): extends an in-range formula by its end values.
inline ScalarFn clamped(ScalarFn f, double lo, double hi) {
  return [f = std::move(f), lo, hi](double x) { return f(std::clamp(x, lo, hi)); };
}

// ---------------------------------------------------------------------------
// Presets

/// phi(1-phi) S0 c/(1+S1 c) - phi (S2+S3 c)/(1+S4 c).
struct BrewardMM {
  double s0, s1, s2, s3, s4;
};
/// gamma phi (1-phi) (c - c_star).
struct ThresholdLogistic {
  double gamma, c_star;
};
/// gamma1 phi (1-phi) (c - c_star)^+ - gamma2 phi (c - c_star)^-.
struct CorrectedThreshold {
  double gamma1, gamma2, c_star;
};
/// ATP-driven switch on f(phi) g(c) - theta_hat; does not factor.
struct EnergyATP {
  double k, theta_hat, q0_m, tau_half;
  ScalarFn f;  ///< defaults to phi_max - phi
  ScalarFn g;  ///< defaults to c
};
/// Stress-gated proliferation and apoptosis with thresholds sigma_star <= sigma_star2.
struct StressInduced {
  double gamma, delta_alpha, sigma_star, sigma_star2, c_star;
  std::optional<double> width;
};
/// Explicit list of factored terms.
struct Factored {
  std::vector<KineticTerm> terms;
};

using GrowthPreset = std::variant<BrewardMM, ThresholdLogistic, CorrectedThreshold, EnergyATP, StressInduced, Factored>;

inline std::string preset_name(const GrowthPreset& p) {
  constexpr std::array names{"breward_mm", "threshold_logistic", "corrected_threshold", "energy_atp", "stress_induced",
                             "factored"};
  return names[p.index()];
}

/// Maps a preset onto the factored representation of one population.
/// Formulas given on the physical range are extended by clamping their
/// arguments, which realizes the sign conventions the a priori bounds rely on.
/// StressInduced needs the constitutive pair to evaluate Sigma(phi).
inline void apply_growth(PopulationKinetics& pk, const GrowthPreset& preset, double phi_max,
                         const ConstitutivePair* pair = nullptr) {
  pk.terms.clear();
  pk.direct = nullptr;
  const auto logistic = clamped([](double p) { return p * (1.0 - p); }, 0.0, phi_max);
  const auto linear = clamped([](double p) { return p; }, 0.0, phi_max);
  if (const auto* b = std::get_if<BrewardMM>(&preset)) {
    const double s1 = b->s1, s2 = b->s2, s3 = b->s3, s4 = b->s4;
    pk.terms.push_back({"mitosis", b->s0, logistic,
                        clamped([s1](double c) { return c / (1.0 + s1 * c); }, 0.0, HUGE_VAL), true});
    pk.terms.push_back({"death", -1.0, linear,
                        clamped([s2, s3, s4](double c) { return (s2 + s3 * c) / (1.0 + s4 * c); }, 0.0, HUGE_VAL),
                        false});
  } else if (const auto* t = std::get_if<ThresholdLogistic>(&preset)) {
    const double cs = t->c_star;
    pk.terms.push_back({"proliferation", t->gamma, logistic, [cs](double c) { return positive_part(c - cs); }, true});
    pk.terms.push_back({"death", -t->gamma, logistic, [cs](double c) { return negative_part(c - cs); }, false});
  } else if (const auto* t = std::get_if<CorrectedThreshold>(&preset)) {
    const double cs = t->c_star;
    pk.terms.push_back({"proliferation", t->gamma1, logistic, [cs](double c) { return positive_part(c - cs); }, true});
    pk.terms.push_back({"death", -t->gamma2, linear, [cs](double c) { return negative_part(c - cs); }, false});
  } else if (const auto* e = std::get_if<EnergyATP>(&preset)) {
    const ScalarFn f = e->f ? e->f : clamped([phi_max](double p) { return phi_max - p; }, 0.0, phi_max);
    const ScalarFn g = e->g ? e->g : clamped([](double c) { return c; }, 0.0, HUGE_VAL);
    const double birth = e->k * std::log(2.0) / e->q0_m;
    const double death = e->k * std::log(2.0) / (e->theta_hat * e->tau_half);
    const double theta = e->theta_hat;
    pk.direct = [f, g, birth, death, theta, phi_max](double phi, double c) {
      const double p = std::clamp(phi, 0.0, phi_max);
      const double drive = f(p) * g(c) - theta;
      return birth * p * positive_part(drive) - death * p * negative_part(drive);
    };
  } else if (const auto* s = std::get_if<StressInduced>(&preset)) {
    if (!pair) throw ConfigError("stress_induced growth needs the constitutive pair");
    if (s->sigma_star > s->sigma_star2) throw ConfigError("stress_induced requires sigma_star <= sigma_star2");
    const double width = s->width.value_or(std::max(0.01 * std::abs(s->sigma_star2 - s->sigma_star), 1e-6));
    const ConstitutivePair pr = *pair;
    // Sigma is singular at 0 for adhesive laws; the phi factor removes it.
    auto stress = [pr](double p) {
      try {
        return pr.sigma(p);
      } catch (const DomainError&) {
        return 0.0;
      }
    };
    const double s1 = s->sigma_star, s2 = s->sigma_star2, cs = s->c_star;
    const auto gated = clamped([stress, s1, width](double p) { return p * mollified_heaviside(s1 - stress(p), width); },
                               0.0, phi_max);
    const auto apoptotic = clamped(
        [stress, s2, width](double p) { return p * mollified_heaviside(stress(p) - s2, width); }, 0.0, phi_max);
    pk.terms.push_back({"proliferation", s->gamma, gated, [cs](double c) { return positive_part(c / cs - 1.0); }, true});
    pk.terms.push_back({"starvation", -s->gamma, gated, [cs](double c) { return negative_part(c / cs - 1.0); }, false});
    pk.terms.push_back({"stress_apoptosis", -s->delta_alpha, apoptotic, [](double) { return 1.0; }, false});
  } else {
    pk.terms = std::get<Factored>(preset).terms;
  }
}

/// -lambda phi c.
struct LinearUptake {
  double lambda;
};
/// -lambda phi c / (K + c).
struct MichaelisMentenUptake {
  double lambda, k_half;
};
/// -lambda phi (phi_max - phi) c.
struct EnergyUptake {
  double lambda;
};
/// Explicit h and q.
struct CustomUptake {
  double lambda;
  ScalarFn h, q;
};

using AbsorptionPreset = std::variant<LinearUptake, MichaelisMentenUptake, EnergyUptake, CustomUptake>;

inline void apply_absorption(PopulationKinetics& pk, const AbsorptionPreset& preset, double phi_max) {
  const auto identity = clamped([](double p) { return p; }, 0.0, phi_max);
  const auto nonneg = [](double c) { return c > 0.0 ? c : 0.0; };
  if (const auto* l = std::get_if<LinearUptake>(&preset)) {
    pk.lambda = l->lambda;
    pk.h = identity;
    pk.q = nonneg;
  } else if (const auto* m = std::get_if<MichaelisMentenUptake>(&preset)) {
    pk.lambda = m->lambda;
    pk.h = identity;
    const double k = m->k_half;
    pk.q = [k](double c) { return c > 0.0 ? c / (k + c) : 0.0; };
  } else if (const auto* e = std::get_if<EnergyUptake>(&preset)) {
    pk.lambda = e->lambda;
    pk.h = clamped([phi_max](double p) { return p * (phi_max - p); }, 0.0, phi_max);
    pk.q = nonneg;
  } else {
    const auto& c = std::get<CustomUptake>(preset);
    pk.lambda = c.lambda;
    pk.h = c.h;
    pk.q = c.q;
  }
}

/// Same growth and uptake law for both populations unless `host` overrides are given.
inline KineticsSpec build_kinetics(const GrowthPreset& tumor_growth, const AbsorptionPreset& tumor_uptake,
                                   double delta, double phi_max, double c_b, double c_star = 0.0,
                                   const ConstitutivePair* pair = nullptr,
                                   const GrowthPreset* host_growth = nullptr,
                                   const AbsorptionPreset* host_uptake = nullptr) {
  KineticsSpec spec;
  spec.delta = delta;
  spec.phi_max = phi_max;
  spec.c_b = c_b;
  spec.c_star = c_star;
  apply_growth(spec[Population::Tumor], tumor_growth, phi_max, pair);
  apply_growth(spec[Population::Host], host_growth ? *host_growth : tumor_growth, phi_max, pair);
  apply_absorption(spec[Population::Tumor], tumor_uptake, phi_max);
  apply_absorption(spec[Population::Host], host_uptake ? *host_uptake : tumor_uptake, phi_max);
  return spec;
}

// ---------------------------------------------------------------------------
// Hypothesis validation

enum class CheckStatus { Pass, Fail, Advisory };

inline const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    default: return "advisory";
  }
}

struct HypothesisCheck {
  std::string id;
  CheckStatus status = CheckStatus::Pass;
  std::string witness;
};

struct ValidationReport {
  std::vector<HypothesisCheck> checks;

  bool passed(std::string_view id_prefix) const {
    bool any = false;
    for (const auto& c : checks) {
      if (c.id.rfind(id_prefix, 0) != 0) continue;
      any = true;
      if (c.status == CheckStatus::Fail) return false;
    }
    return any;
  }
  bool failed(std::string_view id_prefix) const {
    return std::any_of(checks.begin(), checks.end(), [&](const HypothesisCheck& c) {
      return c.id.rfind(id_prefix, 0) == 0 && c.status == CheckStatus::Fail;
    });
  }
  std::vector<HypothesisCheck> failures() const {
    std::vector<HypothesisCheck> out;
    for (const auto& c : checks)
      if (c.status == CheckStatus::Fail) out.push_back(c);
    return out;
  }
};

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

class Recorder {
 public:
  explicit Recorder(ValidationReport& r) : r_(r) {}
  void add(std::string id, bool ok, std::string witness = {}) {
    r_.checks.push_back({std::move(id), ok ? CheckStatus::Pass : CheckStatus::Fail, ok ? std::string{} : std::move(witness)});
  }
  void advisory(std::string id, std::string witness) {
    r_.checks.push_back({std::move(id), CheckStatus::Advisory, std::move(witness)});
  }

 private:
  ValidationReport& r_;
};

/// First sample x in [lo, hi] where pred(x) is false, if any.
template <class Pred>
std::optional<double> find_violation(double lo, double hi, int n, Pred pred) {
  for (int i = 0; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    if (!pred(x)) return x;
  }
  return std::nullopt;
}

}  // namespace detail

inline constexpr int kValidationSamples = 400;
inline constexpr double kValidationTol = 1e-12;

/// Checks hypotheses H1-H7 on samples. Failures are reported, never thrown.
inline ValidationReport validate_hypotheses(const KineticsSpec& spec, const ConstitutivePair& pair) {
  using detail::fmt;
  ValidationReport report;
  detail::Recorder rec(report);
  const int n = kValidationSamples;
  const double pm = spec.phi_max;
  const double tol = kValidationTol;
  const double lip_hi = pair.domain_upper() ? std::min(pm, 0.999 * *pair.domain_upper()) : pm;

  rec.add("H1", std::abs(pair.phi(0.0)) == 0.0, "Phi(0) = " + fmt(pair.phi(0.0)));
  if (pair.domain_upper())
    rec.advisory("H1", "Phi' is infinite at phi_max = " + fmt(*pair.domain_upper()) + " (blow-up stress law)");

  rec.add("H2.delta", spec.delta > 0.0, "delta = " + fmt(spec.delta) + " <= 0");

  auto phi_lipschitz = [&](const std::string& id, const ScalarFn& f) {
    try {
      auto cert = phi_lipschitz_constant(pair, f, 0.0, lip_hi, 201, id);
      (void)cert;
      rec.add(id, true);
    } catch (const DegenerateError& e) {
      rec.advisory(id, e.what());
    }
  };

  for (Population a : kPopulations) {
    const std::string P = population_tag(a);
    const auto& pk = spec[a];
    if (!pk.factored()) {
      const auto& gam = pk.direct;
      auto v0 = detail::find_violation(0.0, spec.c_b, n, [&](double c) { return std::abs(gam(0.0, c)) <= tol; });
      rec.add("H3.direct.zero_" + P, !v0, v0 ? "Gamma_" + P + "(0, " + fmt(*v0) + ") != 0" : "");
      auto vneg = detail::find_violation(-1.0, -1e-6, n, [&](double p) {
        return gamma_eval(spec, a, p, spec.c_b) >= -tol && gamma_eval(spec, a, p, 0.0) >= -tol;
      });
      rec.add("H3.direct.below_" + P, !vneg, vneg ? "Gamma_" + P + "(" + fmt(*vneg) + ", c) < 0" : "");
      auto vpos = detail::find_violation(pm + 1e-6, pm + 1.0, n, [&](double p) {
        return gamma_eval(spec, a, p, spec.c_b) <= tol && gamma_eval(spec, a, p, 0.0) <= tol;
      });
      rec.add("H3.direct.above_" + P, !vpos, vpos ? "Gamma_" + P + "(" + fmt(*vpos) + ", c) > 0" : "");
      rec.advisory("H3.direct_" + P, "non-factored growth: Phi-Lipschitz and factor checks not applicable");
    }
    for (const auto& t : pk.terms) {
      const std::string nu = t.proliferation ? "p" : "d";
      const std::string tag = "_" + P + "^" + nu + (t.id.empty() ? "" : "[" + t.id + "]");
      const std::string sym = "γ_" + P + "^" + nu + " = " + fmt(t.rate);
      if (t.proliferation)
        rec.add("H2.gamma" + tag, t.rate > 0.0, sym + " ≤ 0");
      else
        rec.add("H2.gamma" + tag, t.rate < 0.0, sym + " ≥ 0");

      double sup = 0.0;
      auto vnn = detail::find_violation(0.0, pm, n, [&](double p) {
        const double v = t.f(p);
        sup = std::max(sup, std::abs(v));
        return std::isfinite(v) && v >= -tol;
      });
      rec.add("H3.bounded_nonneg.f" + tag, !vnn, vnn ? "f" + tag + "(" + fmt(*vnn) + ") = " + fmt(t.f(*vnn)) : "");
      phi_lipschitz("H3.phi_lipschitz.f" + tag, t.f);

      if (t.proliferation) {
        const bool ends = std::abs(t.f(0.0)) <= tol && std::abs(t.f(pm)) <= tol;
        auto vl = detail::find_violation(-1.0, -1e-6, n, [&](double p) { return t.f(p) >= -tol; });
        auto vr = detail::find_violation(pm + 1e-6, pm + 1.0, n, [&](double p) { return t.f(p) <= tol; });
        std::string w;
        if (!ends) w = "f" + tag + "(0) = " + fmt(t.f(0.0)) + ", f(phi_max) = " + fmt(t.f(pm));
        else if (vl) w = "f" + tag + "(" + fmt(*vl) + ") < 0";
        else if (vr) w = "f" + tag + "(" + fmt(*vr) + ") > 0";
        rec.add("H3.1.f" + tag, ends && !vl && !vr, w);
      } else {
        const bool zero = std::abs(t.f(0.0)) <= tol;
        auto vl = detail::find_violation(-1.0, -1e-6, n, [&](double p) { return t.f(p) <= tol; });
        auto vr = detail::find_violation(pm + 1e-6, pm + 1.0, n, [&](double p) { return t.f(p) >= -tol; });
        std::string w;
        if (!zero) w = "f" + tag + "(0) = " + fmt(t.f(0.0));
        else if (vl) w = "f" + tag + "(" + fmt(*vl) + ") > 0";
        else if (vr) w = "f" + tag + "(" + fmt(*vr) + ") < 0";
        rec.add("H3.2.f" + tag, zero && !vl && !vr, w);
        std::optional<double> dec;
        double prev = t.f(0.0);
        for (int i = 1; i <= n && !dec; ++i) {
          const double p = pm * i / n;
          const double cur = t.f(p);
          if (cur < prev - tol) dec = p;
          prev = cur;
        }
        rec.add("H3.3.f" + tag, !dec, dec ? "f" + tag + " decreases near phi = " + fmt(*dec) : "");
      }

      double max_slope = 0.0;
      auto vg = detail::find_violation(-spec.c_b, 2.0 * spec.c_b, 3 * n, [&](double c) {
        const double v = t.g(c);
        return std::isfinite(v) && v >= -tol;
      });
      for (int i = 0; i < 3 * n; ++i) {
        const double c0 = -spec.c_b + 3.0 * spec.c_b * i / (3 * n);
        const double c1 = -spec.c_b + 3.0 * spec.c_b * (i + 1) / (3 * n);
        max_slope = std::max(max_slope, std::abs(t.g(c1) - t.g(c0)) / (c1 - c0));
      }
      const bool lip = std::isfinite(max_slope);
      rec.add("H4.g" + tag, !vg && lip,
              vg ? "g" + tag + "(" + fmt(*vg) + ") = " + fmt(t.g(*vg)) + " < 0" : "g" + tag + " not Lipschitz");
    }

    rec.add("H5.lambda_" + P, pk.lambda > 0.0, "lambda_" + P + " = " + fmt(pk.lambda) + " <= 0");
    auto vh = detail::find_violation(-1.0, pm + 1.0, n, [&](double p) { return pk.h(p) >= -tol; });
    rec.add("H6.nonneg.h_" + P, !vh, vh ? "h_" + P + "(" + fmt(*vh) + ") < 0" : "");
    phi_lipschitz("H6.phi_lipschitz.h_" + P, pk.h);

    auto vq = detail::find_violation(0.0, 2.0 * spec.c_b, n, [&](double c) { return pk.q(c) >= -tol; });
    rec.add("H7.nonneg.q_" + P, !vq, vq ? "q_" + P + "(" + fmt(*vq) + ") < 0" : "");
    const bool q0 = std::abs(pk.q(0.0)) <= tol;
    auto vqn = detail::find_violation(-spec.c_b, -1e-6, n, [&](double c) { return pk.q(c) <= tol; });
    rec.add("H7.1.q_" + P, q0 && !vqn,
            !q0 ? "q_" + P + "(0) = " + fmt(pk.q(0.0)) : (vqn ? "q_" + P + "(" + fmt(*vqn) + ") > 0" : ""));
    std::optional<double> qdec;
    double prev = pk.q(0.0);
    for (int i = 1; i <= n && !qdec; ++i) {
      const double c = 2.0 * spec.c_b * i / n;
      const double cur = pk.q(c);
      if (cur < prev - tol) qdec = c;
      prev = cur;
    }
    rec.add("H7.2.q_" + P, !qdec, qdec ? "q_" + P + " decreases near c = " + fmt(*qdec) : "");
  }
  return report;
}

}  // namespace mpg
