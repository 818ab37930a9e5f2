#pragma once

/**
 * @file constitutive.hpp
 * @brief Cell stress laws and the nonlinear diffusion potential they induce.
 *
 * A stress law Sigma(s) of the cell volume ratio s defines the constitutive
 * function Phi through
 *
 *   Phi'(s) = s (s Sigma(s))',   Phi(0) = 0,
 *
 * so that the cell balance reads phi_t - kappa_m Lap Phi(phi) = Gamma. Four
 * families are provided; three have closed-form Phi, the asymptotic blow-up
 * law is integrated numerically once and cached.
 */

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mpg/errors.hpp"
#include "mpg/numerics.hpp"

namespace mpg {

/// Sigma(s) = a s + b [(s - phi_star)^+]^n.
struct PolynomialOvershoot {
  double a, b;
  int n;
  double phi_star;

  PolynomialOvershoot(double a_, double b_, int n_, double phi_star_) : a(a_), b(b_), n(n_), phi_star(phi_star_) {
    if (!(a > 0.0)) throw ConstructionError("PolynomialOvershoot requires a > 0");
    if (!(b > 0.0)) throw ConstructionError("PolynomialOvershoot requires b > 0");
    if (n < 1) throw ConstructionError("PolynomialOvershoot requires integer n >= 1");
    if (!(phi_star > 0.0 && phi_star < 1.0)) throw ConstructionError("PolynomialOvershoot requires phi_star in (0,1)");
  }
};

/// Sigma(s) = tau s / (1 + lambda s^2); maximum tau / (2 sqrt(lambda)) at s = 1/sqrt(lambda).
struct SaturatingHump {
  double tau, lambda;

  SaturatingHump(double tau_, double lambda_) : tau(tau_), lambda(lambda_) {
    if (!(tau > 0.0)) throw ConstructionError("SaturatingHump requires tau > 0");
    if (!(lambda > 0.0)) throw ConstructionError("SaturatingHump requires lambda > 0");
  }
};

/// Adhesive law with stress-free ratio phi_star: log branch for n = 1,
/// power branch for n > 1. Its potential is Phi(s) = |s|^(n-1) s.
struct PowerAdhesive {
  double n;
  double phi_star;

  PowerAdhesive(double n_, double phi_star_) : n(n_), phi_star(phi_star_) {
    if (!(n >= 1.0)) throw ConstructionError("PowerAdhesive requires n >= 1");
    if (!(phi_star > 0.0 && phi_star < 1.0)) throw ConstructionError("PowerAdhesive requires phi_star in (0,1)");
  }
};

/// Sigma(s) = p (phi_max - phi_star) (s - phi_star) / (|s| (phi_max - s)), blowing up at phi_max.
struct AsymptoticBlowup {
  double p, phi_star, phi_max;

  AsymptoticBlowup(double p_, double phi_star_, double phi_max_) : p(p_), phi_star(phi_star_), phi_max(phi_max_) {
    if (!(p > 0.0)) throw ConstructionError("AsymptoticBlowup requires p > 0");
    if (!(phi_max > 0.0 && phi_max <= 1.0)) throw ConstructionError("AsymptoticBlowup requires phi_max in (0,1]");
    if (!(phi_star > 0.0 && phi_star < phi_max))
      throw ConstructionError("AsymptoticBlowup requires phi_star in (0, phi_max)");
  }
};

using StressLaw = std::variant<PolynomialOvershoot, SaturatingHump, PowerAdhesive, AsymptoticBlowup>;

inline std::string law_name(const StressLaw& law) {
  struct {
    std::string operator()(const PolynomialOvershoot&) const { return "polynomial_overshoot"; }
    std::string operator()(const SaturatingHump&) const { return "saturating_hump"; }
    std::string operator()(const PowerAdhesive&) const { return "power_adhesive"; }
    std::string operator()(const AsymptoticBlowup&) const { return "asymptotic_blowup"; }
  } v;
  return std::visit(v, law);
}

/// Evaluates Sigma(s). Throws DomainError where the law is singular.
inline double sigma_eval(const StressLaw& law, double s) {
  struct {
    double s;
    double operator()(const PolynomialOvershoot& l) const {
      return l.a * s + l.b * std::pow(positive_part(s - l.phi_star), l.n);
    }
    double operator()(const SaturatingHump& l) const { return l.tau * s / (1.0 + l.lambda * s * s); }
    double operator()(const PowerAdhesive& l) const {
      if (s == 0.0) throw DomainError("PowerAdhesive stress is singular at s = 0");
      if (l.n == 1.0) return std::log(std::abs(s / l.phi_star)) / s;
      return l.n / (l.n - 1.0) * (std::pow(std::abs(s), l.n - 1.0) - std::pow(l.phi_star, l.n - 1.0)) / s;
    }
    double operator()(const AsymptoticBlowup& l) const {
      if (s >= l.phi_max) throw DomainError("AsymptoticBlowup stress is undefined for s >= phi_max");
      if (s == 0.0) throw DomainError("AsymptoticBlowup stress is singular at s = 0");
      return l.p * (l.phi_max - l.phi_star) * (s - l.phi_star) / (std::abs(s) * (l.phi_max - s));
    }
  } v{s};
  return std::visit(v, law);
}

/// Phi together with Phi', Phi^{-1} and the metadata the solvers need.
/// Immutable after construction and cheap to copy (the blow-up table is shared).
class ConstitutivePair {
 public:
  explicit ConstitutivePair(StressLaw law) : law_(std::move(law)) {
    if (auto* l = std::get_if<AsymptoticBlowup>(&law_)) build_blowup_table(*l);
  }

  const StressLaw& law() const { return law_; }
  std::string name() const { return law_name(law_); }

  double sigma(double s) const { return sigma_eval(law_, s); }

  double phi(double s) const {
    check_domain(s);
    if (const auto* l = std::get_if<PolynomialOvershoot>(&law_)) {
      const double p = positive_part(s - l->phi_star);
      const double n = l->n;
      return 2.0 / 3.0 * l->a * s * s * s +
             l->b * std::pow(p, n) * (s * s - s * p / (n + 1.0) + p * p / ((n + 1.0) * (n + 2.0)));
    }
    if (const auto* l = std::get_if<SaturatingHump>(&law_)) {
      const double r = std::sqrt(l->lambda);
      return l->tau / l->lambda * (std::atan(r * s) / r - s / (1.0 + l->lambda * s * s));
    }
    if (const auto* l = std::get_if<PowerAdhesive>(&law_)) {
      return l->n == 1.0 ? s : std::pow(std::abs(s), l->n - 1.0) * s;
    }
    return (*table_)(s);
  }

  /// Phi'(s) = s (s Sigma(s))', in closed form for every law.
  double phi_prime(double s) const {
    check_domain(s);
    if (const auto* l = std::get_if<PolynomialOvershoot>(&law_)) {
      const double p = positive_part(s - l->phi_star);
      const double kink = p > 0.0 ? l->b * l->n * s * s * std::pow(p, l->n - 1) : 0.0;
      return 2.0 * l->a * s * s + l->b * s * std::pow(p, l->n) + kink;
    }
    if (const auto* l = std::get_if<SaturatingHump>(&law_)) {
      const double d = 1.0 + l->lambda * s * s;
      return 2.0 * l->tau * s * s / (d * d);
    }
    if (const auto* l = std::get_if<PowerAdhesive>(&law_)) {
      return l->n == 1.0 ? 1.0 : l->n * std::pow(std::abs(s), l->n - 1.0);
    }
    const auto& l = std::get<AsymptoticBlowup>(law_);
    const double gap = l.phi_max - s;
    return l.p * (l.phi_max - l.phi_star) * (l.phi_max - l.phi_star) * std::abs(s) / (gap * gap);
  }

  /// Solves Phi(s) = u by bracketing plus safeguarded Newton.
  double phi_inverse(double u) const {
    if (u == 0.0) return 0.0;
    if (!std::isfinite(u)) throw RangeError("Phi^{-1} of a non-finite value");
    const auto [rlo, rhi] = range();
    if (!(u > rlo && u < rhi)) throw RangeError("value " + std::to_string(u) + " outside the range of Phi");
    const ScalarFn g = [&](double s) { return phi(s) - u; };
    const ScalarFn dg = [&](double s) { return phi_prime(s); };
    if (u > 0.0) {
      double hi = upper_ ? 0.5 * *upper_ : 1.0;
      while (phi(hi) < u) {
        const double next = upper_ ? hi + 0.5 * (*upper_ - hi) : 2.0 * hi;
        if (next == hi || !std::isfinite(next)) throw RangeError("Phi^{-1}: value beyond the representable domain");
        hi = next;
      }
      return bracketed_root(g, dg, 0.0, hi);
    }
    double lo = -1.0;
    while (phi(lo) > u) {
      lo *= 2.0;
      if (!std::isfinite(lo)) throw RangeError("Phi^{-1}: value beyond the representable domain");
    }
    return bracketed_root(g, dg, lo, 0.0);
  }

  /// Open range (inf Phi, sup Phi) over the admissible domain.
  std::pair<double, double> range() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (const auto* l = std::get_if<SaturatingHump>(&law_)) {
      const double lim = l->tau / l->lambda * std::numbers::pi / (2.0 * std::sqrt(l->lambda));
      return {-lim, lim};
    }
    return {-inf, inf};
  }

  /// Phi'(0) = 0.
  bool degenerate_at_zero() const {
    if (const auto* l = std::get_if<PowerAdhesive>(&law_)) return l->n > 1.0;
    return true;
  }

  /// Finite upper end of the domain (phi_max for the blow-up law).
  std::optional<double> domain_upper() const { return upper_; }

  bool in_domain(double s) const { return !upper_ || s < *upper_; }

 private:
  void check_domain(double s) const {
    if (upper_ && !(s < *upper_)) throw DomainError("argument at or beyond the stress asymptote phi_max");
  }

  void build_blowup_table(const AsymptoticBlowup& l) {
    upper_ = l.phi_max;
    // Uniform on the compressive side, geometrically graded towards the asymptote.
    constexpr int n_neg = 2000, n_pos = 6000;
    const double xi_max = std::log(1e8);
    std::vector<double> nodes;
    nodes.reserve(n_neg + n_pos + 1);
    for (int i = n_neg; i > 0; --i) nodes.push_back(-static_cast<double>(i) / n_neg);
    for (int j = 0; j <= n_pos; ++j) nodes.push_back(l.phi_max * -std::expm1(-xi_max * j / n_pos));
    const double coef = l.p * (l.phi_max - l.phi_star) * (l.phi_max - l.phi_star);
    const double phi_max = l.phi_max;
    ScalarFn integrand = [coef, phi_max](double s) {
      const double gap = phi_max - s;
      return coef * std::abs(s) / (gap * gap);
    };
    table_ = std::make_shared<const CumulativeIntegral>(std::move(integrand), std::move(nodes), 0.0, true, 1e-15);
  }

  StressLaw law_;
  std::optional<double> upper_;
  std::shared_ptr<const CumulativeIntegral> table_;
};

/// Builds the pair and checks strict monotonicity of Phi on a dense sample.
inline ConstitutivePair build_pair(StressLaw law) {
  ConstitutivePair pair(std::move(law));
  if (std::abs(pair.phi(0.0)) > 0.0) throw ConstructionError("Phi(0) must vanish");
  const double hi = pair.domain_upper() ? 0.999 * *pair.domain_upper() : 1.0;
  const int samples = 1000;
  double prev = pair.phi(-1.0);
  for (int i = 1; i <= samples; ++i) {
    const double s = -1.0 + (hi + 1.0) * i / samples;
    const double cur = pair.phi(s);
    if (!(cur > prev)) throw ConstructionError("Phi is not strictly increasing near s = " + std::to_string(s));
    prev = cur;
  }
  return pair;
}

/// Sample-based Phi-Lipschitz constant of f on an interval.
struct PhiLipschitzCertificate {
  std::string function_id;
  double lo = 0.0, hi = 0.0;
  double constant = 0.0;
  int sample_resolution = 0;
};

namespace detail {

inline double max_phi_lipschitz_ratio(const std::vector<double>& s, const std::vector<double>& phi,
                                      const std::vector<double>& f, std::size_t stride) {
  double best = 0.0;
  for (std::size_t i = 0; i < s.size(); i += stride) {
    for (std::size_t j = i + stride; j < s.size(); j += stride) {
      const double num = (f[j] - f[i]) * (f[j] - f[i]);
      const double den = (phi[j] - phi[i]) * (s[j] - s[i]);
      if (num == 0.0) continue;
      if (!(den > 0.0)) {
        throw DegenerateError("f varies where Phi is flat near s = " + std::to_string(s[i]));
      }
      best = std::max(best, num / den);
    }
  }
  return best;
}

}  // namespace detail

/// Largest sampled |f(s2)-f(s1)|^2 / ((Phi(s2)-Phi(s1))(s2-s1)) over all pairs
/// of a uniform grid (0/0 counts as 0). The estimate is repeated on every
/// other sample; growth by more than half under that refinement means the
/// ratio is unbounded and a DegenerateError is thrown.
inline PhiLipschitzCertificate phi_lipschitz_constant(const ConstitutivePair& pair, const ScalarFn& f, double lo,
                                                      double hi, int resolution, std::string function_id = "f") {
  if (resolution < 2) throw ConfigError("Phi-Lipschitz sampling needs resolution >= 2");
  if (!(hi > lo)) throw ConfigError("Phi-Lipschitz interval must satisfy lo < hi");
  if (!pair.in_domain(hi)) throw DomainError("Phi-Lipschitz interval leaves the domain of Phi");
  std::vector<double> s(resolution), ph(resolution), fv(resolution);
  for (int i = 0; i < resolution; ++i) {
    s[i] = lo + (hi - lo) * i / (resolution - 1);
    ph[i] = pair.phi(s[i]);
    fv[i] = f(s[i]);
  }
  const double fine = detail::max_phi_lipschitz_ratio(s, ph, fv, 1);
  if (!std::isfinite(fine)) throw DegenerateError("non-finite Phi-Lipschitz ratio for " + function_id);
  if (resolution >= 5) {
    const double coarse = detail::max_phi_lipschitz_ratio(s, ph, fv, 2);
    if (fine > 1.5 * coarse && fine > 0.0) {
      throw DegenerateError(function_id + " is not Phi-Lipschitz on the sample: ratio grows from " +
                            std::to_string(coarse) + " to " + std::to_string(fine) + " under refinement");
    }
  }
  return {std::move(function_id), lo, hi, fine, resolution};
}

}  // namespace mpg
